"""Type-I knot solutions of the vacuum Maxwell equations.

A solution of fixed spin j is specified by complex mode coefficients
Lambda_{m,n} with m in [-j, j] and n in [-j-1, j+1], a length scale ``ell``
and the fixed frequency Omega = 2(j+1) on the cylinder.  The gauge
potential is A_a = Z_a(w) e^{i Omega tau} + c.c. in the left-invariant
coframe (temporal + Coulomb gauge: A_tau = 0, R_a A_a = 0), where the
angular profiles Z_a are linear in the coefficients.

Evaluation at a spacetime event goes through the cylinder: map the event,
evaluate the sphere-frame fields there, and pull the field strength back
with the coframe components; a tetrad shortcut is provided on the t = 0
slice.  Everything broadcasts over arrays of events.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import (
    EPS3,
    MinkowskiEvent,
    S3Point,
    cylinder_trig,
    one_forms_minkowski,
    tetrad_t0,
)
from .harmonics import as_half_integer, half_integer_range, harmonic_table, harmonic_values

__all__ = [
    "ModeCoefficients",
    "XCoefficients",
    "SphereFrameField",
    "MinkowskiField",
    "CoefficientFileError",
    "basis_function",
    "x_coefficients",
    "z_field",
    "sphere_frame_fields",
    "minkowski_fields",
    "minkowski_fields_t0",
    "rs_vector",
    "maxwell_residual",
    "gauge_identity_residual",
    "hopfian_tt_coefficients",
    "hopfian_rotated_coefficients",
]


class CoefficientFileError(ValueError):
    """Raised for malformed coefficient documents."""


@dataclass(frozen=True)
class ModeCoefficients:
    """Mode amplitudes of a fixed-spin type-I solution.

    ``values`` has shape (2j+1, 2j+3): rows run over m = -j..j, columns over
    n = -j-1..j+1, both in increasing order.  Instances are immutable; use
    :meth:`with_values` to derive modified copies.
    """

    j: Fraction
    ell: float
    values: np.ndarray

    def __post_init__(self):
        j = as_half_integer(self.j)
        object.__setattr__(self, "j", j)
        if self.ell <= 0:
            raise ValueError("ell must be positive")
        vals = np.array(self.values, dtype=complex)
        shape = (int(2 * j) + 1, int(2 * j) + 3)
        if vals.shape != shape:
            raise ValueError(f"coefficient array must have shape {shape}, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, j, ell: float) -> "ModeCoefficients":
        j = as_half_integer(j)
        return cls(j, ell, np.zeros((int(2 * j) + 1, int(2 * j) + 3), complex))

    @classmethod
    def from_modes(cls, j, ell: float, modes: dict) -> "ModeCoefficients":
        """Build from a {(m, n): value} mapping; unlisted modes are zero."""
        out = cls.zeros(j, ell)
        vals = np.array(out.values)
        for (m, n), v in modes.items():
            mi, ni = out._locate(m, n)
            vals[mi, ni] = v
        return cls(out.j, ell, vals)

    @classmethod
    def random(cls, j, ell: float, rng: np.random.Generator) -> "ModeCoefficients":
        j = as_half_integer(j)
        shape = (int(2 * j) + 1, int(2 * j) + 3)
        vals = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return cls(j, ell, vals)

    def _locate(self, m, n) -> tuple[int, int]:
        m = as_half_integer(m)
        n = as_half_integer(n)
        if abs(m) > self.j or (self.j - m).denominator != 1:
            raise ValueError(f"m={m} out of range for j={self.j}")
        if abs(n) > self.j + 1 or (self.j - n).denominator != 1:
            raise ValueError(f"n={n} out of range for j={self.j}")
        return int(m + self.j), int(n + self.j + 1)

    def get(self, m, n) -> complex:
        mi, ni = self._locate(m, n)
        return complex(self.values[mi, ni])

    def with_values(self, values) -> "ModeCoefficients":
        return ModeCoefficients(self.j, self.ell, values)

    @property
    def omega(self) -> int:
        """Oscillation frequency on the cylinder, 2(j+1)."""
        return int(2 * self.j) + 2

    @property
    def m_range(self):
        return half_integer_range(-self.j, self.j)

    @property
    def n_range(self):
        return half_integer_range(-self.j - 1, self.j + 1)

    def labels(self) -> list[tuple[Fraction, Fraction]]:
        """Flat (m, n) labels in row-major order, matching :attr:`flat`."""
        return [(m, n) for m in self.m_range for n in self.n_range]

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def to_dict(self) -> dict:
        coeffs = []
        for (m, n), v in zip(self.labels(), self.flat):
            if v != 0:
                coeffs.append({"m": str(m), "n": str(n), "re": float(v.real), "im": float(v.imag)})
        return {"j": str(self.j), "ell": float(self.ell), "coefficients": coeffs}

    @classmethod
    def from_dict(cls, doc: dict) -> "ModeCoefficients":
        try:
            j = as_half_integer(doc["j"])
            ell = float(doc["ell"])
            entries = doc["coefficients"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CoefficientFileError(f"bad coefficient document: {exc}") from exc
        out = cls.zeros(j, ell)
        vals = np.array(out.values)
        for k, entry in enumerate(entries):
            try:
                mi, ni = out._locate(entry["m"], entry["n"])
                vals[mi, ni] = float(entry.get("re", 0.0)) + 1j * float(entry.get("im", 0.0))
            except (KeyError, TypeError, ValueError) as exc:
                raise CoefficientFileError(f"bad coefficient entry #{k}: {exc}") from exc
        return cls(j, ell, vals)

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "ModeCoefficients":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CoefficientFileError(
                    f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
                ) from exc
        return cls.from_dict(doc)


@dataclass(frozen=True)
class XCoefficients:
    """Harmonic expansion coefficients X_a^{m,n} of the angular profiles Z_a.

    ``values`` has shape (3, 2j+1, 2j+1) in the Cartesian frame index
    a = 1, 2, 3 and (m, n) in increasing order; linear in Lambda.
    """

    j: Fraction
    values: np.ndarray


_COMPONENTS = ("+", "3", "-")


def _ladder_factors(j: Fraction, n: Fraction) -> tuple[float, float, float]:
    """Coefficients multiplying Y_{j;m,n+1}, Y_{j;m,n}, Y_{j;m,n-1} in Z_{+,3,-}."""
    plus = math.sqrt(max(float((j - n) * (j - n + 1)), 0.0) / 2.0)
    mid = math.sqrt(max(float((j + 1) ** 2 - n * n), 0.0))
    minus = -math.sqrt(max(float((j + n) * (j + n + 1)), 0.0) / 2.0)
    return plus, mid, minus


def basis_function(j, m, n, component: str, point: S3Point):
    """Single knot-basis profile Z_component^{j;m,n} at a point.

    Harmonics whose second index would leave [-j, j] count as zero; their
    prefactors vanish at the edge indices anyway.
    """
    j, m, n = as_half_integer(j), as_half_integer(m), as_half_integer(n)
    if component not in _COMPONENTS:
        raise ValueError(f"component must be one of {_COMPONENTS}")
    if abs(m) > j or abs(n) > j + 1:
        raise ValueError("index out of range")
    cp, c3, cm = _ladder_factors(j, n)
    if component == "+":
        coef, n_out = cp, n + 1
    elif component == "3":
        coef, n_out = c3, n
    else:
        coef, n_out = cm, n - 1
    if coef == 0.0 or abs(n_out) > j:
        return np.zeros(np.shape(point.alpha), dtype=complex) if np.ndim(point.alpha) else 0j
    return coef * harmonic_values(j, m, n_out, point.alpha, point.beta)


def x_coefficients(modes: ModeCoefficients) -> XCoefficients:
    """Collect the Y_{j;m,n} coefficients of Z_a from the ladder structure.

    In the (+, 3, -) basis the shifts are
        X_+^{m,n} = sqrt((j-n+1)(j-n+2)/2) Lambda_{m,n-1}
        X_3^{m,n} = sqrt((j+1)^2 - n^2)    Lambda_{m,n}
        X_-^{m,n} = -sqrt((j+n+1)(j+n+2)/2) Lambda_{m,n+1}
    followed by the unitary change to a = 1, 2, 3.
    """
    j = modes.j
    d = int(2 * j) + 1
    xp = np.zeros((d, d), complex)
    x3 = np.zeros((d, d), complex)
    xm = np.zeros((d, d), complex)
    for ni, n in enumerate(half_integer_range(-j, j)):
        cp = math.sqrt(float((j - n + 1) * (j - n + 2)) / 2.0)
        c3 = math.sqrt(float((j + 1) ** 2 - n * n))
        cm = -math.sqrt(float((j + n + 1) * (j + n + 2)) / 2.0)
        xp[:, ni] = cp * modes.values[:, ni]          # Lambda_{m, n-1}
        x3[:, ni] = c3 * modes.values[:, ni + 1]      # Lambda_{m, n}
        xm[:, ni] = cm * modes.values[:, ni + 2]      # Lambda_{m, n+1}
    x1 = (xp + xm) / math.sqrt(2.0)
    x2 = (xp - xm) / (1j * math.sqrt(2.0))
    return XCoefficients(j=j, values=np.stack([x1, x2, x3]))


def x_transform_matrix(j) -> np.ndarray:
    """Matrix of Lambda -> X on flattened indices; shape (3 (2j+1)^2, (2j+1)(2j+3)).

    Row order is (a, m, n) with a outermost; column order matches
    :meth:`ModeCoefficients.labels`.  The map is injective.
    """
    j = as_half_integer(j)
    d = int(2 * j) + 1
    dim = d * (d + 2)
    mat = np.zeros((3 * d * d, dim), complex)
    basis = np.eye(dim)
    for col in range(dim):
        modes = ModeCoefficients(j, 1.0, basis[col].reshape(d, d + 2))
        mat[:, col] = x_coefficients(modes).values.reshape(-1)
    return mat


def z_values(modes: ModeCoefficients, alpha, beta) -> np.ndarray:
    """Angular profiles Z_a, shape (3,) + broadcast shape; fast path for grids."""
    x = x_coefficients(modes).values
    table = _harmonic_values_from_pair(modes.j, alpha, beta)
    return np.einsum("amn,mn...->a...", x, table)


def _harmonic_values_from_pair(j, alpha, beta):
    """Spin-j harmonic table straight from (alpha, beta) arrays."""
    class _Pair:
        pass

    pair = _Pair()
    pair.alpha = np.asarray(alpha)
    pair.beta = np.asarray(beta)
    return harmonic_table(j, pair).values


def z_field(modes: ModeCoefficients, point: S3Point) -> np.ndarray:
    """Z_a at a point (or batch), trailing component axis of length 3."""
    vals = z_values(modes, point.alpha, point.beta)
    return np.moveaxis(vals, 0, -1)


@dataclass(frozen=True)
class SphereFrameField:
    """Sphere-frame data at fixed conformal time: profiles and real fields.

    electric_a = 2 Omega Im(Z_a e^{i Omega tau}),
    magnetic_a = -2 Omega Re(Z_a e^{i Omega tau}); component axis trails.
    """

    point: S3Point
    tau: np.ndarray | float
    z: np.ndarray
    electric: np.ndarray
    magnetic: np.ndarray


def sphere_frame_fields(modes: ModeCoefficients, tau, point: S3Point) -> SphereFrameField:
    z = z_values(modes, point.alpha, point.beta)
    om = modes.omega
    phase = np.exp(1j * om * np.asarray(tau, float))
    rotating = z * phase
    electric = 2.0 * om * np.imag(rotating)
    magnetic = -2.0 * om * np.real(rotating)
    return SphereFrameField(
        point=point,
        tau=tau,
        z=np.moveaxis(z, 0, -1),
        electric=np.moveaxis(electric, 0, -1),
        magnetic=np.moveaxis(magnetic, 0, -1),
    )


@dataclass(frozen=True)
class MinkowskiField:
    """Real electric and magnetic fields at spacetime events (trailing 3-axis)."""

    event: MinkowskiEvent
    electric: np.ndarray
    magnetic: np.ndarray

    @property
    def riemann_silberstein(self) -> np.ndarray:
        return self.electric + 1j * self.magnetic


def _sphere_frame_at_events(modes: ModeCoefficients, event: MinkowskiEvent):
    """(electric_a, magnetic_a) sphere-frame arrays (3, ...) at mapped events."""
    t = np.asarray(event.t, float)
    r = np.asarray(event.r, float)
    ell = modes.ell
    sin_tau, cos_tau, _, cos_chi, gamma = cylinder_trig(t, r, ell)
    if np.any(gamma <= 0):
        raise ValueError("event maps outside the cylinder wedge")
    scale = gamma / ell
    xs = event.spatial()
    omega12 = scale * xs
    alpha = omega12[0] + 1j * omega12[1]
    beta = omega12[2] + 1j * cos_chi
    z = z_values(modes, alpha, beta)
    phase = (cos_tau + 1j * sin_tau) ** modes.omega
    rotating = z * phase
    om = modes.omega
    return 2.0 * om * np.imag(rotating), -2.0 * om * np.real(rotating)


def minkowski_fields(modes: ModeCoefficients, event: MinkowskiEvent) -> MinkowskiField:
    """E and B at events, via the cylinder route and the coframe pull-back.

    Assembles F = electric_a e^a ^ e^tau + (1/2) magnetic_a eps_abc e^b ^ e^c
    with the Cartesian coframe components and reads off E_i = F_{i0},
    B_i = (1/2) eps_ijk F_{jk}.
    """
    cal_e, cal_b = _sphere_frame_at_events(modes, event)
    forms = one_forms_minkowski(event, modes.ell)  # (..., 4, 4); row 0 = e^tau
    etau = forms[..., 0, :]
    ea = forms[..., 1:, :]
    # F_{mu nu} = cal_e_a (e^a_mu e^tau_nu - e^a_nu e^tau_mu)
    #           + cal_b_a eps_{abc} e^b_mu e^c_nu
    f_el = np.einsum("a...,...am,...n->...mn", cal_e, ea, etau)
    f_el = f_el - np.swapaxes(f_el, -1, -2)
    f_mag = np.einsum("a...,abc,...bm,...cn->...mn", cal_b, EPS3, ea, ea)
    f = f_el + f_mag
    electric = f[..., 1:, 0]
    magnetic = 0.5 * np.einsum("ijk,...jk->...i", EPS3, f[..., 1:, 1:])
    return MinkowskiField(event=event, electric=electric, magnetic=magnetic)


def minkowski_fields_t0(modes: ModeCoefficients, event: MinkowskiEvent) -> MinkowskiField:
    """Tetrad shortcut on the t = 0 slice: E_i = e^tau_0 e^a_i cal_e_a, etc.

    Cheaper than the full pull-back and used as its independent cross-check.
    """
    t = np.asarray(event.t, float)
    if np.any(t != 0):
        raise ValueError("tetrad shortcut is only valid at t = 0")
    cal_e, cal_b = _sphere_frame_at_events(modes, event)
    ell = modes.ell
    _, _, _, cos_chi, gamma = cylinder_trig(t, np.asarray(event.r, float), ell)
    xs = event.spatial()
    omega = np.stack([gamma * xs[0] / ell, gamma * xs[1] / ell, gamma * xs[2] / ell, cos_chi], axis=-1)
    tet = tetrad_t0(S3Point(omega), ell)  # (..., a, i)
    etau0 = gamma / ell
    electric = etau0[..., None] * np.einsum("...ai,a...->...i", tet, cal_e)
    magnetic = 0.5 * np.einsum(
        "ijk,abc,...bj,...ck,a...->...i", EPS3, EPS3, tet, tet, cal_b
    )
    return MinkowskiField(event=event, electric=electric, magnetic=magnetic)


def rs_vector(modes: ModeCoefficients, event: MinkowskiEvent) -> np.ndarray:
    """Riemann-Silberstein combination E + iB at events."""
    return minkowski_fields(modes, event).riemann_silberstein


def maxwell_residual(modes: ModeCoefficients, events: MinkowskiEvent,
                     step: float | None = None) -> float:
    """Worst relative finite-difference residual of the vacuum equations.

    Checks div E, div B, curl E + dB/dt and curl B - dE/dt by central
    differences at the given events, normalised by the local field
    magnitude |E| + |B|.
    """
    h = step if step is not None else 1e-4 * modes.ell
    t = np.asarray(events.t, float)
    xs = events.spatial()

    def fields(dt=0.0, dx=(0.0, 0.0, 0.0)):
        ev = MinkowskiEvent(t + dt, xs[0] + dx[0], xs[1] + dx[1], xs[2] + dx[2])
        fld = minkowski_fields(modes, ev)
        return fld.electric, fld.magnetic

    grad_e = []
    grad_b = []
    for axis in range(3):
        shift = [0.0, 0.0, 0.0]
        shift[axis] = h
        ep, bp = fields(dx=tuple(shift))
        shift[axis] = -h
        em, bm = fields(dx=tuple(shift))
        grad_e.append((ep - em) / (2 * h))
        grad_b.append((bp - bm) / (2 * h))
    grad_e = np.stack(grad_e)  # (i, ..., j) = d E_j / d x_i
    grad_b = np.stack(grad_b)
    ep, bp = fields(dt=h)
    em, bm = fields(dt=-h)
    dt_e = (ep - em) / (2 * h)
    dt_b = (bp - bm) / (2 * h)
    e0, b0 = fields()
    scale = np.linalg.norm(e0, axis=-1) + np.linalg.norm(b0, axis=-1)

    div_e = grad_e[0, ..., 0] + grad_e[1, ..., 1] + grad_e[2, ..., 2]
    div_b = grad_b[0, ..., 0] + grad_b[1, ..., 1] + grad_b[2, ..., 2]

    def curl(g):
        return np.stack([
            g[1, ..., 2] - g[2, ..., 1],
            g[2, ..., 0] - g[0, ..., 2],
            g[0, ..., 1] - g[1, ..., 0],
        ], axis=-1)

    faraday = curl(grad_e) + dt_b
    ampere = curl(grad_b) - dt_e
    worst = np.max(np.abs(div_e) / scale)
    worst = max(worst, np.max(np.abs(div_b) / scale))
    worst = max(worst, np.max(np.linalg.norm(faraday, axis=-1) / scale))
    worst = max(worst, np.max(np.linalg.norm(ampere, axis=-1) / scale))
    return float(worst)


def gauge_identity_residual(modes: ModeCoefficients, events: MinkowskiEvent) -> float:
    """Max |(r^2 + t^2 + ell^2) A_t + 2 r t A_r| over the events.

    A_mu are the flat components of the gauge potential; the combination
    vanishes identically in the temporal-plus-Coulomb gauge on the cylinder.
    """
    from .geometry import one_forms_polar

    cal_e, cal_b = _sphere_frame_at_events(modes, events)
    pot = -cal_b / modes.omega
    forms = one_forms_polar(events, modes.ell)
    pot_t = np.einsum("a...,...a->...", pot, forms[..., 1:, 0])
    pot_r = np.einsum("a...,...a->...", pot, forms[..., 1:, 1])
    t = np.asarray(events.t, float)
    r = np.asarray(events.r, float)
    resid = (r * r + t * t + modes.ell**2) * pot_t + 2.0 * r * t * pot_r
    return float(np.max(np.abs(resid)))


def hopfian_tt_coefficients(c: float) -> ModeCoefficients:
    """j = 0 preset for the time-translated knot: ell = 1 - c, one active mode.

    Requires c < 1 so that ell stays positive.
    """
    if c >= 1:
        raise ValueError("time-translation parameter must satisfy c < 1")
    ell = 1.0 - c
    return ModeCoefficients.from_modes(0, ell, {(0, -1): -1j * math.pi / (2.0 * ell * ell)})


def hopfian_rotated_coefficients(theta: float) -> ModeCoefficients:
    """j = 0 preset for the rotated knot at ell = 1; theta = 0 is the plain knot."""
    return ModeCoefficients.from_modes(
        0,
        1.0,
        {
            (0, 1): 0.25j * math.pi * (math.cosh(theta) - 1.0),
            (0, 0): -math.pi / (2.0 * math.sqrt(2.0)) * math.sinh(theta),
            (0, -1): -0.25j * math.pi * (math.cosh(theta) + 1.0),
        },
    )
