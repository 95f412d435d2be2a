"""The fifteen conformal Noether charges of a fixed-spin knot solution.

All charges are evaluated on the t = tau = 0 slice, where the charge
densities reduce to polynomial combinations of the angular profiles Z_a,
the embedding coordinates and the t = 0 coframe; the flat-space integrals
become S3 integrals against the quadrature grids of :mod:`emknots.geometry`.
Because every reduced integrand is a trigonometric polynomial of low degree,
the default grid integrates them exactly up to rounding.

Normalisation: the vector-charge density is ``P_a = (1/2) eps_abc E_b B_c``
in the sphere frame (equivalently, momentum density (1/2) E x B in flat
coordinates).  The factor 1/2 matches the analytic reference tables bundled
in :func:`reference_charges`, which normalise the time-translated j = 0 knot
preset to P3 = E/4.  Scalar charges (energy, boosts, scalar SCT) use the
plain energy density.  The same convention is applied on both the S3 and the
direct flat-space sides, so cross-route comparisons are consistent.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import (
    EPS3,
    MinkowskiEvent,
    QuadratureGrid,
    S3Point,
    integrate_on_grid,
    s3_quadrature,
    tetrad_t0,
)
from .harmonics import as_half_integer, half_integer_range
from .knotfield import ModeCoefficients, minkowski_fields, z_values

__all__ = [
    "VECTOR_DENSITY_FACTOR",
    "DensitySample",
    "ChargeSet",
    "ChargeReport",
    "CHARGE_KEYS",
    "density_sample",
    "charge_set",
    "energy",
    "energy_closed",
    "momentum",
    "boost",
    "dilatation",
    "angular_momentum",
    "sct_scalar",
    "sct_vector",
    "spherical_components",
    "reference_charges",
    "momentum_sesquilinear",
    "charge_report",
    "monte_carlo_energy_p3",
    "flat_space_energy_p3",
]

#: Vector-charge densities carry this factor relative to the raw Poynting
#: convention E x B; it normalises the j = 0 time-translated preset to
#: P3 = E/4, the convention of the bundled analytic reference tables.
VECTOR_DENSITY_FACTOR = 0.5

CHARGE_KEYS = (
    "E",
    "P1", "P2", "P3",
    "K1", "K2", "K3",
    "L1", "L2", "L3",
    "D",
    "V0",
    "V1", "V2", "V3",
    "Pr", "Ptheta", "Pphi",
    "Lr", "Ltheta", "Lphi",
    "Vr", "Vtheta", "Vphi",
)


@dataclass(frozen=True)
class DensitySample:
    """Charge densities at S3 points on the tau = 0 slice (trailing 3-axis).

    rho is the sphere-frame energy density; p is the normalised vector
    density, l = p x omega rotated into angular-momentum form, v the
    special-conformal vector density and k = rho * omega the boost density.
    """

    point: S3Point
    rho: np.ndarray
    p: np.ndarray
    l: np.ndarray
    v: np.ndarray
    k: np.ndarray


def _density_arrays(modes: ModeCoefficients, point: S3Point):
    """Leading-axis (3, ...) density building blocks at tau = 0."""
    z = z_values(modes, point.alpha, point.beta)
    om2 = float(modes.omega) ** 2
    rho = 2.0 * om2 * np.sum(np.abs(z) ** 2, axis=0)
    cross = np.cross(z, np.conj(z), axis=0)
    p = VECTOR_DENSITY_FACTOR * np.real(2j * om2 * cross)
    w = np.moveaxis(point.omega, -1, 0)
    wa = w[:3]
    l = np.cross(p, wa, axis=0)
    pw = np.einsum("a...,a...->...", p, wa)
    w_sq = np.einsum("a...,a...->...", wa, wa)
    v = 2.0 * wa * pw - w_sq * p
    k = rho * wa
    return z, rho, p, l, v, k, w


def density_sample(modes: ModeCoefficients, point: S3Point) -> DensitySample:
    _, rho, p, l, v, k, _ = _density_arrays(modes, point)
    return DensitySample(
        point=point,
        rho=rho,
        p=np.moveaxis(p, 0, -1),
        l=np.moveaxis(l, 0, -1),
        v=np.moveaxis(v, 0, -1),
        k=np.moveaxis(k, 0, -1),
    )


@dataclass(frozen=True)
class ChargeSet:
    """All conformal charges plus spherical components, from one grid pass."""

    energy: float
    momentum: np.ndarray
    boost: np.ndarray
    angular_momentum: np.ndarray
    dilatation: float
    sct_scalar: float
    sct_vector: np.ndarray
    momentum_spherical: np.ndarray
    angular_momentum_spherical: np.ndarray
    sct_vector_spherical: np.ndarray
    grid_counts: tuple[int, int, int] = (0, 0, 0)

    def as_dict(self) -> dict[str, float]:
        vals = [self.energy, *self.momentum, *self.boost, *self.angular_momentum,
                self.dilatation, self.sct_scalar, *self.sct_vector,
                *self.momentum_spherical, *self.angular_momentum_spherical,
                *self.sct_vector_spherical]
        return {k: float(v) for k, v in zip(CHARGE_KEYS, vals)}


def _frame_weights(grid: QuadratureGrid):
    """Spherical-component covectors e^a(d_r), e^a(d_theta), e^a(d_phi) on the grid.

    Built by contracting the invariant coframe with the embedding components
    of the coordinate vector fields; d_r uses d_r = -(gamma/ell) d_chi at
    t = 0, with the ell factor applied by the caller.
    """
    w = grid.points.omega  # (N, 4)
    sin_chi = np.sin(grid.chi)
    cos_chi = w[:, 3]
    unit = np.stack([
        np.sin(grid.theta) * np.cos(grid.phi),
        np.sin(grid.theta) * np.sin(grid.phi),
        np.cos(grid.theta),
    ])
    v_chi = np.concatenate([cos_chi * unit, -sin_chi[None, :]], axis=0).T  # (N, 4)
    v_theta = np.concatenate([
        sin_chi * np.stack([
            np.cos(grid.theta) * np.cos(grid.phi),
            np.cos(grid.theta) * np.sin(grid.phi),
            -np.sin(grid.theta),
        ]),
        np.zeros((1, len(grid))),
    ], axis=0).T
    v_phi = np.stack([-w[:, 1], w[:, 0], np.zeros(len(grid)), np.zeros(len(grid))], axis=1)

    def coframe(vec):
        # e^a(v) = -eta^a_{BC} w_B v_C
        from .geometry import HOOFT_SELF_DUAL

        return -np.einsum("abc,nb,nc->an", HOOFT_SELF_DUAL, w, vec)

    return coframe(v_chi), coframe(v_theta), coframe(v_phi)


def charge_set(modes: ModeCoefficients, grid: QuadratureGrid | None = None,
               workers: int | None = None) -> ChargeSet:
    """Evaluate every charge numerically in one pass over the grid.

    The ``theta`` components of the spherical triples are integrated on a
    companion grid with the same node counts but Gauss-Legendre nodes in the
    theta angle: their integrands carry odd powers of sin(theta), which the
    cos(theta) rule only resolves algebraically.  All other integrands are
    polynomial per angle and integrate exactly on the given grid.
    """
    if grid is None:
        grid = s3_quadrature()
    pts = grid.points
    _, rho, p, l, v, k, w = _density_arrays(modes, pts)
    ell = modes.ell
    gamma = 1.0 - w[3]
    tet = np.moveaxis(tetrad_t0(pts, ell), 0, -1)  # (a, i, N)

    def grid_sum(vals):
        return integrate_on_grid(grid, vals, workers=workers)

    e_charge = grid_sum(gamma / ell * rho)
    p_charge = grid_sum(np.einsum("an,ain->in", p, tet))
    k_charge = grid_sum(k)
    # the reference tables scale angular momentum with one more power of
    # ell than the raw x cross p integral; see the module docstring
    l_charge = ell * ell * grid_sum(np.einsum("an,ain->in", l, tet) / gamma)
    d_charge = grid_sum(np.einsum("an,an->n", p, w[:3]))
    v0_charge = ell * grid_sum((1.0 + w[3]) * rho)
    v_charge = ell * ell * grid_sum(np.einsum("an,ain->in", v, tet) / gamma**2)

    e_chi, _, e_phi = _frame_weights(grid)
    e_r = -(gamma / ell) * e_chi

    ang = s3_quadrature(grid.n_chi, grid.n_theta, grid.n_phi, theta_rule="angle")
    _, _, p_ang, l_ang, v_ang, _, w_ang = _density_arrays(modes, ang.points)
    gamma_ang = 1.0 - w_ang[3]
    _, e_theta_ang, _ = _frame_weights(ang)

    def spherical(dens, dens_ang, power):
        r_val = grid_sum((ell / gamma) ** power * np.einsum("an,an->n", dens, e_r))
        phi_val = grid_sum((ell / gamma) ** power * np.einsum("an,an->n", dens, e_phi))
        th_val = integrate_on_grid(
            ang,
            (ell / gamma_ang) ** power * np.einsum("an,an->n", dens_ang, e_theta_ang),
            workers=workers,
        )
        return np.array([r_val, th_val, phi_val])

    return ChargeSet(
        energy=float(e_charge),
        momentum=p_charge,
        boost=k_charge,
        angular_momentum=l_charge,
        dilatation=float(d_charge),
        sct_scalar=float(v0_charge),
        sct_vector=v_charge,
        momentum_spherical=spherical(p, p_ang, 0),
        angular_momentum_spherical=spherical(l, l_ang, 1),
        sct_vector_spherical=spherical(v, v_ang, 2),
        grid_counts=grid.counts(),
    )


def energy(modes: ModeCoefficients, grid: QuadratureGrid | None = None,
           workers: int | None = None) -> float:
    """Numeric energy (2/ell) Omega^2 integral of (1 - w4) |Z|^2."""
    if grid is None:
        grid = s3_quadrature()
    z = z_values(modes, grid.points.alpha, grid.points.beta)
    om2 = float(modes.omega) ** 2
    dens = 2.0 / modes.ell * om2 * (1.0 - grid.points.omega[:, 3]) * np.sum(np.abs(z) ** 2, axis=0)
    return float(integrate_on_grid(grid, dens, workers=workers))


def energy_closed(modes: ModeCoefficients) -> float:
    """Closed form 8 (j+1)^3 (2j+1) sum |Lambda|^2 / ell."""
    jp = float(modes.j) + 1.0
    return 8.0 * jp**3 * (2.0 * float(modes.j) + 1.0) * modes.norm_sq() / modes.ell


def momentum(modes, grid=None, workers=None) -> np.ndarray:
    return charge_set(modes, grid, workers).momentum


def boost(modes, grid=None, workers=None) -> np.ndarray:
    return charge_set(modes, grid, workers).boost


def dilatation(modes, grid=None, workers=None) -> float:
    return charge_set(modes, grid, workers).dilatation


def angular_momentum(modes, grid=None, workers=None) -> np.ndarray:
    return charge_set(modes, grid, workers).angular_momentum


def sct_scalar(modes, grid=None, workers=None) -> float:
    return charge_set(modes, grid, workers).sct_scalar


def sct_vector(modes, grid=None, workers=None) -> np.ndarray:
    return charge_set(modes, grid, workers).sct_vector


def spherical_components(modes: ModeCoefficients, grid: QuadratureGrid | None = None,
                         density: str = "P", workers: int | None = None) -> np.ndarray:
    """(r, theta, phi) components for the chosen vector density P, L or V."""
    cs = charge_set(modes, grid, workers)
    try:
        return {
            "P": cs.momentum_spherical,
            "L": cs.angular_momentum_spherical,
            "V": cs.sct_vector_spherical,
        }[density]
    except KeyError:
        raise ValueError("density must be 'P', 'L' or 'V'") from None


def momentum_sesquilinear(modes1: ModeCoefficients, modes2: ModeCoefficients,
                          grid: QuadratureGrid | None = None,
                          workers: int | None = None) -> np.ndarray:
    """Polarised momentum form B(L1, L2): conjugate-linear in the first slot.

    B(L, L) equals the momentum charge; used to differentiate the quadratic
    charges along coefficient flows.
    """
    if modes1.j != modes2.j or modes1.ell != modes2.ell:
        raise ValueError("mode sets must share spin and length scale")
    if grid is None:
        grid = s3_quadrature()
    pts = grid.points
    z1 = z_values(modes1, pts.alpha, pts.beta)
    z2 = z_values(modes2, pts.alpha, pts.beta)
    om2 = float(modes1.omega) ** 2
    dens = VECTOR_DENSITY_FACTOR * 2j * om2 * np.cross(z2, np.conj(z1), axis=0)
    tet = np.moveaxis(tetrad_t0(pts, modes1.ell), 0, -1)
    return integrate_on_grid(grid, np.einsum("an,ain->in", dens, tet), workers=workers)


# ---------------------------------------------------------------------------
# Analytic reference values (diagonal quadratic forms keyed by (2m, 2n)).
# ---------------------------------------------------------------------------

_P3_TABLE = {
    Fraction(1, 2): (9.0, {
        (-1, -3): 1, (-1, 1): -1, (-1, 3): -2,
        (1, -3): 2, (1, -1): 1, (1, 3): -1,
    }),
    Fraction(1): (24.0, {
        (-2, -4): 1, (-2, 0): -1, (-2, 2): -2, (-2, 4): -3,
        (0, -4): 2, (0, -2): 1, (0, 2): -1, (0, 4): -2,
        (2, -4): 3, (2, -2): 2, (2, 0): 1, (2, 4): -1,
    }),
}

_PPHI_TABLE = {
    Fraction(1, 2): (9.0, {
        (-1, -3): 2, (-1, -1): 1, (-1, 3): -1,
        (1, -3): 1, (1, 1): -1, (1, 3): -2,
    }),
    Fraction(1): (24.0, {
        (-2, -4): 3, (-2, -2): 2, (-2, 0): 1, (-2, 4): -1,
        (0, -4): 2, (0, -2): 1, (0, 2): -1, (0, 4): -2,
        (2, -4): 1, (2, 0): -1, (2, 2): -2, (2, 4): -3,
    }),
}

_LTHETA_HALF = (12.0 / 5.0, {
    (-1, -3): 9, (-1, -1): 6, (-1, 1): 1, (-1, 3): -6,
    (1, -3): 6, (1, -1): -1, (1, 1): -6, (1, 3): -9,
})

_LPHI_HALF_DIAG = (-3.0 / 5.0, {
    (-1, -3): 6, (-1, -1): -1, (-1, 1): -6, (-1, 3): -9,
    (1, -3): 9, (1, -1): 6, (1, 1): 1, (1, 3): -6,
})

_VTHETA_HALF = (-6.0 / 5.0, {
    (-1, -3): 9, (-1, -1): 1, (-1, 1): -9, (-1, 3): -21,
    (1, -3): 21, (1, -1): 9, (1, 1): -1, (1, 3): -9,
})

_VPHI_HALF_DIAG = (-3.0 / 5.0, {
    (-1, -3): 42, (-1, -1): 33, (-1, 1): 8, (-1, 3): -33,
    (1, -3): 33, (1, -1): -8, (1, 1): -33, (1, 3): -42,
})


def _diagonal_form(modes: ModeCoefficients, table) -> float:
    scale, coeffs = table
    total = 0.0
    for (m2, n2), c in coeffs.items():
        total += c * abs(modes.get(Fraction(m2, 2), Fraction(n2, 2))) ** 2
    return scale * total


def reference_charges(modes: ModeCoefficients) -> dict[str, float]:
    """Analytic values of every tabulated charge for j in {0, 1/2, 1}.

    Only quantities with known closed forms appear in the result; charges
    outside the tables are simply absent.  Identities that hold for every
    spin (vanishing boosts, dilatation and r-components, V0 = ell^2 E,
    V = ell^2 P) are filled in wherever the right-hand side is known.
    """
    j = modes.j
    if j not in (Fraction(0), Fraction(1, 2), Fraction(1)):
        raise ValueError("reference tables cover j in {0, 1/2, 1}")
    ell = modes.ell
    out: dict[str, float] = {}
    out["E"] = energy_closed(modes)
    out["V0"] = ell * ell * out["E"]
    for key in ("K1", "K2", "K3", "D", "Pr", "Ptheta", "Lr", "Vr"):
        out[key] = 0.0

    if j == 0:
        lm = {n: modes.get(0, n) for n in (-1, 0, 1)}
        p1 = -math.sqrt(2.0) / ell * (
            (np.conj(lm[-1]) + np.conj(lm[1])) * lm[0]
            + np.conj(lm[0]) * (lm[-1] + lm[1])
        )
        p2 = 1j * math.sqrt(2.0) / ell * (
            (-np.conj(lm[-1]) + np.conj(lm[1])) * lm[0]
            + np.conj(lm[0]) * (lm[-1] - lm[1])
        )
        p3 = 2.0 / ell * (abs(lm[-1]) ** 2 - abs(lm[1]) ** 2)
        out["P1"], out["P2"], out["P3"] = float(np.real(p1)), float(np.real(p2)), p3
        for i in (1, 2, 3):
            out[f"L{i}"] = -(ell**2) * out[f"P{i}"]
            out[f"V{i}"] = ell**2 * out[f"P{i}"]
        out["Pphi"] = ell * p3
        out["Ltheta"] = 4.0 / 3.0 * ell**2 * p3
        out["Lphi"] = -1.0 / 3.0 * ell**2 * p3
        out["Vtheta"] = -4.0 / 3.0 * ell**3 * p3
        out["Vphi"] = -5.0 / 3.0 * ell**3 * p3
        return out

    out["P3"] = _diagonal_form(modes, _P3_TABLE[j]) / ell
    out["Pphi"] = _diagonal_form(modes, _PPHI_TABLE[j])
    out["L3"] = -ell * out["Pphi"]
    out["V3"] = ell * ell * out["P3"]
    if j == Fraction(1, 2):
        out["Ltheta"] = ell * _diagonal_form(modes, _LTHETA_HALF)
        cross_l = 2.0 * np.real(
            np.conj(modes.get(Fraction(1, 2), Fraction(-3, 2))) * modes.get(Fraction(-1, 2), Fraction(-1, 2))
            - np.conj(modes.get(Fraction(1, 2), Fraction(1, 2))) * modes.get(Fraction(-1, 2), Fraction(3, 2))
        )
        out["Lphi"] = ell * (_diagonal_form(modes, _LPHI_HALF_DIAG)
                             + (-3.0 / 5.0) * math.sqrt(3.0) * cross_l)
        out["Vtheta"] = ell * ell * _diagonal_form(modes, _VTHETA_HALF)
        cross_v = 2.0 * np.real(
            -np.conj(modes.get(Fraction(1, 2), Fraction(-3, 2))) * modes.get(Fraction(-1, 2), Fraction(-1, 2))
            + np.conj(modes.get(Fraction(1, 2), Fraction(1, 2))) * modes.get(Fraction(-1, 2), Fraction(3, 2))
        )
        out["Vphi"] = ell * ell * (_diagonal_form(modes, _VPHI_HALF_DIAG)
                                   + (-3.0 / 5.0) * 8.0 * math.sqrt(3.0) * cross_v)
    return out


@dataclass(frozen=True)
class ChargeReport:
    """Numeric charges next to their analytic references, plus grid metadata."""

    charges: ChargeSet
    reference: dict[str, float]
    deviations: dict[str, float]
    max_relative_deviation: float
    grid_counts: tuple[int, int, int]
    convergence: float | None = None
    seed_info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "charges": self.charges.as_dict(),
            "reference": self.reference,
            "deviations": self.deviations,
            "max_relative_deviation": self.max_relative_deviation,
            "grid": list(self.grid_counts),
            "convergence": self.convergence,
            **({"seed_info": self.seed_info} if self.seed_info else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["charge", "numeric", "reference", "abs_deviation"])
        numeric = self.charges.as_dict()
        for key in CHARGE_KEYS:
            ref = self.reference.get(key, "")
            dev = self.deviations.get(key, "")
            writer.writerow([key, repr(numeric[key]), ref if ref == "" else repr(ref),
                             dev if dev == "" else repr(dev)])
        return buf.getvalue()


def charge_report(modes: ModeCoefficients, grid: QuadratureGrid | None = None,
                  convergence: bool = True, workers: int | None = None) -> ChargeReport:
    """Full numeric charge set, analytic comparison and a grid-doubling stamp."""
    if grid is None:
        grid = s3_quadrature()
    cs = charge_set(modes, grid, workers=workers)
    numeric = cs.as_dict()
    try:
        ref = reference_charges(modes)
    except ValueError:
        ref = {"E": energy_closed(modes), "V0": modes.ell**2 * energy_closed(modes)}
    scale = max(abs(ref.get("E", 1.0)), 1e-300)
    deviations = {}
    max_rel = 0.0
    for key, target in ref.items():
        dev = abs(numeric[key] - target)
        deviations[key] = dev
        denom = max(abs(target), scale * modes.ell ** _ell_power(key))
        max_rel = max(max_rel, dev / denom)
    conv = None
    if convergence:
        cs2 = charge_set(modes, grid.doubled(), workers=workers)
        n2 = cs2.as_dict()
        conv = 0.0
        for key in CHARGE_KEYS:
            denom = max(abs(n2[key]), scale * modes.ell ** _ell_power(key))
            conv = max(conv, abs(numeric[key] - n2[key]) / denom)
    return ChargeReport(
        charges=cs,
        reference=ref,
        deviations=deviations,
        max_relative_deviation=max_rel,
        grid_counts=grid.counts(),
        convergence=conv,
    )


def _ell_power(key: str) -> int:
    """Length dimension of each charge relative to the energy."""
    if key in ("E",):
        return 0
    if key.startswith("P") and key != "Pr":
        return 0 if key in ("P1", "P2", "P3") else 1
    table = {
        "Pr": 0, "Ptheta": 1, "Pphi": 1,
        "K1": 1, "K2": 1, "K3": 1,
        "L1": 2, "L2": 2, "L3": 2, "Lr": 2, "Ltheta": 2, "Lphi": 2,
        "D": 1, "V0": 2,
        "V1": 2, "V2": 2, "V3": 2, "Vr": 2, "Vtheta": 3, "Vphi": 3,
    }
    return table.get(key, 0)


def monte_carlo_energy_p3(modes: ModeCoefficients, samples: int = 10_000_000,
                          seed: int = 20240, chunk: int = 500_000) -> dict:
    """Uniform-S3 Monte Carlo estimates of E and P3 with standard errors.

    Sampling uses normalised 4D Gaussians; the estimator is the S3 volume
    times the sample mean of each density.
    """
    rng = np.random.default_rng(seed)
    vol = 2.0 * math.pi**2
    om2 = float(modes.omega) ** 2
    ell = modes.ell
    sums = np.zeros(2)
    sq_sums = np.zeros(2)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        g = rng.normal(size=(n, 4))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        pts = S3Point(g)
        z = z_values(modes, pts.alpha, pts.beta)
        f_e = 2.0 / ell * om2 * (1.0 - g[:, 3]) * np.sum(np.abs(z) ** 2, axis=0)
        dens = VECTOR_DENSITY_FACTOR * np.real(2j * om2 * np.cross(z, np.conj(z), axis=0))
        tet = np.moveaxis(tetrad_t0(pts, ell), 0, -1)
        f_p3 = np.einsum("an,an->n", dens, tet[:, 2])
        sums += [f_e.sum(), f_p3.sum()]
        sq_sums += [np.sum(f_e**2), np.sum(f_p3**2)]
        done += n
    mean = sums / samples
    var = sq_sums / samples - mean**2
    err = vol * np.sqrt(var / samples)
    return {
        "samples": samples,
        "seed": seed,
        "E": vol * mean[0],
        "E_err": err[0],
        "P3": vol * mean[1],
        "P3_err": err[1],
    }


def flat_space_energy_p3(modes: ModeCoefficients, t: float = 0.0, radius: float = 12.0,
                         n_r: int = 160, n_theta: int = 32, n_phi: int = 32) -> dict:
    """Direct flat-coordinate quadrature of the energy and P3 densities.

    Integrates e = (E^2 + B^2)/2 and the normalised momentum density
    (1/2)(E x B)_3 over a ball of the given radius at fixed time, via the
    full cylinder-route field evaluation.  Truncation tails are estimated
    from the observed density falloff (~ r^-8) on the boundary shell.
    """
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (xr + 1.0)
    wr = 0.5 * radius * wr
    xc, wc = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(xc)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * np.pi / n_phi
    rg, tg, pg = np.meshgrid(r, theta, phi, indexing="ij")
    weight = wr[:, None, None] * wc[None, :, None] * wphi * rg**2
    ev = MinkowskiEvent.from_polar(t, rg, tg, pg)
    fld = minkowski_fields(modes, ev)
    e_dens = 0.5 * np.sum(fld.electric**2 + fld.magnetic**2, axis=-1)
    p3_dens = VECTOR_DENSITY_FACTOR * (
        fld.electric[..., 0] * fld.magnetic[..., 1]
        - fld.electric[..., 1] * fld.magnetic[..., 0]
    )
    e_total = float(np.sum(e_dens * weight))
    p3_total = float(np.sum(p3_dens * weight))
    shell_e = np.max(np.abs(e_dens[-1])) * r[-1] ** 8
    shell_p = np.max(np.abs(p3_dens[-1])) * r[-1] ** 8
    tail_e = 4.0 * np.pi * shell_e / (5.0 * radius**5)
    tail_p = 4.0 * np.pi * shell_p / (5.0 * radius**5)
    return {
        "t": t,
        "radius": radius,
        "E": e_total,
        "P3": p3_total,
        "tail_E": tail_e,
        "tail_P3": tail_p,
    }
