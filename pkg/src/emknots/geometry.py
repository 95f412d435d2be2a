"""Conformal geometry of the Minkowski / S3-cylinder correspondence.

Minkowski space (units c = 1, global length scale ``ell``) is conformally
equivalent to a finite Lorentzian cylinder over the unit three-sphere.  This
module provides the coordinate chain in both directions, the conformal
factor, the Jacobian between the two charts, the left-invariant frame on S3
('t Hooft-symbol machinery), exact rotation flows for taking invariant
derivatives, and product quadrature grids on S3.

All numeric routines broadcast over numpy arrays; the thin dataclasses
``MinkowskiEvent``, ``CylinderPoint`` and ``S3Point`` may hold scalars or
arrays in their fields.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MinkowskiEvent",
    "CylinderPoint",
    "S3Point",
    "QuadratureGrid",
    "HOOFT_SELF_DUAL",
    "HOOFT_ANTI_SELF_DUAL",
    "SU2_GENERATORS",
    "EPS3",
    "minkowski_to_cylinder",
    "cylinder_to_minkowski",
    "conformal_factor",
    "jacobian",
    "embed",
    "one_forms_minkowski",
    "one_forms_polar",
    "tetrad_t0",
    "invariant_vector_field",
    "generator_matrix",
    "rotation_flow",
    "apply_invariant_derivative",
    "second_invariant_derivative",
    "s3_quadrature",
    "integrate_on_grid",
]

# Levi-Civita symbol on three indices.
EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPS3[_i, _j, _k] = 1.0
    EPS3[_i, _k, _j] = -1.0


def _hooft(sign: int) -> np.ndarray:
    """'t Hooft symbols eta^a_{BC}: eps_{abc} on the 3-block, +-delta on the 4-column."""
    eta = np.zeros((3, 4, 4))
    eta[:, :3, :3] = EPS3
    for a in range(3):
        eta[a, a, 3] = sign
        eta[a, 3, a] = -sign
    return eta


HOOFT_SELF_DUAL = _hooft(+1)
HOOFT_ANTI_SELF_DUAL = _hooft(-1)

_SIGMA = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)
#: su(2) generators T_a = -i sigma_a of the Cartan one-form on the group manifold.
SU2_GENERATORS = -1j * _SIGMA


@dataclass(frozen=True)
class MinkowskiEvent:
    """Spacetime event in Cartesian coordinates (t, x, y, z)."""

    t: np.ndarray | float
    x: np.ndarray | float
    y: np.ndarray | float
    z: np.ndarray | float

    @classmethod
    def from_polar(cls, t, r, theta, phi) -> "MinkowskiEvent":
        t, r, theta, phi = np.broadcast_arrays(
            np.asarray(t, float), np.asarray(r, float),
            np.asarray(theta, float), np.asarray(phi, float),
        )
        st = np.sin(theta)
        return cls(t, r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta))

    @property
    def r(self):
        return np.sqrt(np.asarray(self.x) ** 2 + np.asarray(self.y) ** 2 + np.asarray(self.z) ** 2)

    @property
    def theta(self):
        r = self.r
        return np.arccos(np.clip(np.divide(self.z, np.where(r > 0, r, 1.0)), -1.0, 1.0))

    @property
    def phi(self):
        return np.mod(np.arctan2(self.y, self.x), 2.0 * np.pi)

    def spatial(self) -> np.ndarray:
        """Stacked (x, y, z), shape (3, ...)."""
        return np.stack(np.broadcast_arrays(self.x, self.y, self.z))


@dataclass(frozen=True)
class CylinderPoint:
    """Point on the Lorentzian cylinder: conformal time tau and S3 angles."""

    tau: np.ndarray | float
    chi: np.ndarray | float
    theta: np.ndarray | float
    phi: np.ndarray | float

    def s3(self) -> "S3Point":
        return embed(self.chi, self.theta, self.phi)


class S3Point:
    """Point(s) on the unit three-sphere.

    Stores the embedding four-vector ``omega`` (last axis of length 4)
    together with the complex pair alpha = w1 + i w2, beta = w3 + i w4 used
    by the harmonic evaluators.  Construction checks the unit norm to 1e-12.
    """

    __slots__ = ("omega", "alpha", "beta")

    def __init__(self, omega):
        omega = np.asarray(omega, dtype=float)
        if omega.shape[-1] != 4:
            raise ValueError("omega must have four components on the last axis")
        norms = np.einsum("...a,...a->...", omega, omega)
        if not np.allclose(norms, 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("omega does not lie on the unit three-sphere")
        self.omega = omega
        self.alpha = omega[..., 0] + 1j * omega[..., 1]
        self.beta = omega[..., 2] + 1j * omega[..., 3]

    @classmethod
    def from_angles(cls, chi, theta, phi) -> "S3Point":
        return embed(chi, theta, phi)

    @property
    def chi(self):
        return np.arccos(np.clip(self.omega[..., 3], -1.0, 1.0))

    @property
    def theta(self):
        s = np.sin(self.chi)
        return np.arccos(np.clip(np.divide(self.omega[..., 2], np.where(s > 0, s, 1.0)), -1.0, 1.0))

    @property
    def phi(self):
        return np.mod(np.arctan2(self.omega[..., 1], self.omega[..., 0]), 2.0 * np.pi)

    def __repr__(self):
        return f"S3Point(omega={self.omega!r})"


def _polar_of(event: MinkowskiEvent):
    t = np.asarray(event.t, float)
    return t, np.asarray(event.r, float)


def cylinder_trig(t, r, ell: float):
    """Closed-form (sin tau, cos tau, sin chi, cos chi, gamma) of the mapped point.

    Avoids arctan/trig round trips; everything is algebraic in (t, r, ell),
    which keeps field evaluation smooth at r = 0 and fast on large grids.
    """
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    l2 = ell * ell
    denom = np.sqrt((l2 + (t - r) ** 2) * (l2 + (t + r) ** 2)) / l2
    s = (t * t - r * r) / l2
    sin_tau = (2.0 * t / ell) / denom
    cos_tau = (1.0 - s) / denom
    sin_chi = (2.0 * r / ell) / denom
    cos_chi = -(1.0 + s) / denom
    gamma = 2.0 / denom
    return sin_tau, cos_tau, sin_chi, cos_chi, gamma


def minkowski_to_cylinder(event: MinkowskiEvent, ell: float) -> CylinderPoint:
    """Map a Minkowski event to the cylinder chart (tau, chi, theta, phi).

    Uses the compactifying chain u, v -> U, V -> tau, chi with lightcone
    coordinates u = (t - r)/ell, v = (t + r)/ell.  Total on finite events;
    the image satisfies 0 < chi <= pi and |tau| < chi.
    """
    if ell <= 0:
        raise ValueError("ell must be positive")
    t, r = _polar_of(event)
    bigu = np.arctan((t - r) / ell)
    bigv = np.arctan((t + r) / ell)
    tau = bigv + bigu
    chi = np.pi + bigu - bigv
    return CylinderPoint(tau, chi, event.theta, event.phi)


def cylinder_to_minkowski(point: CylinderPoint, ell: float) -> MinkowskiEvent:
    """Inverse map: gamma t = ell sin tau, gamma r = ell sin chi.

    Raises ValueError outside the wedge gamma = cos tau - cos chi > 0, whose
    boundary is the lightcone of the spatial-infinity point.
    """
    if ell <= 0:
        raise ValueError("ell must be positive")
    tau = np.asarray(point.tau, float)
    chi = np.asarray(point.chi, float)
    gamma = np.cos(tau) - np.cos(chi)
    if np.any(gamma <= 0):
        raise ValueError("point outside the Minkowski wedge (cos tau - cos chi <= 0)")
    t = ell * np.sin(tau) / gamma
    r = ell * np.sin(chi) / gamma
    return MinkowskiEvent.from_polar(t, r, point.theta, point.phi)


def conformal_factor(event: MinkowskiEvent, ell: float):
    """gamma = 2 ell^2 / sqrt(4 t^2 ell^2 + (r^2 - t^2 + ell^2)^2)."""
    if ell <= 0:
        raise ValueError("ell must be positive")
    t, r = _polar_of(event)
    return 2.0 * ell**2 / np.sqrt(4.0 * t * t * ell * ell + (r * r - t * t + ell * ell) ** 2)


def jacobian(event: MinkowskiEvent, ell: float) -> np.ndarray:
    """d(tau, chi, theta, phi)/d(t, r, theta, phi), shape (..., 4, 4).

    The (tau, chi) x (t, r) block is (1/ell) [[p, -q], [q, -p]] with
    p = 1 - cos tau cos chi and q = sin tau sin chi; the angular block is
    the identity.
    """
    t, r = _polar_of(event)
    st, ct, sx, cx, _ = cylinder_trig(t, r, ell)
    p = 1.0 - ct * cx
    q = st * sx
    out = np.zeros(np.broadcast(t, r).shape + (4, 4))
    out[..., 0, 0] = p / ell
    out[..., 0, 1] = -q / ell
    out[..., 1, 0] = q / ell
    out[..., 1, 1] = -p / ell
    out[..., 2, 2] = 1.0
    out[..., 3, 3] = 1.0
    return out


def embed(chi, theta, phi) -> S3Point:
    """Hyperspherical embedding: omega_a = sin chi * unit(theta, phi), omega_4 = cos chi."""
    chi, theta, phi = np.broadcast_arrays(
        np.asarray(chi, float), np.asarray(theta, float), np.asarray(phi, float)
    )
    sx = np.sin(chi)
    omega = np.stack(
        [
            sx * np.sin(theta) * np.cos(phi),
            sx * np.sin(theta) * np.sin(phi),
            sx * np.cos(theta),
            np.cos(chi),
        ],
        axis=-1,
    )
    return S3Point(omega)


def one_forms_minkowski(event: MinkowskiEvent, ell: float) -> np.ndarray:
    """Cylinder coframe {e^tau, e^a} in Cartesian Minkowski coordinates.

    Returns shape (..., 4, 4): row 0 is e^tau, rows 1..3 are e^a; columns are
    the (t, x, y, z) components.  At t = 0 the spatial 3x3 block reduces to
    :func:`tetrad_t0` and the mixed components vanish.
    """
    t = np.asarray(event.t, float)
    xs = event.spatial()
    r2 = np.einsum("i...,i...->...", xs, xs)
    g = conformal_factor(event, ell)
    c = g * g / ell**3
    out = np.zeros(np.broadcast(t, xs[0]).shape + (4, 4))
    out[..., 0, 0] = 0.5 * c * (t * t + r2 + ell * ell)
    for i in range(3):
        out[..., 0, 1 + i] = -c * t * xs[i]
    half = 0.5 * (t * t - r2 + ell * ell)
    for a in range(3):
        out[..., 1 + a, 0] = c * t * xs[a]
        for i in range(3):
            val = -xs[a] * xs[i]
            if a == i:
                val = val - half
            for j in range(3):
                if EPS3[a, i, j]:
                    val = val + EPS3[a, i, j] * ell * xs[j]
            out[..., 1 + a, 1 + i] = c * val
    return out


def one_forms_polar(event: MinkowskiEvent, ell: float) -> np.ndarray:
    """Same coframe with components along (dt, dr, dtheta, dphi)."""
    t, r = _polar_of(event)
    theta = np.asarray(event.theta, float)
    phi = np.asarray(event.phi, float)
    g = conformal_factor(event, ell)
    c = g * g / ell**3
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    unit = np.stack([st * cp, st * sp, ct])
    dth = np.stack([ct * cp, ct * sp, -st])
    dph = np.stack([-st * sp, st * cp, np.zeros_like(st)])
    out = np.zeros(np.broadcast(t, r, theta, phi).shape + (4, 4))
    out[..., 0, 0] = 0.5 * c * (t * t + r * r + ell * ell)
    out[..., 0, 1] = -c * t * r
    half_m = 0.5 * (t * t - r * r + ell * ell)
    cross_th = np.cross(unit, dth, axis=0)
    cross_ph = np.cross(unit, dph, axis=0)
    for a in range(3):
        out[..., 1 + a, 0] = c * r * t * unit[a]
        out[..., 1 + a, 1] = -c * 0.5 * (t * t + r * r + ell * ell) * unit[a]
        out[..., 1 + a, 2] = -c * (half_m * r * dth[a] + ell * r * r * cross_th[a])
        out[..., 1 + a, 3] = -c * (half_m * r * dph[a] + ell * r * r * cross_ph[a])
    return out


def tetrad_t0(point: S3Point, ell: float) -> np.ndarray:
    """Spatial coframe e^a_i on the t = 0 slice, shape (..., 3, 3).

    e^a_i = (gamma w4 delta_ai - w_a w_i + eps_aic gamma w_c)/ell with
    gamma = 1 - w4; satisfies e^a_i e^b_i = (gamma/ell)^2 delta_ab.
    """
    w = point.omega
    g = 1.0 - w[..., 3]
    out = np.empty(w.shape[:-1] + (3, 3))
    for a in range(3):
        for i in range(3):
            val = -w[..., a] * w[..., i]
            if a == i:
                val = val + g * w[..., 3]
            for c in range(3):
                if EPS3[a, i, c]:
                    val = val + EPS3[a, i, c] * g * w[..., c]
            out[..., a, i] = val / ell
    return out


_KINDS = ("L", "R", "D")


def generator_matrix(kind: str, a: int) -> np.ndarray:
    """4x4 antisymmetric flow generator M of the invariant vector field.

    The field acts on functions by f -> d/ds f(exp(s M) omega).  ``a`` is
    1-based.  Note the operator commutators [L_a, L_b] = 2 eps_abc L_c
    correspond to [M_a, M_b] = -2 eps_abc M_c for the flow matrices.
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}")
    if a not in (1, 2, 3):
        raise ValueError("component index a must be 1, 2 or 3")
    if kind == "L":
        return HOOFT_SELF_DUAL[a - 1]
    if kind == "R":
        return HOOFT_ANTI_SELF_DUAL[a - 1]
    return HOOFT_SELF_DUAL[a - 1] + HOOFT_ANTI_SELF_DUAL[a - 1]


def invariant_vector_field(kind: str, a: int, point: S3Point) -> np.ndarray:
    """Tangent four-vector of L_a, R_a or D_a = L_a + R_a at ``point``.

    Components are in the embedding R^4; tangency omega . v = 0 holds by
    antisymmetry of the generators.
    """
    m = generator_matrix(kind, a)
    return np.einsum("cb,...b->...c", m, point.omega)


def rotation_flow(kind: str, a: int, angle: float) -> np.ndarray:
    """Exact 4x4 rotation exp(angle * M) for the chosen generator.

    The self-dual and anti-self-dual generators square to -1, so the
    exponential is cos + sin * M; the D-flow factorises into the commuting
    L- and R-parts.
    """
    if kind == "D":
        left = math.cos(angle) * np.eye(4) + math.sin(angle) * HOOFT_SELF_DUAL[a - 1]
        right = math.cos(angle) * np.eye(4) + math.sin(angle) * HOOFT_ANTI_SELF_DUAL[a - 1]
        return left @ right
    m = generator_matrix(kind, a)
    return math.cos(angle) * np.eye(4) + math.sin(angle) * m


def apply_invariant_derivative(kind: str, a: int, f: Callable[[S3Point], np.ndarray],
                               point: S3Point, step: float = 1e-6):
    """Central-difference derivative of f along the exact rotation flow.

    Because the flow is an exact 4D rotation there is no chart singularity;
    accuracy is O(step^2) plus rounding.
    """
    plus = S3Point(point.omega @ rotation_flow(kind, a, step).T)
    minus = S3Point(point.omega @ rotation_flow(kind, a, -step).T)
    return (f(plus) - f(minus)) / (2.0 * step)


def second_invariant_derivative(kind: str, a: int, f: Callable[[S3Point], np.ndarray],
                                point: S3Point, step: float = 1e-3):
    """Second flow derivative d^2/ds^2 f(exp(s M) omega) by central differences."""
    plus = S3Point(point.omega @ rotation_flow(kind, a, step).T)
    minus = S3Point(point.omega @ rotation_flow(kind, a, -step).T)
    return (f(plus) - 2.0 * f(point) + f(minus)) / (step * step)


@dataclass(frozen=True)
class QuadratureGrid:
    """Product quadrature on S3 for the measure sin^2(chi) sin(theta) dchi dtheta dphi.

    Gauss-Legendre nodes in chi on (0, pi) with the sin^2 weight folded in,
    Gauss-Legendre in cos(theta), and a uniform periodic rule in phi.  Nodes
    are interior, so the chi = 0 pole is never evaluated.
    """

    points: S3Point
    weights: np.ndarray
    n_chi: int
    n_theta: int
    n_phi: int
    #: densities that are trigonometric polynomials of at most this degree
    #: per angle integrate exactly (up to rounding).
    trig_degree: int
    chi: np.ndarray = field(repr=False, default=None)
    theta: np.ndarray = field(repr=False, default=None)
    phi: np.ndarray = field(repr=False, default=None)
    theta_rule: str = "cos"

    def __len__(self):
        return self.weights.size

    def doubled(self) -> "QuadratureGrid":
        return s3_quadrature(2 * self.n_chi, 2 * self.n_theta, 2 * self.n_phi,
                             theta_rule=self.theta_rule)

    def counts(self) -> tuple[int, int, int]:
        return (self.n_chi, self.n_theta, self.n_phi)


def s3_quadrature(n_chi: int = 64, n_theta: int = 32, n_phi: int = 64,
                  theta_rule: str = "cos") -> QuadratureGrid:
    """Build the product grid; total weight is the S3 volume 2 pi^2.

    The default polar rule is Gauss-Legendre in cos(theta), exact for
    integrands polynomial in cos(theta).  ``theta_rule="angle"`` places
    Gauss-Legendre nodes in the angle itself with the sin(theta) measure
    folded into the weights; that variant also handles odd powers of
    sin(theta) (spectrally, to rounding at moderate degrees), which occur
    in the theta-components of the vector charges.
    """
    if min(n_chi, n_theta, n_phi) < 2:
        raise ValueError("node counts must be at least 2")
    xc, wc = np.polynomial.legendre.leggauss(n_chi)
    chi = 0.5 * np.pi * (xc + 1.0)
    wchi = 0.5 * np.pi * wc * np.sin(chi) ** 2
    if theta_rule == "cos":
        xt, wt = np.polynomial.legendre.leggauss(n_theta)
        theta = np.arccos(xt)
    elif theta_rule == "angle":
        xt, wt = np.polynomial.legendre.leggauss(n_theta)
        theta = 0.5 * np.pi * (xt + 1.0)
        wt = 0.5 * np.pi * wt * np.sin(theta)
    else:
        raise ValueError("theta_rule must be 'cos' or 'angle'")
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * np.pi / n_phi
    cg, tg, pg = np.meshgrid(chi, theta, phi, indexing="ij")
    w = (wchi[:, None, None] * wt[None, :, None] * np.full(n_phi, wphi)).ravel()
    pts = embed(cg.ravel(), tg.ravel(), pg.ravel())
    return QuadratureGrid(
        points=pts,
        weights=w,
        n_chi=n_chi,
        n_theta=n_theta,
        n_phi=n_phi,
        trig_degree=min(2 * n_chi - 1, 2 * n_theta - 1, n_phi - 1),
        chi=cg.ravel(),
        theta=tg.ravel(),
        phi=pg.ravel(),
        theta_rule=theta_rule,
    )


def integrate_on_grid(grid: QuadratureGrid, values: np.ndarray, workers: int | None = None):
    """Weighted sum over grid nodes (last axis), deterministic for fixed inputs.

    Reduction is numpy's pairwise summation; with ``workers`` > 1 the nodes
    are split into that many contiguous chunks, partial sums are taken in a
    thread pool and combined in chunk order, so the result is reproducible
    for a fixed grid and worker count.
    """
    values = np.asarray(values)
    weighted = values * grid.weights
    if not workers or workers <= 1:
        return np.sum(weighted, axis=-1)
    bounds = np.linspace(0, weighted.shape[-1], workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(lambda se: np.sum(weighted[..., se[0]:se[1]], axis=-1),
                     zip(bounds[:-1], bounds[1:]))
        )
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total
