"""Left-right harmonics on the three-sphere and their adjoint basis.

The functions Y_{j;m,n} diagonalise the Casimirs of both su(2) factors of
so(4) together with L_3 and R_3; (i/2) R_3 has eigenvalue m and (i/2) L_3
has eigenvalue n.  They are finite sums of monomials in alpha = w1 + i w2,
beta = w3 + i w4 and their conjugates, normalised to unit L2 norm against
the round measure sin^2(chi) sin(theta) dchi dtheta dphi.

The adjoint basis regroups the (2j+1)^2 harmonics of fixed j into multiplets
of the diagonal so(3) (degree l = 0..2j, azimuthal M): a Gegenbauer radial
profile in chi times an ordinary spherical harmonic.  The two bases are
related by real Clebsch-Gordan coefficients once the radial phase is fixed
to i^(l-2j); see ``adjoint_harmonic``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import eval_gegenbauer, sph_harm_y

from .geometry import QuadratureGrid, S3Point, integrate_on_grid

__all__ = [
    "SpinIndex",
    "HarmonicTable",
    "as_half_integer",
    "half_integer_range",
    "harmonic",
    "harmonic_values",
    "harmonic_table",
    "adjoint_harmonic",
    "clebsch_gordan",
    "gram_matrix",
]


def as_half_integer(value) -> Fraction:
    """Coerce ints, floats, strings like '3/2' or Fractions to an exact half-integer."""
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, str):
        frac = Fraction(value)
    else:
        frac = Fraction(value).limit_denominator(2)
        if float(frac) != float(value):
            raise ValueError(f"{value!r} is not a half-integer")
    if frac.denominator not in (1, 2):
        raise ValueError(f"{value!r} is not a half-integer")
    return frac


def half_integer_range(lo: Fraction, hi: Fraction) -> list[Fraction]:
    """Inclusive unit-step ladder lo, lo+1, ..., hi."""
    out = []
    v = lo
    while v <= hi:
        out.append(v)
        v = v + 1
    return out


@dataclass(frozen=True)
class SpinIndex:
    """Label (j; m, n) of a left-right harmonic; all entries half-integers."""

    j: Fraction
    m: Fraction
    n: Fraction

    def __post_init__(self):
        object.__setattr__(self, "j", as_half_integer(self.j))
        object.__setattr__(self, "m", as_half_integer(self.m))
        object.__setattr__(self, "n", as_half_integer(self.n))
        j, m, n = self.j, self.m, self.n
        if j < 0:
            raise ValueError("j must be non-negative")
        if (j - m).denominator != 1 or (j - n).denominator != 1:
            raise ValueError("m and n must differ from j by integers")
        if abs(m) > j or abs(n) > j:
            raise ValueError("m and n must lie in [-j, j]")


def _coefficients(j: Fraction, m: Fraction, n: Fraction):
    """Exact term data (k, sign * sqrt-factor, powers) of the monomial sum."""
    terms = []
    k_lo = max(0, int(-(m + n)))
    k_hi = min(int(j - m), int(j - n))
    num = (
        math.factorial(int(j + m))
        * math.factorial(int(j - m))
        * math.factorial(int(j + n))
        * math.factorial(int(j - n))
    )
    for k in range(k_lo, k_hi + 1):
        den = (
            math.factorial(int(m + n) + k)
            * math.factorial(int(j - n) - k)
            * math.factorial(int(j - m) - k)
            * math.factorial(k)
        )
        coef = (-1) ** (int(m + n) + k) * math.sqrt(num) / den
        powers = (int(n + m) + k, k, int(j - m) - k, int(j - n) - k)
        terms.append((coef, powers))
    return terms


def harmonic_values(j, m, n, alpha, beta):
    """Evaluate Y_{j;m,n} from the complex pair (alpha, beta); broadcasts."""
    j, m, n = as_half_integer(j), as_half_integer(m), as_half_integer(n)
    pref = math.sqrt((int(2 * j) + 1) / (2.0 * math.pi**2))
    alpha = np.asarray(alpha)
    beta = np.asarray(beta)
    ac = np.conj(alpha)
    bc = np.conj(beta)
    out = np.zeros(np.broadcast(alpha, beta).shape, dtype=complex)
    for coef, (pa, pac, pb, pbc) in _coefficients(j, m, n):
        out = out + coef * alpha**pa * ac**pac * beta**pb * bc**pbc
    return pref * out


def harmonic(index: SpinIndex, point: S3Point):
    """Y at a point (or batch of points)."""
    return harmonic_values(index.j, index.m, index.n, point.alpha, point.beta)


@dataclass(frozen=True)
class HarmonicTable:
    """All (2j+1)^2 harmonics of one spin at one point batch.

    ``values`` has shape (2j+1, 2j+1, ...) indexed by (m, n) in increasing
    order; power tables of alpha and beta are shared across entries.
    """

    j: Fraction
    point: S3Point
    values: np.ndarray

    def entry(self, m, n):
        j = self.j
        mi = int(as_half_integer(m) + j)
        ni = int(as_half_integer(n) + j)
        return self.values[mi, ni]

    def indices(self):
        j = self.j
        rng = half_integer_range(-j, j)
        return [(m, n) for m in rng for n in rng]


def harmonic_table(j, point: S3Point) -> HarmonicTable:
    """Evaluate the full spin-j table, reusing monomial powers across (m, n)."""
    j = as_half_integer(j)
    d = int(2 * j) + 1
    alpha = np.asarray(point.alpha)
    beta = np.asarray(point.beta)
    deg = int(2 * j)
    pow_a = [np.ones_like(alpha)]
    pow_ac = [np.ones_like(alpha)]
    pow_b = [np.ones_like(beta)]
    pow_bc = [np.ones_like(beta)]
    for _ in range(deg):
        pow_a.append(pow_a[-1] * alpha)
        pow_ac.append(pow_ac[-1] * np.conj(alpha))
        pow_b.append(pow_b[-1] * beta)
        pow_bc.append(pow_bc[-1] * np.conj(beta))
    pref = math.sqrt((deg + 1) / (2.0 * math.pi**2))
    vals = np.zeros((d, d) + alpha.shape, dtype=complex)
    rng = half_integer_range(-j, j)
    for mi, m in enumerate(rng):
        for ni, n in enumerate(rng):
            acc = 0.0
            for coef, (pa, pac, pb, pbc) in _coefficients(j, m, n):
                acc = acc + coef * pow_a[pa] * pow_ac[pac] * pow_b[pb] * pow_bc[pbc]
            vals[mi, ni] = pref * acc
    return HarmonicTable(j=j, point=point, values=vals)


def clebsch_gordan(j1, m1, j2, m2, jtot, mtot) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention (Racah's closed form).

    All factorial arithmetic is exact integer/Fraction work; only the final
    square root is floating point.
    """
    j1, m1 = as_half_integer(j1), as_half_integer(m1)
    j2, m2 = as_half_integer(j2), as_half_integer(m2)
    jtot, mtot = as_half_integer(jtot), as_half_integer(mtot)
    for j, m in ((j1, m1), (j2, m2), (jtot, mtot)):
        if abs(m) > j or (j - m).denominator != 1:
            raise ValueError("invalid (j, m) pair")
    if m1 + m2 != mtot:
        return 0.0
    if jtot < abs(j1 - j2) or jtot > j1 + j2 or (j1 + j2 - jtot).denominator != 1:
        return 0.0

    def fact(x: Fraction) -> int:
        return math.factorial(int(x))

    pref = Fraction(int(2 * jtot) + 1, 1) * Fraction(
        fact(jtot + j1 - j2) * fact(jtot - j1 + j2) * fact(j1 + j2 - jtot),
        fact(j1 + j2 + jtot + 1),
    )
    pref *= Fraction(
        fact(jtot + mtot) * fact(jtot - mtot),
        fact(j1 - m1) * fact(j1 + m1) * fact(j2 - m2) * fact(j2 + m2),
    )
    total = Fraction(0)
    k = 0
    while True:
        a = jtot - j1 + j2 - k
        b = jtot + mtot - k
        c = k + j1 - j2 - mtot
        top1 = j2 + jtot + m1 - k
        top2 = j1 - m1 + k
        if top1 < 0 or b < 0:
            break
        if a >= 0 and c >= 0:
            total += (
                Fraction((-1) ** (k + int(j2 + m2)))
                * Fraction(fact(top1) * fact(top2), 1)
                / (fact(Fraction(k)) * fact(a) * fact(b) * fact(c))
            )
        k += 1
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pref * total * total))


def _radial_profile(j: Fraction, l: int, chi):
    """Normalised Gegenbauer radial factor sin^l(chi) C^(l+1)_{2j-l}(cos chi)."""
    deg = int(2 * j) - l
    norm = (
        math.factorial(l)
        * 2**l
        * math.sqrt(
            2.0 * (int(2 * j) + 1) * math.factorial(deg)
            / (math.pi * math.factorial(int(2 * j) + l + 1))
        )
    )
    chi = np.asarray(chi, float)
    return norm * np.sin(chi) ** l * eval_gegenbauer(deg, l + 1, np.cos(chi))


def adjoint_harmonic(j, l: int, big_m: int, point: S3Point):
    """Diagonal-so(3) basis function of spin j: R_{j,l}(chi) Y_{l,M}(theta, phi).

    The radial part is the normalised Gegenbauer profile (unit norm against
    sin^2(chi) dchi) carrying the phase i^(l-2j); with that choice the
    spin-j harmonics decompose as Y_{j;m,n} = sum_l <j m; j n | l, m+n>
    Ytilde_{j;l,m+n} with real Clebsch-Gordan coefficients.
    """
    j = as_half_integer(j)
    if not (0 <= l <= int(2 * j)):
        raise ValueError("l must lie in 0..2j")
    if abs(big_m) > l:
        raise ValueError("|M| must not exceed l")
    phase = 1j ** ((l - int(2 * j)) % 4)
    return phase * _radial_profile(j, l, point.chi) * sph_harm_y(l, big_m, point.theta, point.phi)


def gram_matrix(j, grid: QuadratureGrid, workers: int | None = None) -> np.ndarray:
    """Overlap matrix of all spin-j harmonics under the grid; identity when exact."""
    table = harmonic_table(j, grid.points)
    d = table.values.shape[0]
    flat = table.values.reshape(d * d, -1)
    weighted = flat * grid.weights
    if workers and workers > 1:
        parts = np.array_split(np.arange(flat.shape[1]), workers)
        gram = np.zeros((d * d, d * d), dtype=complex)
        for idx in parts:
            gram += weighted[:, idx] @ np.conj(flat[:, idx]).T
        return gram
    return weighted @ np.conj(flat).T
