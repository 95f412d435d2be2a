"""The diagonal so(3) action on mode-coefficient space.

Rotations generated by D_a = L_a + R_a leave a fixed-spin solution family
invariant as a whole; their infinitesimal action therefore transfers to the
coefficients.  Writing the gauge potential in the frame-times-harmonic
basis, the frame rotates with L_a e^b = 2 eps_abc e^c, the harmonics rotate
through the ladder relations, and requiring the total variation to vanish
yields one exact linear system per generator for the coefficient matrices.

Sign conventions.  Two natural matrix conventions differ by an overall
sign:

* the *coefficient-transformation* matrices ``D_a`` solve the compensating
  system above (how the Lambda entries respond so that the configuration is
  unchanged); they satisfy the reversed algebra [D_a, D_b] = -2 eps_abc D_c
  and are the form printed in coefficient tables;
* the *rotation generators* ``G_a = -D_a`` satisfy [G_a, G_b] =
  +2 eps_abc G_c exactly.

Charge flows use the coefficient-transformation matrices: differentiating
the momentum along Lambda -> Lambda + s D_a Lambda reproduces
2 eps_abc P_c, the vector rotation law.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .charges import charge_set, momentum_sesquilinear
from .geometry import EPS3, QuadratureGrid
from .harmonics import as_half_integer, half_integer_range
from .knotfield import ModeCoefficients, x_transform_matrix

__all__ = [
    "CoefficientOperator",
    "Table4Diff",
    "derive_d_action",
    "table4_operator",
    "diff_operators",
    "rotation_covariance_check",
    "energy_invariance_defect",
]


@dataclass(frozen=True)
class CoefficientOperator:
    """Triple of matrices acting on flattened coefficients of one spin.

    ``matrices[a]`` is the coefficient-transformation form (see module
    docstring); ``generators`` negates them and closes with the plus sign.
    Rows/columns follow :meth:`ModeCoefficients.labels` order (m outer,
    n inner, both increasing).
    """

    j: Fraction
    matrices: np.ndarray
    source: str = "derived"

    @property
    def dim(self) -> int:
        return self.matrices.shape[-1]

    @property
    def generators(self) -> np.ndarray:
        """Rotation generators G_a = -D_a with [G_a, G_b] = 2 eps_abc G_c."""
        return -self.matrices

    def labels(self) -> list[tuple[Fraction, Fraction]]:
        j = self.j
        return [(m, n) for m in half_integer_range(-j, j)
                for n in half_integer_range(-j - 1, j + 1)]

    def closure_defect(self) -> float:
        """Max entry of [G_a, G_b] - 2 eps_abc G_c over the three pairs."""
        g = self.generators
        worst = 0.0
        for a in range(3):
            b = (a + 1) % 3
            c = (a + 2) % 3
            comm = g[a] @ g[b] - g[b] @ g[a]
            worst = max(worst, float(np.max(np.abs(comm - 2.0 * g[c]))))
        return worst

    def spectrum_imaginary_defect(self) -> float:
        """Max |Re eigenvalue|; the operators are anti-Hermitian so this is ~0."""
        worst = 0.0
        for a in range(3):
            worst = max(worst, float(np.max(np.abs(np.real(np.linalg.eigvals(self.matrices[a]))))))
        return worst

    def apply(self, a: int, modes: ModeCoefficients) -> ModeCoefficients:
        """Coefficient-transformation flow direction D_a Lambda (a is 1-based)."""
        flat = self.matrices[a - 1] @ modes.flat
        return modes.with_values(flat.reshape(modes.values.shape))

    def dump(self) -> dict:
        """Entries rendered as exact strings like '-2i' or 'sqrt(2)i'."""
        lbl = [f"({m},{n})" for m, n in self.labels()]
        out = {"j": str(self.j), "labels": lbl, "matrices": {}}
        for a in range(3):
            rows = []
            for r in range(self.dim):
                rows.append([_exact_string(self.matrices[a][r, c]) for c in range(self.dim)])
            out["matrices"][f"D{a + 1}"] = rows
        return out

    def dump_json(self) -> str:
        return json.dumps(self.dump(), indent=2) + "\n"


def _exact_string(z: complex) -> str:
    """Render a +- q sqrt(s) (i) entry exactly; falls back to repr."""
    if abs(z) < 1e-12:
        return "0"
    re, im = z.real, z.imag
    if abs(re) > 1e-12 and abs(im) > 1e-12:
        return repr(z)
    val = re if abs(re) > abs(im) else im
    suffix = "i" if abs(im) > abs(re) else ""
    for s in (1, 2, 3, 5, 6, 7, 10, 15):
        q = Fraction(val / math.sqrt(s)).limit_denominator(64)
        if q != 0 and abs(float(q) * math.sqrt(s) - val) < 1e-10 * abs(val):
            mag = "" if abs(q) == 1 else (str(abs(q.numerator)) if q.denominator == 1
                                          else f"{abs(q.numerator)}/{q.denominator}")
            root = f"sqrt({s})" if s != 1 else ""
            body = f"{mag}{root}{suffix}" or "1"
            if mag == "" and root == "" and suffix == "":
                body = "1"
            return ("-" if q < 0 else "") + body
    return repr(val) + ("i" if suffix else "")


def _spin_matrices(j: Fraction):
    """Standard spin-j matrices J_1, J_2, J_3 on the basis n = -j..j."""
    d = int(2 * j) + 1
    ns = half_integer_range(-j, j)
    j3 = np.diag([float(n) for n in ns]).astype(complex)
    jp = np.zeros((d, d), complex)
    for k, n in enumerate(ns[:-1]):
        jp[k + 1, k] = math.sqrt(float((j - n) * (j + n + 1)))
    jm = jp.conj().T
    return (jp + jm) / 2.0, (jp - jm) / 2j, j3


def _geometric_action(j: Fraction) -> np.ndarray:
    """Matrices of D_a on the span of e^b Y_{j;m,n}, index order (b, m, n).

    Frame part: coefficient of e^b picks up -2 eps_abc f_c.  Harmonic part:
    D_a Y = -2i (J_a on m + J_a on n) in terms of standard spin matrices.
    """
    d = int(2 * j) + 1
    js = _spin_matrices(j)
    eye3 = np.eye(3)
    eyem = np.eye(d)
    out = np.empty((3, 3 * d * d, 3 * d * d), complex)
    for a in range(3):
        frame = np.kron(-2.0 * EPS3[a], np.kron(eyem, eyem))
        harm = -2j * (np.kron(eye3, np.kron(js[a], eyem))
                      + np.kron(eye3, np.kron(eyem, js[a])))
        out[a] = frame + harm
    return out


def derive_d_action(j) -> CoefficientOperator:
    """Solve the invariance system for the coefficient matrices at spin j.

    The map Lambda -> X is injective, so each generator gives an exact
    (least-squares residual at rounding level) solution; an inconsistent
    system would mean a broken expansion and raises immediately.
    """
    j = as_half_integer(j)
    if j > 2:
        raise ValueError("coefficient operators are built for j <= 2")
    tmat = x_transform_matrix(j)
    geom = _geometric_action(j)
    dim = tmat.shape[1]
    mats = np.empty((3, dim, dim), complex)
    for a in range(3):
        rhs = -geom[a] @ tmat
        sol, *_ = np.linalg.lstsq(tmat, rhs, rcond=None)
        residual = float(np.max(np.abs(tmat @ sol - rhs)))
        if residual > 1e-10:
            raise RuntimeError(
                f"inconsistent invariance system for j={j}, a={a + 1}: residual {residual:.3e}"
            )
        mats[a] = sol
    mats[np.abs(mats) < 1e-13] = 0.0
    return CoefficientOperator(j=j, matrices=mats, source="derived")


# ---------------------------------------------------------------------------
# Printed coefficient tables for j = 0, 1/2, 1 (verbatim transcription).
# Rows map a single Lambda_{m,n} to its image; entries are (m, n) -> factor.
# ---------------------------------------------------------------------------

_SQ2 = math.sqrt(2.0)
_SQ3 = math.sqrt(3.0)
_SQ6 = math.sqrt(6.0)


def _rows_to_matrix(j: Fraction, rows: dict) -> np.ndarray:
    labels = [(m, n) for m in half_integer_range(-j, j)
              for n in half_integer_range(-j - 1, j + 1)]
    index = {lab: i for i, lab in enumerate(labels)}
    dim = len(labels)
    mat = np.zeros((dim, dim), complex)
    for row_lab, terms in rows.items():
        r = index[row_lab]
        for col_lab, factor in terms.items():
            mat[r, index[col_lab]] = factor
    return mat


def _f(num, den=1) -> Fraction:
    return Fraction(num, den)


def _table4_j0():
    lab = lambda n: (_f(0), _f(n))
    d1 = {lab(-1): {lab(0): _SQ2 * 1j},
          lab(0): {lab(1): _SQ2 * 1j, lab(-1): _SQ2 * 1j},
          lab(1): {lab(0): _SQ2 * 1j}}
    d2 = {lab(-1): {lab(0): -_SQ2},
          lab(0): {lab(-1): _SQ2, lab(1): -_SQ2},
          lab(1): {lab(0): _SQ2}}
    d3 = {lab(-1): {lab(-1): -_SQ2 * 1j},
          lab(0): {},
          lab(1): {lab(1): _SQ2 * 1j}}
    return d1, d2, d3


def _table4_jhalf():
    m_minus, m_plus = _f(-1, 2), _f(1, 2)
    dn, up = _f(-3, 2), _f(3, 2)
    nm, np_ = _f(-1, 2), _f(1, 2)
    L = lambda m, n: (m, n)
    d1 = {
        L(m_minus, dn): {L(m_minus, nm): _SQ3 * 1j, L(m_plus, dn): 1j},
        L(m_minus, nm): {L(m_minus, dn): _SQ3 * 1j, L(m_minus, np_): 2j, L(m_plus, nm): 1j},
        L(m_minus, np_): {L(m_minus, nm): 2j, L(m_minus, up): _SQ3 * 1j, L(m_plus, np_): 1j},
        L(m_minus, up): {L(m_minus, np_): _SQ3 * 1j, L(m_plus, up): 1j},
        L(m_plus, dn): {L(m_minus, dn): 1j, L(m_plus, nm): _SQ3 * 1j},
        L(m_plus, nm): {L(m_minus, nm): 1j, L(m_plus, dn): _SQ3 * 1j, L(m_plus, np_): 2j},
        L(m_plus, np_): {L(m_minus, np_): 1j, L(m_plus, nm): 2j, L(m_plus, up): _SQ3 * 1j},
        L(m_plus, up): {L(m_minus, up): 1j, L(m_plus, np_): _SQ3 * 1j},
    }
    d2 = {
        L(m_minus, dn): {L(m_minus, nm): -_SQ3, L(m_plus, dn): -1.0},
        L(m_minus, nm): {L(m_minus, dn): _SQ3, L(m_minus, np_): -2.0, L(m_plus, nm): -1.0},
        L(m_minus, np_): {L(m_minus, nm): 2.0, L(m_minus, up): -_SQ3, L(m_plus, np_): -1.0},
        L(m_minus, up): {L(m_minus, np_): _SQ3, L(m_plus, up): -1.0},
        L(m_plus, dn): {L(m_minus, dn): 1.0, L(m_plus, nm): -_SQ3},
        L(m_plus, nm): {L(m_minus, nm): 1.0, L(m_plus, dn): _SQ3, L(m_plus, np_): -2.0},
        L(m_plus, np_): {L(m_minus, np_): 1.0, L(m_plus, nm): 2.0, L(m_plus, up): -_SQ3},
        L(m_plus, up): {L(m_minus, up): 1.0, L(m_plus, np_): _SQ3},
    }
    d3 = {
        L(m_minus, dn): {L(m_minus, dn): -4j},
        L(m_minus, nm): {L(m_minus, nm): -2j},
        L(m_minus, np_): {},
        L(m_minus, up): {L(m_minus, up): 2j},
        L(m_plus, dn): {L(m_plus, dn): -2j},
        L(m_plus, nm): {},
        L(m_plus, np_): {L(m_plus, np_): 2j},
        L(m_plus, up): {L(m_plus, up): 4j},
    }
    return d1, d2, d3


def _table4_j1():
    mm, m0, mp = _f(-1), _f(0), _f(1)
    dn, nm, n0, np_, up = _f(-2), _f(-1), _f(0), _f(1), _f(2)
    L = lambda m, n: (m, n)
    d1 = {
        L(mm, dn): {L(mm, nm): 2j, L(m0, dn): _SQ2 * 1j},
        L(mm, nm): {L(mm, dn): 2j, L(mm, n0): _SQ6 * 1j, L(m0, nm): _SQ2 * 1j},
        L(mm, n0): {L(mm, nm): _SQ6 * 1j, L(mm, np_): _SQ6 * 1j, L(m0, n0): _SQ2 * 1j},
        L(mm, np_): {L(mm, n0): _SQ6 * 1j, L(mm, up): 2j, L(m0, np_): _SQ2 * 1j},
        L(mm, up): {L(mm, np_): 2j, L(mp, up): _SQ2 * 1j},
        L(m0, dn): {L(mm, dn): _SQ2 * 1j, L(m0, nm): 2j, L(mp, dn): _SQ2 * 1j},
        L(m0, nm): {L(mm, nm): _SQ2 * 1j, L(m0, dn): 2j, L(m0, n0): _SQ6 * 1j, L(mp, nm): _SQ2 * 1j},
        L(m0, n0): {L(mm, n0): _SQ2 * 1j, L(m0, nm): _SQ6 * 1j, L(m0, np_): _SQ6 * 1j, L(mp, n0): _SQ2 * 1j},
        L(m0, np_): {L(mm, np_): _SQ2 * 1j, L(m0, n0): _SQ6 * 1j, L(m0, up): 2j, L(mp, np_): _SQ2 * 1j},
        L(m0, up): {L(mm, up): _SQ2 * 1j, L(m0, np_): 2j, L(mp, up): _SQ2 * 1j},
        L(mp, dn): {L(m0, dn): _SQ2 * 1j, L(mp, nm): 2j},
        L(mp, nm): {L(m0, nm): _SQ2 * 1j, L(mp, dn): 2j, L(mp, n0): _SQ6 * 1j},
        L(mp, n0): {L(m0, n0): _SQ2 * 1j, L(mp, nm): _SQ6 * 1j, L(mp, np_): _SQ6 * 1j},
        L(mp, np_): {L(m0, np_): _SQ2 * 1j, L(mp, n0): _SQ6 * 1j, L(mp, up): 2j},
        L(mp, up): {L(m0, up): _SQ2 * 1j, L(mp, np_): 2j},
    }
    d2 = {
        L(mm, dn): {L(mm, nm): -2.0, L(m0, dn): -_SQ2},
        L(mm, nm): {L(mm, dn): 2.0, L(mm, n0): -_SQ6, L(m0, nm): -_SQ2},
        L(mm, n0): {L(mm, nm): _SQ6, L(mm, np_): -_SQ6, L(m0, n0): -_SQ2},
        L(mm, np_): {L(mm, n0): _SQ6, L(mm, up): -2.0, L(m0, np_): -_SQ2},
        L(mm, up): {L(mm, np_): 2.0, L(m0, up): -_SQ2},
        L(m0, dn): {L(mm, dn): _SQ2, L(m0, nm): -2.0, L(mp, dn): -_SQ2},
        L(m0, nm): {L(mm, nm): _SQ2, L(m0, dn): 2.0, L(m0, n0): -_SQ6, L(mp, nm): -_SQ2},
        L(m0, n0): {L(mm, n0): _SQ2, L(m0, nm): _SQ6, L(m0, np_): -_SQ6, L(mp, n0): -_SQ2},
        L(m0, np_): {L(mm, np_): _SQ2, L(m0, n0): _SQ6, L(m0, up): -_SQ2 * _SQ2, L(mp, np_): -_SQ2},
        L(m0, up): {L(mm, up): _SQ2, L(m0, np_): 2.0, L(mp, up): -_SQ2},
        L(mp, dn): {L(m0, dn): _SQ2, L(mp, nm): -2.0},
        L(mp, nm): {L(m0, nm): _SQ2, L(mp, dn): 2.0, L(mp, n0): -_SQ6},
        L(mp, n0): {L(m0, n0): _SQ2, L(mp, nm): _SQ6, L(mp, np_): -_SQ6},
        L(mp, np_): {L(m0, np_): _SQ2, L(mp, n0): _SQ6, L(mp, up): -2.0},
        L(mp, up): {L(m0, up): _SQ2, L(mp, np_): 2.0},
    }
    d3 = {
        L(mm, dn): {L(mm, dn): -6j},
        L(mm, nm): {L(mm, nm): -4j},
        L(mm, n0): {L(mm, n0): -2j},
        L(mm, np_): {},
        L(mm, up): {L(mm, up): 2j},
        L(m0, dn): {L(m0, dn): -4j},
        L(m0, nm): {L(m0, nm): -2j},
        L(m0, n0): {},
        L(m0, np_): {L(m0, np_): 2j},
        L(m0, up): {L(m0, up): 4j},
        L(mp, dn): {L(mp, dn): -2j},
        L(mp, nm): {},
        L(mp, n0): {L(mp, n0): 2j},
        L(mp, np_): {L(mp, np_): 4j},
        L(mp, up): {L(mp, up): 6j},
    }
    return d1, d2, d3


def table4_operator(j) -> CoefficientOperator:
    """Printed coefficient table for j in {0, 1/2, 1}, transcribed verbatim.

    Transcription only: no algebraic property is asserted for these
    matrices (in particular, the printed j = 0 D_3 column is known to break
    closure against the same table's D_1 and D_2).
    """
    j = as_half_integer(j)
    builders = {Fraction(0): _table4_j0, Fraction(1, 2): _table4_jhalf, Fraction(1): _table4_j1}
    if j not in builders:
        raise ValueError("printed tables exist for j in {0, 1/2, 1}")
    rows = builders[j]()
    mats = np.stack([_rows_to_matrix(j, r) for r in rows])
    return CoefficientOperator(j=j, matrices=mats, source="table")


@dataclass(frozen=True)
class Table4Diff:
    """Entrywise comparison of a derived operator against the printed table."""

    j: Fraction
    max_abs: tuple[float, float, float]
    mismatches: list
    note: str = ""

    @property
    def matches(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        lines = [f"j={self.j}: max |derived - table| per generator: "
                 + ", ".join(f"D{a + 1}: {v:.3e}" for a, v in enumerate(self.max_abs))]
        for a, row, col, der, tab in self.mismatches:
            lines.append(
                f"  D{a} row ({row[0]},{row[1]}) <- column ({col[0]},{col[1]}): "
                f"derived {_exact_string(der)}, table {_exact_string(tab)}"
            )
        if self.note:
            lines.append("  note: " + self.note)
        return "\n".join(lines)


def diff_operators(derived: CoefficientOperator, table: CoefficientOperator,
                   tol: float = 1e-9) -> Table4Diff:
    """Report (not assert) discrepancies between derived and printed matrices."""
    if derived.j != table.j:
        raise ValueError("operators have different spins")
    labels = derived.labels()
    mismatches = []
    max_abs = []
    for a in range(3):
        delta = derived.matrices[a] - table.matrices[a]
        max_abs.append(float(np.max(np.abs(delta))))
        for r, c in zip(*np.nonzero(np.abs(delta) > tol)):
            mismatches.append((a + 1, labels[r], labels[c],
                               derived.matrices[a][r, c], table.matrices[a][r, c]))
    notes = []
    if derived.j == 0 and any(a == 3 for a, *_ in mismatches):
        notes.append(
            "the printed j=0 D3 column (+-sqrt(2) i) is inconsistent with the "
            "closure [D1, D2] = -2 D3 of the printed D1, D2, which forces +-2i; "
            "the derived operator keeps the closure-consistent value"
        )
    if derived.j == 1 and any(a == 1 for a, *_ in mismatches):
        notes.append(
            "the printed j=1 D1 row for (m,n)=(-1,2) couples to (1,2), a Delta m = 2 "
            "jump the m-ladder cannot produce; anti-Hermiticity against the printed "
            "(0,2) row forces the derived coupling to (0,2) instead"
        )
    return Table4Diff(j=derived.j, max_abs=tuple(max_abs), mismatches=mismatches,
                      note="; ".join(notes))


def rotation_covariance_check(modes: ModeCoefficients, grid: QuadratureGrid | None = None,
                              operator: CoefficientOperator | None = None,
                              workers: int | None = None) -> float:
    """Max deviation of the charge rotation law over all generator/component pairs.

    Differentiates the momentum and angular-momentum charges along the
    coefficient flows, D_a Q_b := B(D_a Lambda, Lambda) + B(Lambda,
    D_a Lambda), and compares with 2 eps_abc Q_c.
    """
    if operator is None:
        operator = derive_d_action(modes.j)
    cs = charge_set(modes, grid, workers=workers)
    targets = {"P": cs.momentum, "L": cs.angular_momentum}
    worst = 0.0
    for a in range(1, 4):
        flowed = operator.apply(a, modes)
        dp = momentum_sesquilinear(flowed, modes, grid, workers=workers) \
            + momentum_sesquilinear(modes, flowed, grid, workers=workers)
        dl = _angular_sesquilinear(flowed, modes, grid, workers) \
            + _angular_sesquilinear(modes, flowed, grid, workers)
        for name, deriv in (("P", dp), ("L", dl)):
            expected = 2.0 * np.einsum("bc,c->b", EPS3[a - 1], targets[name])
            worst = max(worst, float(np.max(np.abs(deriv.real - expected))))
            worst = max(worst, float(np.max(np.abs(deriv.imag))))
    return worst


def _angular_sesquilinear(modes1: ModeCoefficients, modes2: ModeCoefficients,
                          grid: QuadratureGrid | None, workers) -> np.ndarray:
    """Polarised angular-momentum form, matching the charge normalisation."""
    from .charges import VECTOR_DENSITY_FACTOR
    from .geometry import integrate_on_grid, s3_quadrature, tetrad_t0
    from .knotfield import z_values

    if grid is None:
        grid = s3_quadrature()
    pts = grid.points
    z1 = z_values(modes1, pts.alpha, pts.beta)
    z2 = z_values(modes2, pts.alpha, pts.beta)
    om2 = float(modes1.omega) ** 2
    dens_p = VECTOR_DENSITY_FACTOR * 2j * om2 * np.cross(z2, np.conj(z1), axis=0)
    w = np.moveaxis(pts.omega, -1, 0)
    dens_l = np.cross(dens_p, w[:3], axis=0)
    gamma = 1.0 - w[3]
    ell = modes1.ell
    tet = np.moveaxis(tetrad_t0(pts, ell), 0, -1)
    return ell * ell * integrate_on_grid(
        grid, np.einsum("an,ain->in", dens_l, tet) / gamma, workers=workers
    )


def energy_invariance_defect(modes: ModeCoefficients,
                             operator: CoefficientOperator | None = None,
                             step: float = 1e-6) -> float:
    """|d/ds E(Lambda + s D_a Lambda)| at s = 0, normalised by the energy.

    The coefficient matrices are anti-Hermitian, so the quadratic invariant
    sum |Lambda|^2 (hence the energy) is preserved along every flow.
    """
    from .charges import energy_closed

    if operator is None:
        operator = derive_d_action(modes.j)
    base = energy_closed(modes)
    worst = 0.0
    for a in range(1, 4):
        flowed = operator.apply(a, modes)
        plus = modes.with_values(modes.values + step * flowed.values)
        minus = modes.with_values(modes.values - step * flowed.values)
        worst = max(worst, abs(energy_closed(plus) - energy_closed(minus)) / (2 * step) / base)
    return worst
