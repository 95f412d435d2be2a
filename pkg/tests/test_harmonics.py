import math
from fractions import Fraction

import numpy as np
import pytest

from emknots import geometry as geo
from emknots import harmonics as har

from conftest import random_s3_points

HALF = Fraction(1, 2)


def spins_upto(j_max):
    return [Fraction(k, 2) for k in range(0, int(2 * j_max) + 1)]


def index_pairs(j):
    rng = har.half_integer_range(-j, j)
    return [(m, n) for m in rng for n in rng]


class TestSpinIndex:
    def test_validation(self):
        har.SpinIndex(1, 0, -1)
        har.SpinIndex(HALF, HALF, -HALF)
        with pytest.raises(ValueError):
            har.SpinIndex(1, HALF, 0)
        with pytest.raises(ValueError):
            har.SpinIndex(1, 2, 0)
        with pytest.raises(ValueError):
            har.SpinIndex(-1, 0, 0)

    def test_half_integer_parsing(self):
        assert har.as_half_integer("3/2") == Fraction(3, 2)
        assert har.as_half_integer(0.5) == HALF
        with pytest.raises(ValueError):
            har.as_half_integer(0.3)


class TestHarmonicValues:
    def test_constant_mode(self, rng):
        pts = random_s3_points(rng, 16)
        vals = har.harmonic(har.SpinIndex(0, 0, 0), pts)
        assert np.allclose(vals, 1.0 / (math.sqrt(2.0) * math.pi))

    def test_lowest_spinor_mode(self):
        pt = geo.S3Point(np.array([1.0, 0.0, 0.0, 0.0]))
        val = har.harmonic(har.SpinIndex(HALF, HALF, HALF), pt)
        assert val == pytest.approx(-1.0 / math.pi, abs=1e-15)
        # general point: -alpha/pi
        pt = geo.embed(0.7, 1.1, 2.0)
        val = har.harmonic(har.SpinIndex(HALF, HALF, HALF), pt)
        assert val == pytest.approx(-pt.alpha / math.pi, abs=1e-14)

    @pytest.mark.parametrize("j", spins_upto(1))
    def test_conjugation_symmetry(self, j, rng):
        pts = random_s3_points(rng, 32)
        for m, n in index_pairs(j):
            lhs = np.conj(har.harmonic_values(j, m, n, pts.alpha, pts.beta))
            rhs = (-1) ** int(m + n) * har.harmonic_values(j, -m, -n, pts.alpha, pts.beta)
            assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestHarmonicTable:
    def test_j0_single_entry(self, rng):
        pts = random_s3_points(rng, 4)
        table = har.harmonic_table(0, pts)
        assert table.values.shape == (1, 1, 4)
        assert np.allclose(table.entry(0, 0), 1.0 / (math.sqrt(2.0) * math.pi))

    def test_consistency_with_single_evaluations(self, rng):
        pts = random_s3_points(rng, 8)
        j = Fraction(3, 2)
        table = har.harmonic_table(j, pts)
        for m, n in index_pairs(j):
            direct = har.harmonic(har.SpinIndex(j, m, n), pts)
            assert np.array_equal(table.entry(m, n), direct) or np.allclose(
                table.entry(m, n), direct, atol=1e-16
            )

    def test_sum_rule_rotation_invariant(self, rng):
        # sum_{m,n} |Y|^2 takes the same value at D-rotated points
        j = Fraction(1)
        pts = random_s3_points(rng, 6)
        rot = geo.rotation_flow("D", 2, 0.37)
        pts_rot = geo.S3Point(pts.omega @ rot.T)
        s1 = np.sum(np.abs(har.harmonic_table(j, pts).values) ** 2, axis=(0, 1))
        s2 = np.sum(np.abs(har.harmonic_table(j, pts_rot).values) ** 2, axis=(0, 1))
        assert np.max(np.abs(s1 - s2)) < 1e-10


class TestEigenvalueRelations:
    @pytest.mark.parametrize("j", spins_upto(1))
    def test_l3_r3(self, j, rng):
        pts = random_s3_points(rng, 1)
        pt = geo.S3Point(pts.omega[0])
        for m, n in index_pairs(j):
            f = lambda q: har.harmonic_values(j, m, n, q.alpha, q.beta)
            val = f(pt)
            l3 = 0.5j * geo.apply_invariant_derivative("L", 3, f, pt)
            r3 = 0.5j * geo.apply_invariant_derivative("R", 3, f, pt)
            assert abs(l3 - float(n) * val) < 1e-6
            assert abs(r3 - float(m) * val) < 1e-6

    @pytest.mark.parametrize("j", spins_upto(1))
    def test_ladders(self, j, rng):
        pts = random_s3_points(rng, 1)
        pt = geo.S3Point(pts.omega[0])
        sq = math.sqrt(2.0)
        for m, n in index_pairs(j):
            f = lambda q: har.harmonic_values(j, m, n, q.alpha, q.beta)
            for sign in (+1, -1):
                # (i/2) L_pm Y = sqrt((j -+ n)(j +- n + 1)/2) Y_{m, n pm 1}
                deriv = (0.5j / sq) * (
                    geo.apply_invariant_derivative("L", 1, f, pt)
                    + sign * 1j * geo.apply_invariant_derivative("L", 2, f, pt)
                )
                coef = math.sqrt(max(float((j - sign * n) * (j + sign * n + 1)), 0.0) / 2.0)
                target = 0.0
                if abs(n + sign) <= j:
                    target = coef * har.harmonic_values(j, m, n + sign, pt.alpha, pt.beta)
                assert abs(deriv - target) < 1e-6

    def test_specific_ladder_example(self, rng):
        # (i/2) R_+ Y_{1;0,0} = sqrt(1 * 2/2) Y_{1;1,0}
        pt = geo.S3Point(random_s3_points(rng, 1).omega[0])
        f = lambda q: har.harmonic_values(1, 0, 0, q.alpha, q.beta)
        deriv = (0.5j / math.sqrt(2.0)) * (
            geo.apply_invariant_derivative("R", 1, f, pt)
            + 1j * geo.apply_invariant_derivative("R", 2, f, pt)
        )
        assert abs(deriv - har.harmonic_values(1, 1, 0, pt.alpha, pt.beta)) < 1e-6

    @pytest.mark.parametrize("j", spins_upto(1))
    def test_casimir(self, j, rng):
        pt = geo.S3Point(random_s3_points(rng, 1).omega[0])
        m, n = index_pairs(j)[0]
        f = lambda q: har.harmonic_values(j, m, n, q.alpha, q.beta)
        lap = sum(geo.second_invariant_derivative("L", a, f, pt) for a in (1, 2, 3))
        assert abs(-0.25 * lap - float(j * (j + 1)) * f(pt)) < 1e-4


class TestClebschGordan:
    def test_table_values(self):
        assert har.clebsch_gordan(HALF, HALF, HALF, -HALF, 0, 0) == pytest.approx(1 / math.sqrt(2))
        assert har.clebsch_gordan(HALF, -HALF, HALF, HALF, 0, 0) == pytest.approx(-1 / math.sqrt(2))
        assert har.clebsch_gordan(1, 1, 1, -1, 0, 0) == pytest.approx(1 / math.sqrt(3))
        for j, m in [(1, -1), (HALF, HALF), (2, 0)]:
            assert har.clebsch_gordan(j, m, 0, 0, j, m) == pytest.approx(1.0)

    def test_selection_rules(self):
        assert har.clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0
        assert har.clebsch_gordan(1, 1, 1, 1, 1, 0) == 0.0

    @pytest.mark.parametrize("j1", spins_upto(1))
    @pytest.mark.parametrize("j2", spins_upto(1))
    def test_orthogonality(self, j1, j2):
        js = [abs(j1 - j2) + k for k in range(int(j1 + j2 - abs(j1 - j2)) + 1)]
        m1s = har.half_integer_range(-j1, j1)
        m2s = har.half_integer_range(-j2, j2)
        for ja in js:
            for jb in js:
                for ma in har.half_integer_range(-ja, ja):
                    for mb in har.half_integer_range(-jb, jb):
                        total = sum(
                            har.clebsch_gordan(j1, m1, j2, m2, ja, ma)
                            * har.clebsch_gordan(j1, m1, j2, m2, jb, mb)
                            for m1 in m1s
                            for m2 in m2s
                        )
                        expected = 1.0 if (ja, ma) == (jb, mb) else 0.0
                        assert abs(total - expected) < 1e-14


class TestAdjointHarmonics:
    def test_j0_constant(self, rng):
        pts = random_s3_points(rng, 8)
        vals = har.adjoint_harmonic(0, 0, 0, pts)
        assert np.allclose(vals, 1.0 / (math.sqrt(2.0) * math.pi))

    def test_index_validation(self, rng):
        pt = geo.S3Point(random_s3_points(rng, 1).omega[0])
        with pytest.raises(ValueError):
            har.adjoint_harmonic(1, 3, 0, pt)
        with pytest.raises(ValueError):
            har.adjoint_harmonic(1, 1, 2, pt)

    @pytest.mark.parametrize("j", spins_upto(1))
    def test_orthonormality(self, j, small_grid):
        pts = small_grid.points
        labels = [(l, m) for l in range(int(2 * j) + 1) for m in range(-l, l + 1)]
        vals = np.stack([har.adjoint_harmonic(j, l, m, pts) for l, m in labels])
        gram = (vals * small_grid.weights) @ np.conj(vals).T
        assert np.max(np.abs(gram - np.eye(len(labels)))) < 1e-10

    @pytest.mark.parametrize("j", spins_upto(1) + [Fraction(3, 2)])
    def test_cg_reconstruction(self, j, rng):
        pts = random_s3_points(rng, 24)
        for m, n in index_pairs(j):
            direct = har.harmonic_values(j, m, n, pts.alpha, pts.beta)
            recon = np.zeros_like(direct)
            for l in range(int(2 * j) + 1):
                big_m = m + n
                if abs(big_m) <= l and big_m.denominator == 1:
                    recon = recon + har.clebsch_gordan(j, m, j, n, l, big_m) * \
                        har.adjoint_harmonic(j, l, int(big_m), pts)
            assert np.max(np.abs(direct - recon)) < 1e-9


class TestGramMatrix:
    def test_j0(self, small_grid):
        gram = har.gram_matrix(0, small_grid)
        assert gram.shape == (1, 1)
        assert gram[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_j1_identity(self, default_grid):
        gram = har.gram_matrix(1, default_grid)
        assert np.max(np.abs(gram - np.eye(9))) < 1e-10

    def test_cross_spin_orthogonality(self, small_grid):
        pts = small_grid.points
        y0 = har.harmonic_values(0, 0, 0, pts.alpha, pts.beta)
        table = har.harmonic_table(1, pts)
        overlaps = np.einsum(
            "mnk,k,k->mn", table.values, np.conj(y0), small_grid.weights
        )
        assert np.max(np.abs(overlaps)) < 1e-10


class TestParitySelection:
    def test_odd_monomial_integrals_vanish(self, small_grid, rng):
        # odd embedding monomials against Y Ybar of fixed spin integrate to zero
        j = Fraction(1, 2)
        pts = small_grid.points
        table = har.harmonic_table(j, pts)
        w4 = pts.omega[:, 3]
        w1 = pts.omega[:, 0]
        for _ in range(4):
            pairs = index_pairs(j)
            (m, n) = pairs[rng.integers(len(pairs))]
            (mp, np_) = pairs[rng.integers(len(pairs))]
            dens = table.entry(m, n) * np.conj(table.entry(mp, np_))
            for odd in (w4, w1, w4**3, w1 * w4**2):
                val = np.sum(small_grid.weights * odd * dens)
                assert abs(val) < 1e-11
