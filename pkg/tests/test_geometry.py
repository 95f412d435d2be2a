import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma as gamma_fn

from emknots import geometry as geo

from conftest import random_s3_points


class TestConformalMap:
    def test_origin_maps_to_south_pole(self):
        p = geo.minkowski_to_cylinder(geo.MinkowskiEvent(0.0, 0.0, 0.0, 0.0), 1.0)
        assert p.tau == pytest.approx(0.0, abs=1e-15)
        assert p.chi == pytest.approx(np.pi, abs=1e-15)

    def test_unit_sphere_at_rest(self):
        ev = geo.MinkowskiEvent.from_polar(0.0, 1.0, 0.3, 0.4)
        p = geo.minkowski_to_cylinder(ev, 1.0)
        # U = -pi/4, V = pi/4
        assert p.tau == pytest.approx(0.0, abs=1e-15)
        assert p.chi == pytest.approx(np.pi / 2, abs=1e-14)

    @given(
        t=st.floats(-50, 50),
        r=st.floats(0.0, 80),
        ell=st.floats(0.1, 5.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, t, r, ell):
        ev = geo.MinkowskiEvent.from_polar(t, r, 1.1, 2.2)
        back = geo.cylinder_to_minkowski(geo.minkowski_to_cylinder(ev, ell), ell)
        scale = 1.0 + abs(t) + r
        assert abs(float(back.t) - t) < 1e-10 * scale
        assert abs(float(back.r) - r) < 1e-10 * scale

    def test_round_trip_batch(self, rng):
        t = rng.normal(scale=3.0, size=1000)
        r = rng.uniform(0.01, 20.0, 1000)
        ev = geo.MinkowskiEvent.from_polar(t, r, 1.0, 1.0)
        back = geo.cylinder_to_minkowski(geo.minkowski_to_cylinder(ev, 1.7), 1.7)
        assert np.allclose(back.t, t, atol=1e-10 * (1 + np.abs(t).max()))
        assert np.allclose(back.r, r, atol=1e-10 * (1 + r.max()))

    def test_inverse_examples(self):
        ev = geo.cylinder_to_minkowski(geo.CylinderPoint(0.0, np.pi, 0.0, 0.0), 1.0)
        assert float(ev.t) == pytest.approx(0.0, abs=1e-15)
        assert float(ev.r) == pytest.approx(0.0, abs=1e-15)
        ev = geo.cylinder_to_minkowski(geo.CylinderPoint(0.0, np.pi / 2, 0.2, 0.1), 2.0)
        assert float(ev.t) == pytest.approx(0.0, abs=1e-14)
        assert float(ev.r) == pytest.approx(2.0, rel=1e-14)

    def test_lightcone_boundary_rejected(self):
        with pytest.raises(ValueError):
            geo.cylinder_to_minkowski(geo.CylinderPoint(np.pi / 2, np.pi / 2, 0.0, 0.0), 1.0)

    def test_positive_ell_required(self):
        with pytest.raises(ValueError):
            geo.minkowski_to_cylinder(geo.MinkowskiEvent(0.0, 0.0, 0.0, 0.0), 0.0)


class TestConformalFactor:
    @pytest.mark.parametrize(
        "t,r,ell,expected",
        [(0.0, 0.0, 1.0, 2.0), (0.0, 1.3, 1.3, 1.0), (0.8, 0.0, 0.8, 1.0)],
    )
    def test_values(self, t, r, ell, expected):
        ev = geo.MinkowskiEvent.from_polar(t, r, 0.7, 0.2)
        assert geo.conformal_factor(ev, ell) == pytest.approx(expected, rel=1e-14)

    def test_matches_cylinder_chart(self, rng):
        t = rng.normal(scale=2.0, size=300)
        r = rng.uniform(0.01, 10.0, 300)
        ev = geo.MinkowskiEvent.from_polar(t, r, 0.9, 0.4)
        p = geo.minkowski_to_cylinder(ev, 1.4)
        assert np.allclose(
            geo.conformal_factor(ev, 1.4), np.cos(p.tau) - np.cos(p.chi), atol=1e-12
        )


class TestJacobian:
    def test_static_slice(self, rng):
        r = rng.uniform(0.1, 5.0, 50)
        ev = geo.MinkowskiEvent.from_polar(0.0, r, 1.0, 2.0)
        jac = geo.jacobian(ev, 1.0)
        g = geo.conformal_factor(ev, 1.0)
        assert np.allclose(jac[..., 0, 0], g, atol=1e-14)
        assert np.allclose(jac[..., 0, 1], 0.0, atol=1e-14)

    def test_wedge_positivity_and_closed_form(self, rng):
        t = rng.normal(scale=2.0, size=400)
        r = rng.uniform(0.01, 8.0, 400)
        ell = 1.3
        ev = geo.MinkowskiEvent.from_polar(t, r, 1.0, 1.0)
        jac = geo.jacobian(ev, ell)
        p = ell * jac[..., 0, 0]
        q = ell * jac[..., 1, 0]
        assert np.all(p - q >= -1e-14)
        g = geo.conformal_factor(ev, ell)
        assert np.allclose(p - q, g**2 * ((r - t) ** 2 + ell**2) / (2 * ell**2), atol=1e-12)

    def test_against_finite_differences(self, rng):
        h = 1e-6
        for _ in range(100):
            t = float(rng.normal(scale=1.5))
            r = float(rng.uniform(0.1, 5.0))
            ev = geo.MinkowskiEvent.from_polar(t, r, 0.8, 0.3)
            jac = geo.jacobian(ev, 1.1)
            tau_p = geo.minkowski_to_cylinder(geo.MinkowskiEvent.from_polar(t + h, r, 0.8, 0.3), 1.1).tau
            tau_m = geo.minkowski_to_cylinder(geo.MinkowskiEvent.from_polar(t - h, r, 0.8, 0.3), 1.1).tau
            assert (tau_p - tau_m) / (2 * h) == pytest.approx(float(jac[0, 0]), abs=1e-6)


class TestEmbedding:
    def test_poles_and_equator(self):
        assert np.allclose(geo.embed(np.pi / 2, np.pi / 2, 0.0).omega, [1, 0, 0, 0], atol=1e-15)
        assert np.allclose(geo.embed(0.0, 0.3, 0.9).omega, [0, 0, 0, 1], atol=1e-15)
        assert np.allclose(geo.embed(np.pi / 2, 0.0, 0.0).omega, [0, 0, 1, 0], atol=1e-15)

    def test_unit_norm_enforced(self):
        with pytest.raises(ValueError):
            geo.S3Point(np.array([1.0, 0.1, 0.0, 0.0]))


class TestOneForms:
    def test_t0_reduction_to_tetrad(self, rng):
        xs = rng.normal(scale=2.0, size=(3, 100))
        ev = geo.MinkowskiEvent(np.zeros(100), *xs)
        forms = geo.one_forms_minkowski(ev, 1.3)
        p = geo.minkowski_to_cylinder(ev, 1.3)
        tet = geo.tetrad_t0(p.s3(), 1.3)
        assert np.allclose(forms[..., 1:, 1:], tet, atol=1e-12)
        assert np.allclose(forms[..., 1:, 0], 0.0, atol=1e-15)
        assert np.allclose(forms[..., 0, 1:], 0.0, atol=1e-15)

    def test_metric_identity_cartesian(self, rng):
        t = rng.normal(scale=1.0, size=200)
        xs = rng.normal(scale=2.0, size=(3, 200))
        ev = geo.MinkowskiEvent(t, *xs)
        forms = geo.one_forms_minkowski(ev, 0.9)
        g = geo.conformal_factor(ev, 0.9)
        eta = np.diag([-1.0, 1.0, 1.0, 1.0])
        lhs = -np.einsum("...m,...n->...mn", forms[..., 0, :], forms[..., 0, :])
        lhs = lhs + np.einsum("...am,...an->...mn", forms[..., 1:, :], forms[..., 1:, :])
        # conformal relation with the scale made explicit: factor (gamma/ell)^2
        assert np.allclose(lhs, (g[..., None, None] / 0.9) ** 2 * eta, atol=1e-10)

    def test_metric_identity_polar(self, rng):
        t = rng.normal(scale=1.0, size=150)
        r = rng.uniform(0.1, 4.0, 150)
        theta = rng.uniform(0.2, np.pi - 0.2, 150)
        phi = rng.uniform(0.0, 2 * np.pi, 150)
        ev = geo.MinkowskiEvent.from_polar(t, r, theta, phi)
        forms = geo.one_forms_polar(ev, 1.2)
        g = geo.conformal_factor(ev, 1.2)
        lhs = -np.einsum("...m,...n->...mn", forms[..., 0, :], forms[..., 0, :])
        lhs = lhs + np.einsum("...am,...an->...mn", forms[..., 1:, :], forms[..., 1:, :])
        scaled = (g / 1.2) ** 2
        target = np.zeros_like(lhs)
        target[..., 0, 0] = -scaled
        target[..., 1, 1] = scaled
        target[..., 2, 2] = scaled * r**2
        target[..., 3, 3] = scaled * r**2 * np.sin(theta) ** 2
        assert np.allclose(lhs, target, atol=1e-10 * (1 + r.max() ** 2))

    def test_polar_cartesian_consistency(self, rng):
        t = float(rng.normal())
        r = float(rng.uniform(0.5, 3.0))
        theta, phi = 1.1, 0.7
        ev = geo.MinkowskiEvent.from_polar(t, r, theta, phi)
        pol = geo.one_forms_polar(ev, 1.0)
        car = geo.one_forms_minkowski(ev, 1.0)
        st_, ct = np.sin(theta), np.cos(theta)
        sp, cp = np.sin(phi), np.cos(phi)
        # d(t, r, theta, phi)/d(t, x, y, z)
        jac = np.array([
            [1, 0, 0, 0],
            [0, st_ * cp, st_ * sp, ct],
            [0, ct * cp / r, ct * sp / r, -st_ / r],
            [0, -sp / (r * st_), cp / (r * st_), 0],
        ])
        assert np.allclose(pol @ jac, car, atol=1e-12)

    def test_duality_with_invariant_fields(self, rng):
        # e^a(L_b) = delta_ab after mapping L_b through the chart chain
        for _ in range(20):
            t = float(rng.normal(scale=0.5))
            r = float(rng.uniform(0.3, 3.0))
            theta = float(rng.uniform(0.4, np.pi - 0.4))
            phi = float(rng.uniform(0.1, 6.0))
            ell = 1.2
            ev = geo.MinkowskiEvent.from_polar(t, r, theta, phi)
            cyl = geo.minkowski_to_cylinder(ev, ell)
            pt = cyl.s3()
            forms = geo.one_forms_polar(ev, ell)
            jac = geo.jacobian(ev, ell)
            for b in (1, 2, 3):
                v4 = geo.invariant_vector_field("L", b, pt)
                # embedding tangent -> (chi, theta, phi) chart components
                schi, w = np.sin(cyl.chi), pt.omega
                dchi = -v4[3] / schi
                dtheta = (np.cos(cyl.chi) * np.cos(cyl.theta) * dchi - v4[2]) / (
                    schi * np.sin(cyl.theta)
                )
                dphi = (w[0] * v4[1] - w[1] * v4[0]) / (w[0] ** 2 + w[1] ** 2)
                cyl_vec = np.array([0.0, dchi, dtheta, dphi])
                mink_vec = np.linalg.solve(jac, cyl_vec)
                vals = forms @ mink_vec
                expected = np.array([0.0, 0.0, 0.0, 0.0])
                expected[b] = 1.0
                assert np.allclose(vals, expected, atol=1e-8)

    def test_maurer_cartan_by_finite_differences(self, rng):
        h = 1e-5
        ell = 1.1
        for _ in range(10):
            base = np.array([rng.normal(scale=0.4), *rng.normal(scale=1.0, size=3)])

            def forms_at(vec):
                ev = geo.MinkowskiEvent(vec[0], vec[1], vec[2], vec[3])
                return geo.one_forms_minkowski(ev, ell)

            grad = np.empty((4, 4, 4))  # d_mu e^A_nu
            for mu in range(4):
                dv = np.zeros(4)
                dv[mu] = h
                grad[mu] = (forms_at(base + dv) - forms_at(base - dv)) / (2 * h)
            e = forms_at(base)
            for a in range(3):
                de = grad[:, 1 + a, :] - grad[:, 1 + a, :].T
                # eps_abc (e^b wedge e^c)_{mu nu}, both index orders summed
                wedge = np.zeros((4, 4))
                for b in range(3):
                    for c in range(3):
                        if geo.EPS3[a, b, c]:
                            wedge += geo.EPS3[a, b, c] * (
                                np.outer(e[1 + b], e[1 + c]) - np.outer(e[1 + c], e[1 + b])
                            )
                assert np.max(np.abs(de + wedge)) < 1e-5 * (1 + np.max(np.abs(e)))


class TestTetrad:
    def test_north_pole_zero(self):
        assert np.allclose(geo.tetrad_t0(geo.S3Point(np.array([0, 0, 0, 1.0])), 1.0), 0.0)

    def test_far_pole(self):
        tet = geo.tetrad_t0(geo.S3Point(np.array([0, 0, 0, -1.0])), 2.0)
        assert np.allclose(tet, -2.0 * np.eye(3) / 2.0, atol=1e-15)

    def test_orthogonality_identity(self, rng):
        pts = random_s3_points(rng, 1000)
        tet = geo.tetrad_t0(pts, 1.7)
        prod = np.einsum("...ai,...bi->...ab", tet, tet)
        g = 1.0 - pts.omega[:, 3]
        expected = (g**2 / 1.7**2)[:, None, None] * np.eye(3)
        assert np.max(np.abs(prod - expected)) < 1e-12 * (1 + prod.max())


class TestInvariantFields:
    def test_operator_commutators_as_matrices(self):
        # operator matrices on linear functions: A = -eta; [A_a, A_b] = 2 eps A_c
        for kind, eta in (("L", geo.HOOFT_SELF_DUAL), ("R", geo.HOOFT_ANTI_SELF_DUAL)):
            a_mats = -eta
            for a in range(3):
                b, c = (a + 1) % 3, (a + 2) % 3
                comm = a_mats[a] @ a_mats[b] - a_mats[b] @ a_mats[a]
                assert np.allclose(comm, 2 * a_mats[c]), kind
        d_mats = -(geo.HOOFT_SELF_DUAL + geo.HOOFT_ANTI_SELF_DUAL)
        for a in range(3):
            b, c = (a + 1) % 3, (a + 2) % 3
            comm = d_mats[a] @ d_mats[b] - d_mats[b] @ d_mats[a]
            assert np.allclose(comm, 2 * d_mats[c])

    def test_left_right_commute(self):
        for a in range(3):
            for b in range(3):
                lhs = geo.HOOFT_SELF_DUAL[a] @ geo.HOOFT_ANTI_SELF_DUAL[b]
                rhs = geo.HOOFT_ANTI_SELF_DUAL[b] @ geo.HOOFT_SELF_DUAL[a]
                assert np.allclose(lhs, rhs)

    def test_tangency(self, rng):
        pts = random_s3_points(rng, 64)
        for kind in ("L", "R", "D"):
            for a in (1, 2, 3):
                v = geo.invariant_vector_field(kind, a, pts)
                assert np.max(np.abs(np.einsum("...c,...c->...", v, pts.omega))) < 1e-14

    def test_hooft_symbol_values(self):
        eta = geo.HOOFT_SELF_DUAL
        assert eta[0, 1, 2] == 1 and eta[0, 2, 1] == -1
        assert eta[2, 2, 3] == 1 and eta[2, 3, 2] == -1
        tilde = geo.HOOFT_ANTI_SELF_DUAL
        assert tilde[2, 2, 3] == -1 and tilde[2, 3, 2] == 1
        assert np.allclose(eta[:, :3, :3], geo.EPS3)
        gens = geo.SU2_GENERATORS
        assert np.allclose(gens[2], np.array([[-1j, 0], [0, 1j]]))

    def test_r_flow_preserves_coframe(self, rng):
        # Lie derivative of e^b along R-flows vanishes; along L-flows it rotates
        h = 1e-6
        pts = random_s3_points(rng, 12)

        def coframe(omega):
            out = np.empty(omega.shape[:-1] + (3, 4))
            for b in range(3):
                out[..., b, :] = -np.einsum(
                    "bc,...b->...c", geo.HOOFT_SELF_DUAL[b], omega
                )
            return out

        for a in (1, 2, 3):
            for kind, expected_rot in (("R", 0.0), ("L", 2.0)):
                flow_p = geo.rotation_flow(kind, a, h)
                flow_m = geo.rotation_flow(kind, a, -h)
                pulled_p = np.einsum(
                    "...bc,cd->...bd", coframe(pts.omega @ flow_p.T), flow_p
                )
                pulled_m = np.einsum(
                    "...bc,cd->...bd", coframe(pts.omega @ flow_m.T), flow_m
                )
                lie = (pulled_p - pulled_m) / (2 * h)
                base = coframe(pts.omega)
                target = np.zeros_like(lie)
                if expected_rot:
                    for b in range(3):
                        for c in range(3):
                            if geo.EPS3[a - 1, b, c]:
                                target[..., b, :] += (
                                    expected_rot * geo.EPS3[a - 1, b, c] * base[..., c, :]
                                )
                assert np.max(np.abs(lie - target)) < 1e-6

    def test_l3_angular_form(self, rng):
        # L3 = cos(theta) d_chi - cot(chi) sin(theta) d_theta - d_phi
        for _ in range(20):
            chi = float(rng.uniform(0.3, np.pi - 0.3))
            theta = float(rng.uniform(0.3, np.pi - 0.3))
            phi = float(rng.uniform(0.0, 2 * np.pi))
            pt = geo.embed(chi, theta, phi)
            v = geo.invariant_vector_field("L", 3, pt)
            w = pt.omega
            dchi = -v[3] / np.sin(chi)
            dtheta = (np.cos(chi) * np.cos(theta) * dchi - v[2]) / (np.sin(chi) * np.sin(theta))
            dphi = (w[0] * v[1] - w[1] * v[0]) / (w[0] ** 2 + w[1] ** 2)
            assert dchi == pytest.approx(np.cos(theta), abs=1e-10)
            assert dtheta == pytest.approx(-np.cos(chi) / np.sin(chi) * np.sin(theta), abs=1e-10)
            assert dphi == pytest.approx(-1.0, abs=1e-10)

    def test_flow_derivative_of_constant(self):
        pt = geo.embed(1.0, 0.5, 0.3)
        val = geo.apply_invariant_derivative("D", 2, lambda q: 1.0, pt)
        assert val == pytest.approx(0.0, abs=1e-12)


class TestQuadrature:
    def test_total_weight(self, default_grid):
        assert np.sum(default_grid.weights) == pytest.approx(2 * np.pi**2, abs=1e-13)

    def test_odd_coordinate_integrates_to_zero(self, default_grid):
        assert abs(np.sum(default_grid.weights * default_grid.points.omega[:, 3])) < 1e-13

    def test_node_count_validation(self):
        with pytest.raises(ValueError):
            geo.s3_quadrature(1, 16, 16)

    @given(
        st.integers(0, 4), st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)
    )
    @settings(max_examples=60, deadline=None)
    def test_monomials_against_beta_oracle(self, a, b, c, d):
        if a + b + c + d > 8:
            return
        grid = TestQuadrature._grid()
        w = grid.points.omega
        vals = w[:, 0] ** a * w[:, 1] ** b * w[:, 2] ** c * w[:, 3] ** d
        numeric = float(np.sum(grid.weights * vals))
        if a % 2 or b % 2 or c % 2 or d % 2:
            expected = 0.0
        else:
            ks = [a // 2, b // 2, c // 2, d // 2]
            expected = 2.0 * np.prod([gamma_fn(k + 0.5) for k in ks]) / gamma_fn(2 + sum(ks))
        assert numeric == pytest.approx(expected, abs=1e-12)

    @staticmethod
    def _grid():
        if not hasattr(TestQuadrature, "_cached"):
            TestQuadrature._cached = geo.s3_quadrature()
        return TestQuadrature._cached

    def test_worker_reduction_is_deterministic(self, small_grid, rng):
        vals = rng.normal(size=len(small_grid))
        ser = geo.integrate_on_grid(small_grid, vals)
        par1 = geo.integrate_on_grid(small_grid, vals, workers=4)
        par2 = geo.integrate_on_grid(small_grid, vals, workers=4)
        assert par1 == par2
        assert par1 == pytest.approx(ser, rel=1e-13)

    def test_angle_rule_total_weight(self):
        grid = geo.s3_quadrature(16, 16, 16, theta_rule="angle")
        assert np.sum(grid.weights) == pytest.approx(2 * np.pi**2, rel=1e-12)
        with pytest.raises(ValueError):
            geo.s3_quadrature(8, 8, 8, theta_rule="midpoint")
