import math

import numpy as np
import pytest
from scipy import optimize

from jumppot.errors import (
    AmbiguityError,
    DegeneratePointError,
    InvalidParameterError,
)
from jumppot.geometry import (
    Ball,
    BoxSpec,
    ERegionSpec,
    GraphDomain,
    HalfSpace,
    TangentBallSpec,
    box_diffeo,
    box_diffeo_inverse,
    domain_from_config,
    region_membership,
    verify_bilipschitz,
)


class TestDistance:
    def test_halfspace(self):
        hs = HalfSpace(3)
        assert hs.dist_to_boundary(np.array([1.0, -2.0, 0.3])) == 0.3
        assert hs.dist_to_boundary(np.array([0.0, 0.0, -1.0])) == 0.0

    def test_ball(self):
        b = Ball(np.zeros(3), 1.0)
        x = np.array([0.25, 0.0, 0.0])
        assert b.dist_to_boundary(x) == pytest.approx(0.75)
        assert b.dist_to_boundary(np.array([2.0, 0.0, 0.0])) == 0.0

    def test_flat_graph_reduces_to_halfspace(self):
        g = GraphDomain.preset("flat", d=3)
        assert g.dist_to_boundary(np.array([5.0, -1.0, 0.7])) == pytest.approx(0.7)

    def test_paraboloid_against_1d_oracle(self):
        g = GraphDomain.preset("paraboloid", d=2, lam=1.0)
        x = np.array([0.3, 0.5])
        # independent oracle: scalar minimization of the exact distance
        res = optimize.minimize_scalar(
            lambda u: math.hypot(u - 0.3, 0.5 * u * u - 0.5),
            bounds=(-2.0, 2.0),
            method="bounded",
            options={"xatol": 1e-13},
        )
        assert g.dist_to_boundary(x) == pytest.approx(res.fun, abs=1e-9)


class TestNearestPoint:
    def test_halfspace(self):
        hs = HalfSpace(2)
        Q, frame = hs.nearest_boundary_point(np.array([0.7, 0.4]))
        assert np.allclose(Q, [0.7, 0.0])
        assert np.allclose(frame.inward_normal, [0.0, 1.0])

    def test_ball(self):
        b = Ball(np.zeros(2), 1.0)
        Q, frame = b.nearest_boundary_point(np.array([0.5, 0.0]))
        assert np.allclose(Q, [1.0, 0.0])
        assert np.allclose(frame.inward_normal, [-1.0, 0.0], atol=1e-12)

    def test_ball_center_degenerate(self):
        b = Ball(np.zeros(2), 1.0)
        with pytest.raises(DegeneratePointError):
            b.nearest_boundary_point(np.zeros(2))

    def test_graph_matches_halfspace_when_flat(self):
        g = GraphDomain.preset("flat", d=2)
        Q, frame = g.nearest_boundary_point(np.array([0.3, 0.05]))
        assert np.allclose(Q, [0.3, 0.0], atol=1e-12)
        assert np.allclose(frame.inward_normal, [0.0, 1.0], atol=1e-12)

    def test_graph_ambiguity_outside_regime(self):
        g = GraphDomain.preset("paraboloid", d=2, lam=1.0)
        with pytest.raises(AmbiguityError):
            g.nearest_boundary_point(np.array([0.0, 10.0]))

    def test_nearest_point_equals_distance(self):
        b = Ball(np.zeros(2), 1.0)
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = rng.uniform(-0.6, 0.6, 2)
            if np.linalg.norm(x) < 1e-3:
                continue
            Q, _ = b.nearest_boundary_point(x)
            assert np.linalg.norm(x - Q) == pytest.approx(
                b.dist_to_boundary(x), abs=1e-10
            )

    def test_frame_orthonormal(self):
        b = Ball(np.zeros(3), 2.0)
        _, frame = b.nearest_boundary_point(np.array([0.3, 0.9, -0.2]))
        eye = frame.axes.T @ frame.axes
        assert np.allclose(eye, np.eye(3), atol=1e-12)


class TestRegions:
    def setup_method(self):
        self.hs = HalfSpace(2)
        _, self.frame = self.hs.nearest_boundary_point(np.array([0.0, 0.5]))

    def test_E_nu_axis_point(self):
        r = 0.2
        inside, rho = region_membership(
            self.hs, self.frame, np.array([0.0, r / 4.0]), ERegionSpec(0.7, r)
        )
        assert inside and rho == pytest.approx(r / 4.0)

    def test_box_height_violation(self):
        r = 0.2
        inside, rho = region_membership(
            self.hs, self.frame, np.array([0.0, r]), BoxSpec(r, r / 2.0)
        )
        assert not inside and rho == pytest.approx(r)

    def test_tangent_ball_interior_point(self):
        b = Ball(np.zeros(2), 1.0)
        x = 0.9 * np.array([1.0, 0.0])
        Q, frame = b.nearest_boundary_point(x)
        inside, _ = region_membership(b, frame, x, TangentBallSpec(0.2, True))
        assert inside

    def test_E_nu_inclusion(self):
        r = self.hs.R_hat / 4.0
        rng = np.random.default_rng(2)
        for _ in range(500):
            x = np.array(
                [rng.uniform(-r / 4, r / 4), rng.uniform(1e-6, r / 2)]
            )
            in_small, _ = region_membership(self.hs, self.frame, x, ERegionSpec(0.3, r))
            in_big, _ = region_membership(self.hs, self.frame, x, ERegionSpec(0.9, r))
            if in_small:
                assert in_big

    def test_region_parameter_validation(self):
        with pytest.raises(InvalidParameterError):
            region_membership(
                self.hs, self.frame, np.array([0.0, 0.1]), ERegionSpec(0.5, 10.0)
            )
        with pytest.raises(InvalidParameterError):
            region_membership(
                self.hs, self.frame, np.array([0.0, 0.1]), BoxSpec(0.0, 0.1)
            )

    def test_box_ball_sandwich(self):
        # B_D(Q, 2r/3) in U(r) in B_D(Q, 2r) on sampled points
        b = Ball(np.zeros(2), 1.0)
        x0 = np.array([0.93, 0.0])
        Q, frame = b.nearest_boundary_point(x0)
        r = b.R_hat / 8.0
        rng = np.random.default_rng(3)
        for _ in range(800):
            x = Q + rng.uniform(-2.2 * r, 2.2 * r, 2)
            if not b.contains(x):
                continue
            inside, _ = region_membership(b, frame, x, BoxSpec(r, r))
            dist = np.linalg.norm(x - Q)
            if dist < 2.0 * r / 3.0:
                assert inside
            if inside:
                assert dist < 2.0 * r

    def test_rho_delta_comparability(self):
        # (2/sqrt5) rho <= delta <= rho on U(R_hat/8)
        b = Ball(np.zeros(2), 1.0)
        Q, frame = b.nearest_boundary_point(np.array([0.95, 0.0]))
        cap = b.R_hat / 8.0
        rng = np.random.default_rng(4)
        for _ in range(500):
            v = np.array([rng.uniform(-cap, cap), rng.uniform(1e-5, cap)])
            x = frame.from_frame(np.array([v[0], v[1] + frame.psi(v[:1])]))
            inside, rho = region_membership(b, frame, x, BoxSpec(cap, cap))
            if not inside:
                continue
            delta = b.dist_to_boundary(x)
            assert delta <= rho + 1e-12
            assert delta >= (2.0 / math.sqrt(5.0)) * rho - 1e-12

    def test_E_nu_distance_comparability(self):
        # 3 y_d / 4 <= delta_S <= delta_D <= 2 y_d for y in E_nu(r)
        b = Ball(np.zeros(2), 1.0)
        Q, frame = b.nearest_boundary_point(np.array([0.9, 0.0]))
        r = b.R_hat / 4.0
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(2000):
            v = np.array([rng.uniform(-r / 4, r / 4), rng.uniform(1e-5, r / 2)])
            x = frame.from_frame(v)
            inside, _ = region_membership(b, frame, x, ERegionSpec(0.5, r))
            if not inside:
                continue
            yd = v[1]
            delta = b.dist_to_boundary(x)
            center_S = frame.from_frame(np.array([0.0, r]))
            delta_S = max(r - np.linalg.norm(x - center_S), 0.0)
            assert 0.75 * yd <= delta_S + 1e-12
            assert delta_S <= delta + 1e-12
            assert delta <= 2.0 * yd + 1e-12
            checked += 1
        assert checked > 100


class TestBoxDiffeo:
    def test_flat_case_is_scaling(self):
        hs = HalfSpace(2)
        _, frame = hs.nearest_boundary_point(np.array([0.0, 0.1]))
        v = np.array([1.2, 0.7])
        out = box_diffeo(hs, frame, 0.05, v)
        assert np.allclose(out, 0.05 * v, atol=1e-14)

    def test_vertical_distance_of_axis_point(self):
        b = Ball(np.zeros(2), 1.0)
        _, frame = b.nearest_boundary_point(np.array([0.9, 0.0]))
        r = 0.01
        out = box_diffeo(b, frame, r, np.array([0.0, 1.0]))
        assert frame.rho(out) == pytest.approx(r, abs=1e-12)

    def test_roundtrip(self):
        b = Ball(np.zeros(2), 1.0)
        _, frame = b.nearest_boundary_point(np.array([0.0, 0.9]))
        rng = np.random.default_rng(6)
        r = 0.007
        for _ in range(200):
            v = np.array([rng.uniform(-2.9, 2.9), rng.uniform(0.01, 2.9)])
            w = box_diffeo_inverse(b, frame, r, box_diffeo(b, frame, r, v))
            assert np.allclose(w, v, atol=1e-12)

    def test_bilipschitz_bound(self):
        g = GraphDomain.preset("paraboloid", d=2, lam=1.0)
        Q, frame = g.nearest_boundary_point(np.array([0.0, 0.02]))
        ok, worst = verify_bilipschitz(g, frame, g.R_hat / 8.0, seed=7)
        assert ok

    def test_out_of_reference_box(self):
        hs = HalfSpace(2)
        _, frame = hs.nearest_boundary_point(np.array([0.0, 0.1]))
        with pytest.raises(InvalidParameterError):
            box_diffeo(hs, frame, 0.05, np.array([3.5, 1.0]))


class TestConfig:
    def test_variants(self):
        assert isinstance(domain_from_config({"variant": "halfspace", "d": 3}), HalfSpace)
        b = domain_from_config({"variant": "ball", "d": 2, "radius": 2.0})
        assert isinstance(b, Ball) and b.radius == 2.0
        g = domain_from_config({"variant": "graph", "preset": "paraboloid", "Lambda": 1.0})
        assert isinstance(g, GraphDomain)

    def test_characteristics_constraint(self):
        b = Ball(np.zeros(2), 1.0)
        assert b.R_hat <= min(1.0, 1.0 / (2.0 * b.Lambda))
        assert b.Lambda0 <= 0.5
