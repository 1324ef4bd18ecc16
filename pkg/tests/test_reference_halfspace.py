import math

import numpy as np
import pytest
from scipy import integrate

from jumppot.errors import InvalidParameterError, UnsupportedDomainError
from jumppot.montecarlo import RngStream
from jumppot.reference import (
    HalfSpaceHeatKernel,
    SkbmHalfspaceOracle,
    green_envelope,
    heat_kernel_envelope_check,
    riesz_constant,
    stable_subordinator_levy_constant,
    subordinator_density_half,
    survival_halfspace,
)
from jumppot.geometry import HalfSpace
from jumppot.montecarlo import power_slope_fit
from jumppot.profiles import constant_profile, preset_gamma_beta


class TestConstants:
    def test_riesz_constant_d2_alpha1(self):
        assert riesz_constant(2, -1.0) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)

    def test_levy_constant_half(self):
        assert stable_subordinator_levy_constant(0.5) == pytest.approx(
            0.5 / math.gamma(0.5), rel=1e-14
        )


class TestHeatKernel:
    def test_diagonal_formula(self):
        hk = HalfSpaceHeatKernel(3)
        t, h = 0.2, 0.7
        x = np.array([0.1, -0.4, h])
        target = (4 * math.pi * t) ** -1.5 * (1.0 - math.exp(-h * h / t))
        assert hk(t, x, x) == pytest.approx(target, rel=1e-14)

    def test_locality_deep_inside(self):
        hk = HalfSpaceHeatKernel(2)
        x = np.array([0.0, 5.0])
        y = np.array([0.3, 5.2])
        for t in (1e-2, 1e-3):
            whole = (4 * math.pi * t) ** -1.0 * math.exp(
                -np.dot(x - y, x - y) / (4 * t)
            )
            assert hk(t, x, y) / whole == pytest.approx(1.0, abs=1e-6)

    def test_vanishes_outside(self):
        hk = HalfSpaceHeatKernel(2)
        assert hk(0.1, np.array([0.0, -0.5]), np.array([0.0, 1.0])) == 0.0


class TestSurvival:
    def test_erf_value_against_monte_carlo(self):
        # oracle: running minimum of a variance-2t Brownian path
        t, h = 0.25, 1.0
        rng = RngStream(123).generator()
        n, steps = 200000, 64
        dt = t / steps
        pos = np.full(n, h)
        alive = np.ones(n, dtype=bool)
        for _ in range(steps):
            idx = np.flatnonzero(alive)
            nxt = pos[idx] + math.sqrt(2 * dt) * rng.standard_normal(idx.size)
            dead = nxt <= 0
            cross = rng.uniform(size=idx.size) < np.exp(
                -np.maximum(pos[idx] * nxt, 0.0) / dt
            )
            alive[idx[dead | cross]] = False
            pos[idx] = nxt
        emp = alive.mean()
        se = math.sqrt(emp * (1 - emp) / n)
        assert survival_halfspace(t, h) == pytest.approx(math.erf(1.0), rel=1e-12)
        assert abs(emp - survival_halfspace(t, h)) < 3 * se + 1e-3

    def test_limits(self):
        assert survival_halfspace(1e-12, 1.0) == pytest.approx(1.0)
        assert survival_halfspace(1.0, 1e-9) == pytest.approx(0.0, abs=1e-8)


class TestJumpKernel:
    def test_concrete_value(self):
        o = SkbmHalfspaceOracle(2, 0.5)
        val = o.jump_kernel(np.array([0.0, 1.0]), np.array([0.0, 2.0]))
        assert val == pytest.approx((1.0 / (2 * math.pi)) * 26.0 / 27.0, rel=1e-14)

    @pytest.mark.parametrize("d,beta", [(2, 0.5), (3, 0.5), (2, 0.3), (4, 0.7)])
    def test_closed_form_vs_quadrature(self, d, beta, rng):
        o = SkbmHalfspaceOracle(d, beta)
        for _ in range(5):
            x = np.append(rng.uniform(-1, 1, d - 1), rng.uniform(0.1, 2))
            y = np.append(rng.uniform(-1, 1, d - 1), rng.uniform(0.1, 2))
            if np.linalg.norm(x - y) < 0.05:
                y[-1] += 1.0
            assert o.jump_kernel(x, y) == pytest.approx(
                o.jump_kernel_quadrature(x, y), rel=1e-8
            )

    def test_diagonal_limit(self):
        o = SkbmHalfspaceOracle(2, 0.5)
        x = np.array([0.0, 1.0])
        for eps in (1e-2, 1e-4):
            y = x + np.array([eps, 0.0])
            scaled = np.linalg.norm(x - y) ** 3 * o.jump_kernel(x, y)
            assert scaled == pytest.approx(riesz_constant(2, -1.0), rel=1e-5)

    def test_symmetry(self, rng):
        o = SkbmHalfspaceOracle(3, 0.4)
        for _ in range(50):
            x = np.append(rng.uniform(-1, 1, 2), rng.uniform(0.05, 2))
            y = np.append(rng.uniform(-1, 1, 2), rng.uniform(0.05, 2))
            assert o.jump_kernel(x, y) == pytest.approx(o.jump_kernel(y, x), rel=1e-12)


class TestKappa:
    def test_value_two_over_pi(self):
        o = SkbmHalfspaceOracle(2, 0.5)
        assert o.kappa(np.array([0.0, 1.0])) == pytest.approx(2.0 / math.pi, abs=1e-9)

    def test_closed_gamma_form(self):
        # independent closed form 4^b Gamma(b + 1/2) / (Gamma(1-b) sqrt(pi))
        for beta in (0.3, 0.5, 0.7):
            o = SkbmHalfspaceOracle(2, beta)
            closed = (
                4.0 ** beta
                * math.gamma(beta + 0.5)
                / (math.gamma(1.0 - beta) * math.sqrt(math.pi))
            )
            assert o.kappa_constant == pytest.approx(closed, rel=1e-11)

    def test_scaling(self):
        o = SkbmHalfspaceOracle(2, 0.5)
        k1 = o.kappa(np.array([0.0, 1.0]))
        k2 = o.kappa(np.array([0.0, 2.0]))
        assert k2 == pytest.approx(k1 * 2.0 ** -1.0, rel=1e-12)

    def test_positive(self):
        for beta in (0.2, 0.8):
            o = SkbmHalfspaceOracle(3, beta)
            assert o.kappa(np.array([0.0, 0.0, 0.3])) > 0.0


class TestGreen:
    def test_specific_value(self):
        o = SkbmHalfspaceOracle(2, 0.5)
        val = o.green(np.array([0.0, 1.0]), np.array([0.0, 2.0]))
        assert val == pytest.approx(1.0 / (3.0 * math.pi), abs=1e-12)

    def test_symmetry(self, rng):
        o = SkbmHalfspaceOracle(2, 0.5)
        for _ in range(20):
            x = np.append(rng.uniform(-1, 1, 1), rng.uniform(0.05, 2))
            y = np.append(rng.uniform(-1, 1, 1), rng.uniform(0.05, 2))
            if np.linalg.norm(x - y) < 1e-6:
                continue
            assert o.green(x, y) == pytest.approx(o.green(y, x), rel=1e-13)

    def test_boundary_decay_slope(self):
        o = SkbmHalfspaceOracle(2, 0.5)
        y0 = np.array([0.0, 1.0])
        pts = []
        for dl in (0.01, 0.02, 0.04, 0.08):
            pts.append((dl, o.green(np.array([0.3, dl]), y0), 1.0))
        slope, _, _ = power_slope_fit(pts)
        assert abs(slope - 1.0) < 0.05

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDomainError):
            SkbmHalfspaceOracle(5, 0.5)

    def test_d_le_alpha_rejected(self):
        o = SkbmHalfspaceOracle(2, 0.999)
        with pytest.raises(InvalidParameterError):
            o.green(np.array([0.0, 1.0]), np.array([0.0, 1.0]))


class TestSubordinatorDensity:
    def test_density_normalizes(self):
        val, _ = integrate.quad(lambda s: float(subordinator_density_half(1.3, s)), 0, np.inf)
        assert val == pytest.approx(1.0, rel=1e-9)

    def test_laplace_transform(self):
        t, lam = 0.7, 2.0
        val, _ = integrate.quad(
            lambda s: math.exp(-lam * s) * float(subordinator_density_half(t, s)),
            0,
            np.inf,
        )
        assert val == pytest.approx(math.exp(-t * math.sqrt(lam)), rel=1e-9)

    def test_survival_probability_consistency(self):
        o = SkbmHalfspaceOracle(2, 0.5)
        t, x = 0.5, np.array([0.0, 1.0])
        target, _ = integrate.quad(
            lambda s: survival_halfspace(s, 1.0) * float(subordinator_density_half(t, s)),
            0,
            np.inf,
        )
        assert o.survival_probability(t, x) == pytest.approx(target, rel=1e-8)


class TestEnvelopes:
    def test_green_envelope_trivial_clamps(self):
        one = constant_profile()
        hs = HalfSpace(2)
        x = np.array([0.0, 1.0])
        y = np.array([1.0, 1.0])
        val = green_envelope(x, y, 1.0, 1.0, one, one, hs)
        assert val == pytest.approx(math.log(2.0) / 1.0, rel=1e-9)

    def test_green_envelope_deep_interior(self):
        one = constant_profile()
        hs = HalfSpace(2)
        x = np.array([0.0, 50.0])
        y = np.array([0.5, 50.0])
        val = green_envelope(x, y, 1.0, 1.0, one, one, hs)
        assert val == pytest.approx(math.log(2.0) / 0.5, rel=1e-9)

    def test_green_envelope_symmetric(self, rng):
        triple, _ = preset_gamma_beta(2.0, 0.5)
        hs = HalfSpace(2)
        for _ in range(20):
            x = np.append(rng.uniform(-1, 1, 1), rng.uniform(0.05, 2))
            y = np.append(rng.uniform(-1, 1, 1), rng.uniform(0.05, 2))
            if np.linalg.norm(x - y) < 1e-6:
                continue
            a = green_envelope(x, y, 1.0, 1.0, triple.phi1, triple.phi2, hs)
            b = green_envelope(y, x, 1.0, 1.0, triple.phi1, triple.phi2, hs)
            assert a == pytest.approx(b, rel=1e-10)

    def test_heat_kernel_envelope_bounded(self, rng):
        hk = HalfSpaceHeatKernel(2)
        samples = []
        for _ in range(30):
            x = np.append(rng.uniform(-1, 1, 1), rng.uniform(0.05, 1.5))
            y = np.append(rng.uniform(-1, 1, 1), rng.uniform(0.05, 1.5))
            samples.append((rng.uniform(0.01, 1.0), x, y))
        sup, ratios = heat_kernel_envelope_check(hk, samples)
        assert np.isfinite(sup)
        assert sup < 5.0

    def test_heat_kernel_envelope_diagonal(self):
        hk = HalfSpaceHeatKernel(2)
        x = np.array([0.0, 0.5])
        sup, _ = heat_kernel_envelope_check(hk, [(t, x, x) for t in (0.01, 0.1, 0.5)])
        assert sup < 1.0 + 1e-9
