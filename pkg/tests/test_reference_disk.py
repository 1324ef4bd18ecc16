import math

import numpy as np
import pytest
from scipy import integrate, optimize, special

from jumppot.errors import InvalidParameterError
from jumppot.geometry import Ball
from jumppot.kernels import b5_residual, skbm_profile
from jumppot.reference import riesz_constant
from jumppot.reference.disk import DiskEigendata, DiskHeatKernel, SkbmDiskOracle


class TestEigendata:
    def test_first_zero_against_root_finder(self, disk_eigendata):
        # independent oracle: bracketed root of J0 via brentq
        target = optimize.brentq(special.j0, 2.0, 3.0, xtol=1e-14)
        assert disk_eigendata.zeros[0, 0] == pytest.approx(target, abs=1e-12)
        assert disk_eigendata.zeros[0, 0] == pytest.approx(2.404825557695773, abs=1e-12)

    def test_against_scipy_tables(self, disk_eigendata):
        for n in (0, 7, 33, 60):
            ref = special.jn_zeros(n, 60)
            assert np.allclose(disk_eigendata.zeros[n], ref, atol=1e-10)

    def test_zeros_really_are_zeros(self, disk_eigendata):
        ns = np.arange(61)[:, None]
        vals = special.jv(ns, disk_eigendata.zeros)
        assert np.max(np.abs(vals)) < 1e-11

    def test_cache_roundtrip(self, disk_eigendata, tmp_path):
        path = tmp_path / "eigen.bin"
        disk_eigendata.save(path)
        loaded = DiskEigendata.load(path)
        assert np.array_equal(loaded.zeros, disk_eigendata.zeros)
        assert np.array_equal(loaded.jnp1, disk_eigendata.jnp1)
        # byte-identical on re-save
        loaded.save(tmp_path / "eigen2.bin")
        assert (tmp_path / "eigen.bin").read_bytes() == (
            tmp_path / "eigen2.bin"
        ).read_bytes()

    def test_cached_constructor(self, tmp_path):
        path = tmp_path / "cache.bin"
        d1 = DiskEigendata.cached(10, 10, path)
        assert path.exists()
        d2 = DiskEigendata.cached(10, 10, path)
        assert np.array_equal(d1.zeros, d2.zeros)

    def test_bad_cache_rejected(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"not an eigendata cache")
        with pytest.raises(InvalidParameterError):
            DiskEigendata.load(p)


class TestDiskHeatKernel:
    def test_symmetry(self, disk_heat, rng):
        for _ in range(30):
            x = rng.uniform(-0.6, 0.6, 2)
            y = rng.uniform(-0.6, 0.6, 2)
            t = rng.uniform(0.02, 1.0)
            assert disk_heat.heat_kernel(t, x, y) == pytest.approx(
                disk_heat.heat_kernel(t, y, x), abs=1e-10
            )

    def test_dominated_by_whole_space(self, disk_heat, rng):
        for _ in range(60):
            x = rng.uniform(-0.9, 0.9, 2)
            y = rng.uniform(-0.9, 0.9, 2)
            if not (disk_heat.contains(x) and disk_heat.contains(y)):
                continue
            t = rng.uniform(1e-4, 2.0)
            q = disk_heat.heat_kernel(t, x, y)
            gauss = math.exp(-float(np.dot(x - y, x - y)) / (4 * t)) / (
                4 * math.pi * t
            )
            assert -1e-12 <= q <= gauss + 1e-10

    def test_principal_eigenvalue(self, disk_heat, disk_eigendata):
        x = np.array([0.2, 0.1])
        t1, t2 = 2.0, 2.25
        lam = -(
            math.log(disk_heat.series(t2, x, x)) - math.log(disk_heat.series(t1, x, x))
        ) / (t2 - t1)
        assert lam == pytest.approx(disk_eigendata.zeros[0, 0] ** 2, rel=1e-6)

    def test_chapman_kolmogorov(self, disk_heat):
        # coarse polar-grid composition: int q(s,x,z) q(t,z,y) dz = q(s+t,x,y)
        x = np.array([0.3, 0.0])
        y = np.array([-0.2, 0.25])
        s, t = 0.15, 0.3
        n_r, n_th = 60, 80
        rs = (np.arange(n_r) + 0.5) / n_r
        ths = (np.arange(n_th) + 0.5) * 2 * math.pi / n_th
        acc = 0.0
        for r in rs:
            for th in ths:
                z = np.array([r * math.cos(th), r * math.sin(th)])
                acc += (
                    disk_heat.series(s, x, z)
                    * disk_heat.series(t, z, y)
                    * r
                )
        acc *= (1.0 / n_r) * (2 * math.pi / n_th)
        assert acc == pytest.approx(disk_heat.series(s + t, x, y), abs=1e-4)

    def test_tail_bound_certificate(self, disk_heat):
        assert disk_heat.series_tail_bound(disk_heat.t0) <= 1e-10
        # truncating the last radial shell moves the value by less than the bound
        t = 1.5 * disk_heat.t0
        x = np.array([0.1, -0.6])
        y = np.array([0.15, -0.55])
        full = disk_heat.series(t, x, y)
        coeff = disk_heat._mode_products(x, y)
        coeff_trunc = coeff.copy()
        coeff_trunc[:, -5:] = 0.0
        trunc = float(np.sum(coeff_trunc * np.exp(-disk_heat.lam * t)))
        assert abs(full - trunc) <= disk_heat.series_tail_bound(t) + 1e-15

    def test_image_error_estimate_brackets(self, disk_heat):
        x = np.array([0.0, -0.9])
        y = np.array([0.05, -0.87])
        t = 0.5 * disk_heat.t0
        val, err = disk_heat.heat_kernel_with_error(t, x, y)
        assert val > 0 and err >= 0

    def test_reflected_distance_halfspace_limit(self, disk_heat):
        # for points very close to the boundary the reflected distance is
        # near the flat-mirror value
        x = np.array([0.0, -1.0 + 0.01])
        y = np.array([0.004, -1.0 + 0.012])
        rho = disk_heat.reflected_distance(x, y)
        flat = math.hypot(0.004, 0.022)
        assert rho == pytest.approx(flat, rel=1e-3)


class TestSkbmDisk:
    def test_jump_symmetry(self, disk_skbm, rng):
        for _ in range(20):
            x = rng.uniform(-0.6, 0.6, 2)
            y = rng.uniform(-0.6, 0.6, 2)
            if np.linalg.norm(x - y) < 0.02:
                continue
            assert disk_skbm.jump_kernel(x, y) == pytest.approx(
                disk_skbm.jump_kernel(y, x), rel=1e-10
            )

    def test_jump_hybrid_vs_direct_time_quadrature(self, disk_skbm):
        # dual route: scipy quad of q(t) t^{-1-b} against the incomplete
        # gamma hybrid
        x = np.array([0.2, -0.5])
        y = np.array([0.35, -0.4])
        hk = disk_skbm.heat

        def integrand(t):
            return hk.heat_kernel(t, x, y) * t ** (-1.5)

        r2 = float(np.dot(x - y, x - y))
        v0, _ = integrate.quad(
            lambda w: integrand(r2 / (4.0 * w)) * r2 / (4.0 * w * w),
            1e-8,
            r2 / (4.0 * 1e-6),
            epsrel=1e-9,
            limit=400,
        )
        # w = r^2/(4t): t from 1e-6-ish upward handled; add the large-t rest
        v1, _ = integrate.quad(integrand, 1e-6, np.inf, epsrel=1e-9, limit=400)
        direct = disk_skbm.c_beta * v1
        assert disk_skbm.jump_kernel(x, y) == pytest.approx(direct, rel=1e-5)

    def test_jump_approaches_halfspace_near_boundary(self, disk_skbm):
        # B-scale comparison against the half-space closed form in the
        # bottom frame; agreement improves as the scale shrinks
        from jumppot.reference import SkbmHalfspaceOracle

        hs = SkbmHalfspaceOracle(2, 0.5)
        devs = []
        for s in (0.02, 0.01, 0.005):
            x = np.array([0.0, -1.0 + 0.4 * s])
            y = np.array([0.15 * s, -1.0 + 0.45 * s])
            vx = np.array([0.0, 0.4 * s])
            vy = np.array([0.15 * s, 0.45 * s])
            r3 = np.linalg.norm(x - y) ** 3
            devs.append(abs(r3 * disk_skbm.jump_kernel(x, y) - r3 * hs.jump_kernel(vx, vy)))
        assert devs[2] < devs[0]

    def test_green_symmetry_and_positivity(self, disk_skbm, rng):
        for _ in range(15):
            x = rng.uniform(-0.6, 0.6, 2)
            y = rng.uniform(-0.6, 0.6, 2)
            if np.linalg.norm(x - y) < 0.05:
                continue
            g = disk_skbm.green(x, y)
            assert g > 0
            assert g == pytest.approx(disk_skbm.green(y, x), rel=1e-10)

    def test_green_hybrid_vs_direct_time_quadrature(self, disk_skbm):
        x = np.array([0.1, 0.2])
        y = np.array([-0.3, 0.1])
        hk = disk_skbm.heat

        def integrand(s):
            return hk.heat_kernel(s, x, y) * s ** (-0.5)

        val, _ = integrate.quad(integrand, 1e-9, np.inf, epsrel=1e-9, limit=400)
        direct = val / math.gamma(0.5)
        assert disk_skbm.green(x, y) == pytest.approx(direct, rel=1e-5)

    def test_green_spectral_consistency(self, disk_skbm):
        # damped spectral sum agrees with the hybrid up to the damping window
        x = np.array([0.4, 0.0])
        y = np.array([-0.4, 0.1])
        plain = disk_skbm.green_spectral(x, y, damp_t=0.0)
        assert plain == pytest.approx(disk_skbm.green(x, y), rel=5e-2)

    def test_kappa_critical_rate(self, disk_skbm):
        # kappa(x) * delta^alpha approaches the half-space constant near the
        # boundary (K3 with C9 B(x,x) = c1)
        from jumppot.reference import SkbmHalfspaceOracle

        c1 = SkbmHalfspaceOracle(2, 0.5).kappa_constant
        vals = []
        for dl in (0.02, 0.01, 0.005):
            x = np.array([0.0, -(1.0 - dl)])
            vals.append(disk_skbm.kappa(x) * dl ** disk_skbm.alpha)
        assert vals[-1] == pytest.approx(c1, rel=0.1)
        assert abs(vals[2] - c1) <= abs(vals[0] - c1) + 1e-12

    def test_diagonal_singularity_rejected(self, disk_skbm):
        with pytest.raises(InvalidParameterError):
            disk_skbm.jump_kernel(np.array([0.1, 0.1]), np.array([0.1, 0.1]))


class TestB5OnDisk:
    def test_residual_strictly_decreasing(self, disk_skbm):
        domain = Ball(np.zeros(2), 1.0)
        frame = domain.frame_at(np.array([0.0, -1.0]), np.array([0.0, 1.0]))
        prof = skbm_profile(2, 0.5)
        diag = riesz_constant(2, -1.0)
        R_reg = domain.R_hat / 8.0
        residuals = []
        for f in (0.5, 0.25, 0.125):
            s = R_reg * f
            x = frame.from_frame(np.array([0.0, 0.4 * s]))
            y = frame.from_frame(np.array([0.15 * s, 0.45 * s]))
            residuals.append(
                b5_residual(
                    disk_skbm.jump_kernel, diag, prof, domain, frame, x, y, 1.0
                )
            )
        assert residuals[0] > residuals[1] > residuals[2] > 0
