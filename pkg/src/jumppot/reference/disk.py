"""Disk oracles: Dirichlet heat kernel, SKBM jump kernel, killing and Green
function on a disk (d = 2), via Bessel eigenfunction expansion.

Eigenpairs of minus the Laplacian on a disk of radius R with Dirichlet
boundary are lambda_{n,k} = (j_{n,k}/R)^2 with radial parts
J_n(j_{n,k} r / R); the heat kernel series is

  q(t,x,y) = sum_k e^{-l t} R0k(r1) R0k(r2) / (2 pi)
           + sum_{n>=1,k} e^{-l t} Rnk(r1) Rnk(r2) cos(n (th1 - th2)) / pi,

with Rnk(r) = sqrt(2) J_n(j_{n,k} r/R) / (R |J_{n+1}(j_{n,k})|) normalized in
L^2(r dr).  The series is used for t >= t0, where t0 is chosen so that an
explicit truncation-tail bound is below 1e-10.  For t < t0 the kernel is
approximated by the reflected-path image form

  (4 pi t)^{-1} [ e^{-|x-y|^2/(4t)} - e^{-rho^2/(4t)} ],

rho = min over boundary points z of |x-z| + |z-y|, which is exact for the
half-space and whose deviation from the true kernel is exponentially small in
1/t at fixed points; a two-sided bracket (tangent half-plane upper bound,
valid by convexity) is reported as the error estimate.

The time integrals defining the subordinate quantities split at t0: below t0
the image form integrates in closed form through upper incomplete gamma
functions, above t0 the eigen-series integrates termwise.
"""

from __future__ import annotations

import math
import struct
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate, optimize, special

from ..errors import (
    InvalidParameterError,
    UnsupportedDomainError,
)
from .halfspace import riesz_constant, stable_subordinator_levy_constant

__all__ = ["DiskEigendata", "DiskHeatKernel", "SkbmDiskOracle"]

_CACHE_MAGIC = b"JPEIGv1\x00"

# Consecutive zeros of any J_n are separated by at least this much (the
# minimum over the table is j_{0,2} - j_{0,1} ~ 3.115; spacing exceeds pi for
# n >= 1 and increases to pi for n = 0).
_MIN_ZERO_GAP = 3.1


def _bessel_zeros(n: int, k_max: int) -> np.ndarray:
    """First ``k_max`` positive zeros of J_n by sign-change bracketing and
    Brent root polishing."""
    zeros = []
    # J_n is positive on (0, j_{n,1}); start the scan inside that interval.
    x = 0.1 if n == 0 else float(n)
    fx = special.jv(n, x)
    step = 0.7
    while len(zeros) < k_max:
        x2 = x + step
        fx2 = special.jv(n, x2)
        if fx == 0.0:
            zeros.append(x)
            x, fx = x2, fx2
            continue
        if fx * fx2 < 0.0:
            zeros.append(optimize.brentq(lambda u: special.jv(n, u), x, x2, xtol=1e-14))
        x, fx = x2, fx2
    return np.asarray(zeros)


class DiskEigendata:
    """Bessel zero / normalization table for the Dirichlet disk.

    ``zeros[n, k-1]`` is j_{n,k}; ``jnp1[n, k-1]`` is |J_{n+1}(j_{n,k})|.
    The table is independent of the disk radius.
    """

    def __init__(self, zeros: np.ndarray, jnp1: np.ndarray):
        self.zeros = zeros
        self.jnp1 = jnp1
        self.n_max = zeros.shape[0] - 1
        self.k_max = zeros.shape[1]
        # Verified coefficient in |J_{n+1}(j_{n,k})| >= c0 sqrt(2/(pi j)):
        # the asymptotic value is 1; the minimum over the computed table is
        # used (with its own margin) by the truncation-tail bound.
        self.norm_coeff = float(
            np.min(self.jnp1 * np.sqrt(math.pi * self.zeros / 2.0))
        )

    @classmethod
    def compute(cls, n_max: int = 60, k_max: int = 60) -> "DiskEigendata":
        zeros = np.empty((n_max + 1, k_max))
        for n in range(n_max + 1):
            zeros[n] = _bessel_zeros(n, k_max)
        ns = np.arange(n_max + 1)[:, None]
        jnp1 = np.abs(special.jv(ns + 1, zeros))
        return cls(zeros, jnp1)

    def save(self, path) -> None:
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(_CACHE_MAGIC)
            fh.write(struct.pack("<II", self.n_max, self.k_max))
            rec = np.empty((self.n_max + 1, self.k_max, 4), dtype="<f8")
            rec[..., 0] = np.arange(self.n_max + 1)[:, None]
            rec[..., 1] = np.arange(1, self.k_max + 1)[None, :]
            rec[..., 2] = self.zeros
            rec[..., 3] = self.jnp1
            fh.write(rec.tobytes())

    @classmethod
    def load(cls, path) -> "DiskEigendata":
        path = Path(path)
        raw = path.read_bytes()
        if raw[: len(_CACHE_MAGIC)] != _CACHE_MAGIC:
            raise InvalidParameterError(f"{path} is not an eigendata cache")
        n_max, k_max = struct.unpack_from("<II", raw, len(_CACHE_MAGIC))
        body = np.frombuffer(
            raw, dtype="<f8", offset=len(_CACHE_MAGIC) + 8
        ).reshape(n_max + 1, k_max, 4)
        return cls(np.ascontiguousarray(body[..., 2]), np.ascontiguousarray(body[..., 3]))

    @classmethod
    def cached(cls, n_max: int = 60, k_max: int = 60, path=None) -> "DiskEigendata":
        if path is not None and Path(path).exists():
            data = cls.load(path)
            if data.n_max >= n_max and data.k_max >= k_max:
                return data
        data = cls.compute(n_max, k_max)
        if path is not None:
            data.save(path)
        return data


@lru_cache(maxsize=4)
def _default_eigendata(n_max: int, k_max: int) -> DiskEigendata:
    return DiskEigendata.compute(n_max, k_max)


class DiskHeatKernel:
    """Dirichlet heat kernel of a disk of radius R centered at ``center``."""

    def __init__(
        self,
        radius: float = 1.0,
        center=(0.0, 0.0),
        n_max: int = 60,
        k_max: int = 60,
        eigendata: DiskEigendata | None = None,
        tail_tol: float = 1e-10,
    ):
        if radius <= 0:
            raise InvalidParameterError("radius must be positive")
        self.R = float(radius)
        self.center = np.asarray(center, dtype=float)
        if self.center.shape != (2,):
            raise UnsupportedDomainError("disk heat kernel is two-dimensional")
        self.data = eigendata or _default_eigendata(n_max, k_max)
        self.lam = (self.data.zeros / self.R) ** 2
        # Angular weights: 1/(2 pi) for n = 0, 1/pi otherwise.
        self._ang = np.full(self.data.n_max + 1, 1.0 / math.pi)
        self._ang[0] = 0.5 / math.pi
        self._inv_norm2 = 2.0 / (self.R ** 2 * self.data.jnp1 ** 2)
        self.tail_tol = tail_tol
        self.t0 = self._solve_crossover(tail_tol)

    # -- truncation tail ----------------------------------------------------

    def series_tail_bound(self, t: float) -> float:
        """Upper bound on the magnitude of all omitted series terms at time t.

        Every term satisfies |term| <= e^{-j^2 t / R^2} j / (R^2 c0^2) using
        |J_n| <= 1, the angular weight <= 1/pi, and the verified coefficient
        c0 in |J_{n+1}(j_{n,k})| >= c0 sqrt(2/(pi j)).  Omitted radial zeros
        (k > k_max) start at a_n = j_{n,k_max} with spacing >= 3.1; integral
        comparison gives sum_{k > k_max} <= R^2 e^{-a_n^2 t/R^2} / (2 g t).
        Omitted angular orders (n > n_max) use j_{n,1} > n and
        j_{n,1} <= 2n + 4, summed explicitly over 2000 orders with an
        integral remainder.  A safety factor 4 is applied.
        """
        R2 = self.R ** 2
        c0 = 0.9 * self.data.norm_coeff
        g = _MIN_ZERO_GAP
        a = self.data.zeros[:, -1]
        radial = float(np.sum(np.exp(-(a ** 2) * t / R2))) / (2.0 * g * t * c0 ** 2)
        N = self.data.n_max
        ns = np.arange(N + 1, N + 2001, dtype=float)
        per_n = np.exp(-(ns ** 2) * t / R2) * (2.0 * ns + 4.0 + R2 / (2.0 * g * t))
        ang = float(np.sum(per_n)) / (R2 * c0 ** 2)
        M = N + 2001.0
        rem = math.exp(-(M ** 2) * t / R2) * (
            R2 / t + (4.0 + R2 / (2.0 * g * t)) / -math.expm1(-2.0 * M * t / R2)
        ) / (R2 * c0 ** 2)
        return 4.0 * (radial + ang + rem)

    def _solve_crossover(self, tol: float) -> float:
        lo, hi = 1e-6 * self.R ** 2, 10.0 * self.R ** 2
        if self.series_tail_bound(hi) > tol:
            raise InvalidParameterError("eigendata table too small for tail tolerance")
        if self.series_tail_bound(lo) <= tol:
            return lo
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if self.series_tail_bound(mid) > tol:
                lo = mid
            else:
                hi = mid
            if hi / lo < 1.0 + 1e-6:
                break
        return hi

    # -- coordinate helpers ---------------------------------------------------

    def _polar(self, x):
        v = np.asarray(x, dtype=float) - self.center
        return float(np.hypot(v[0], v[1])), float(np.arctan2(v[1], v[0]))

    def contains(self, x) -> bool:
        r, _ = self._polar(x)
        return r < self.R

    def boundary_distance(self, x) -> float:
        r, _ = self._polar(x)
        return max(self.R - r, 0.0)

    # -- mode-sum machinery ----------------------------------------------------

    def _mode_products(self, x, y):
        """phi-phi products per (n, k) including angular weight, so that
        q(t,x,y) = sum_{n,k} coeff_{n,k} exp(-lam_{n,k} t)."""
        r1, th1 = self._polar(x)
        r2, th2 = self._polar(y)
        ns = np.arange(self.data.n_max + 1)[:, None]
        j1 = special.jv(ns, self.data.zeros * (r1 / self.R))
        j2 = special.jv(ns, self.data.zeros * (r2 / self.R))
        cosn = np.cos(np.arange(self.data.n_max + 1) * (th1 - th2))[:, None]
        return self._inv_norm2 * j1 * j2 * cosn * self._ang[:, None]

    def series(self, t: float, x, y) -> float:
        coeff = self._mode_products(x, y)
        return float(np.sum(coeff * np.exp(-self.lam * t)))

    # -- image (small-time) form -----------------------------------------------

    def reflected_distance(self, x, y) -> float:
        """Minimal length of a path x -> boundary -> y."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        mid = 0.5 * (x + y) - self.center
        phi0 = math.atan2(mid[1], mid[0]) if np.any(mid != 0.0) else 0.0

        def path_len(phi):
            z = self.center + self.R * np.array([math.cos(phi), math.sin(phi)])
            return float(np.linalg.norm(x - z) + np.linalg.norm(z - y))

        res = optimize.minimize_scalar(
            path_len,
            bounds=(phi0 - math.pi, phi0 + math.pi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return float(res.fun)

    def image(self, t: float, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = float(np.dot(x - y, x - y))
        rho = self.reflected_distance(x, y)
        pref = 1.0 / (4.0 * math.pi * t)
        return pref * (math.exp(-r2 / (4.0 * t)) - math.exp(-rho * rho / (4.0 * t)))

    def _tangent_halfplane_upper(self, t: float, x, y) -> float:
        """min over the tangent half-planes at the feet of x and y of the
        half-plane kernel; an upper bound for q by convexity."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = float(np.dot(x - y, x - y))
        best = math.inf
        for base in (x, y):
            v = base - self.center
            nv = np.linalg.norm(v)
            if nv == 0.0:
                continue
            n_in = -v / nv
            Q = self.center + self.R * (v / nv)
            dx = float(np.dot(x - Q, n_in))
            dy = float(np.dot(y - Q, n_in))
            val = (
                1.0
                / (4.0 * math.pi * t)
                * math.exp(-r2 / (4.0 * t))
                * (-math.expm1(-dx * dy / t))
            )
            best = min(best, val)
        return best

    def heat_kernel(self, t: float, x, y) -> float:
        if t <= 0:
            raise InvalidParameterError("t must be positive")
        if not (self.contains(x) and self.contains(y)):
            return 0.0
        if t >= self.t0:
            return self.series(t, x, y)
        return self.image(t, x, y)

    def heat_kernel_with_error(self, t: float, x, y) -> tuple[float, float]:
        if t >= self.t0:
            return self.series(t, x, y), self.series_tail_bound(t)
        val = self.image(t, x, y)
        upper = self._tangent_halfplane_upper(t, x, y)
        return val, max(upper - val, 0.0)

    __call__ = heat_kernel


def _upper_gamma(a: float, z) -> np.ndarray:
    """Unnormalized upper incomplete gamma Gamma(a, z) for a > -1, a != 0,
    vectorized in z.  Negative orders use the recurrence
    Gamma(a, z) = (Gamma(a+1, z) - z^a e^{-z}) / a."""
    z = np.asarray(z, dtype=float)
    if a > 0:
        return special.gammaincc(a, z) * math.gamma(a)
    up1 = special.gammaincc(a + 1.0, z) * math.gamma(a + 1.0)
    return (up1 - z ** a * np.exp(-z)) / a


class SkbmDiskOracle:
    """Subordinate killed Brownian motion on a disk (d = 2).

    Hybrid evaluation: the defining t-integrals split at the heat kernel's
    series crossover t0; below t0 the image form integrates in closed form,
    above t0 the eigen-series integrates termwise through incomplete gamma
    tails.
    """

    def __init__(self, beta: float, heat: DiskHeatKernel | None = None, **kw):
        if not (0.0 < beta < 1.0):
            raise InvalidParameterError("beta must be in (0, 1)")
        self.beta = beta
        self.alpha = 2.0 * beta
        self.heat = heat or DiskHeatKernel(**kw)
        self.d = 2
        self.c_beta = stable_subordinator_levy_constant(beta)
        self.c_jump = riesz_constant(2, -self.alpha)

    # Closed small-t pieces: substituting w = a/t,
    #   int_0^t0 (4 pi t)^{-1} e^{-a/t} t^{-1-b} dt
    #     = (4 pi)^{-1} a^{-1-b} Gamma(1 + b, a/t0),
    #   int_0^t0 (4 pi t)^{-1} e^{-a/t} t^{b-1}  dt
    #     = (4 pi)^{-1} a^{b-1}  Gamma(1 - b, a/t0).

    def _small_t_image_integral(self, r2: float, rho2: float, weight_exp: float) -> float:
        """int_0^t0 image-kernel(t) * t^weight_exp dt
        = (4 pi)^{-1} [a1^w Gamma(-w, a1/t0) - a2^w Gamma(-w, a2/t0)],
        a1 = r^2/4, a2 = rho^2/4, w = weight_exp."""
        t0 = self.heat.t0
        order = -weight_exp

        def piece(a):
            return a ** weight_exp * float(_upper_gamma(order, a / t0))

        return (piece(r2 / 4.0) - piece(rho2 / 4.0)) / (4.0 * math.pi)

    def jump_kernel(self, x, y) -> float:
        """J(x,y) = c_beta Integral_0^inf q(t,x,y) t^{-1-beta} dt."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = float(np.dot(x - y, x - y))
        if r2 == 0.0:
            raise InvalidParameterError("jump kernel is singular on the diagonal")
        rho = self.heat.reflected_distance(x, y)
        small = self._small_t_image_integral(r2, rho * rho, -1.0 - self.beta)
        coeff = self.heat._mode_products(x, y)
        lam = self.heat.lam
        tails = lam ** self.beta * _upper_gamma(-self.beta, lam * self.heat.t0)
        large = float(np.sum(coeff * tails))
        return self.c_beta * (small + large)

    def green(self, x, y) -> float:
        """G(x,y) = Integral_0^inf q(s,x,y) s^{beta-1} / Gamma(beta) ds."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = float(np.dot(x - y, x - y))
        if r2 == 0.0:
            raise InvalidParameterError("Green function is singular on the diagonal")
        rho = self.heat.reflected_distance(x, y)
        t0 = self.heat.t0
        b = self.beta
        small = self._small_t_image_integral(r2, rho * rho, b - 1.0)
        coeff = self.heat._mode_products(x, y)
        lam = self.heat.lam
        tails = lam ** (-b) * special.gammaincc(b, lam * t0) * math.gamma(b)
        large = float(np.sum(coeff * tails))
        return (small + large) / math.gamma(b)

    def green_spectral(self, x, y, damp_t: float = 0.0) -> float:
        """Plain spectral sum sum lam^{-beta} phi phi (slowly convergent;
        cross-check only).  ``damp_t`` > 0 damps by exp(-lam damp_t)."""
        coeff = self.heat._mode_products(x, y)
        lam = self.heat.lam
        return float(np.sum(coeff * lam ** (-self.beta) * np.exp(-lam * damp_t)))

    # -- killing ---------------------------------------------------------------

    def _survival_series_coeffs(self):
        """Radial survival series: P(t, x) = sum_k c_k R_{0,k}(|x|) e^{-lam t},
        with c_k = sqrt(2) R sign(J_1(j_{0,k})) / j_{0,k}."""
        j0 = self.heat.data.zeros[0]
        sgn = np.sign(special.jv(1, j0))
        return math.sqrt(2.0) * self.heat.R * sgn / j0

    def survival(self, t: float, x) -> float:
        r, _ = self.heat._polar(x)
        if t < self.heat.t0:
            # tangent half-plane approximation near the boundary
            return math.erf(self.heat.boundary_distance(x) / (2.0 * math.sqrt(t)))
        j0 = self.heat.data.zeros[0]
        rad = special.jv(0, j0 * (r / self.heat.R)) * math.sqrt(2.0) / (
            self.heat.R * self.heat.data.jnp1[0]
        )
        lam0 = self.heat.lam[0]
        return float(np.sum(self._survival_series_coeffs() * rad * np.exp(-lam0 * t)))

    def kappa(self, x) -> float:
        """c_beta Integral (1 - P(t,x)) t^{-1-beta} dt; the small-t survival
        uses the tangent half-plane approximation, adequate away from the
        crossover scale (sampled property checks only)."""
        t0 = self.heat.t0
        b = self.beta
        delta = self.heat.boundary_distance(x)
        val_small, _ = integrate.quad(
            lambda t: math.erfc(delta / (2.0 * math.sqrt(t))) * t ** (-1.0 - b),
            0.0,
            t0,
            epsrel=1e-9,
            limit=300,
        )
        r, _ = self.heat._polar(x)
        j0 = self.heat.data.zeros[0]
        rad = special.jv(0, j0 * (r / self.heat.R)) * math.sqrt(2.0) / (
            self.heat.R * self.heat.data.jnp1[0]
        )
        lam0 = self.heat.lam[0]
        ck = self._survival_series_coeffs() * rad
        tail_const = t0 ** (-b) / b
        tail_surv = float(np.sum(ck * lam0 ** b * _upper_gamma(-b, lam0 * t0)))
        return self.c_beta * (val_small + tail_const - tail_surv)
