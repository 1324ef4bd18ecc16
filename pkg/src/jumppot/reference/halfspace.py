"""Half-space oracles for subordinate killed Brownian motion.

Conventions.  The Brownian motion has generator the full Laplacian (no 1/2),
so the whole-space heat kernel is (4 pi t)^{-d/2} exp(-|x-y|^2/(4t)) and the
half-space kernel follows by reflection.  The time change is an independent
beta-stable subordinator with Laplace exponent lambda^beta and Levy density
c_beta t^{-1-beta}, c_beta = beta / Gamma(1 - beta).  The subordinate process
has order alpha = 2 beta.

Closed forms used here (each is validated against its defining t- or
s-quadrature in the tests):

  jump kernel   J(x, y) = c_{d,-alpha} (|x-y|^{-d-a} - |x-ybar|^{-d-a}),
  killing       kappa(x) = c1 x_d^{-alpha},  c1 = c_beta Integral_0^inf
                erfc(1/(2 sqrt t)) t^{-1-beta} dt,
  Green (d>a)   G(x, y) = A (|x-y|^{a-d} - |x-ybar|^{a-d}),
                A = 4^{-beta} pi^{-d/2} Gamma(d/2 - beta) / Gamma(beta),

with ybar the reflection of y across the boundary hyperplane.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from ..errors import (
    InvalidParameterError,
    QuadratureFailureError,
    UnsupportedDomainError,
)

__all__ = [
    "HalfSpaceHeatKernel",
    "SkbmHalfspaceOracle",
    "riesz_constant",
    "stable_subordinator_levy_constant",
    "subordinator_density_half",
    "survival_halfspace",
]


def riesz_constant(d: int, exponent: float) -> float:
    """c_{d,b} = 2^{-b} pi^{-d/2} Gamma((d-b)/2) / |Gamma(b/2)|.

    The jump kernel of the isotropic alpha-stable process is
    c_{d,-alpha} |x-y|^{-d-alpha} (pass exponent = -alpha).
    """
    b = exponent
    return (
        2.0 ** (-b)
        * math.pi ** (-d / 2.0)
        * math.gamma((d - b) / 2.0)
        / abs(math.gamma(b / 2.0))
    )


def stable_subordinator_levy_constant(beta: float) -> float:
    """c_beta = beta / Gamma(1 - beta), the Levy density constant of the
    beta-stable subordinator."""
    if not (0.0 < beta < 1.0):
        raise InvalidParameterError("beta must be in (0, 1)")
    return beta / math.gamma(1.0 - beta)


def survival_halfspace(t: float, h: float) -> float:
    """P(Brownian motion with generator Laplacian started at height h stays
    positive up to time t) = erf(h / (2 sqrt t))."""
    if t <= 0 or h <= 0:
        raise InvalidParameterError("t and h must be positive")
    return math.erf(h / (2.0 * math.sqrt(t)))


def subordinator_density_half(t: float, s) -> np.ndarray:
    """Density of T_t for the 1/2-stable subordinator (Laplace exponent
    sqrt(lambda)): t / (2 sqrt(pi) s^{3/2}) * exp(-t^2 / (4 s))."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    sp = s[pos]
    out[pos] = t / (2.0 * math.sqrt(math.pi) * sp ** 1.5) * np.exp(
        -(t * t) / (4.0 * sp)
    )
    return out


class HalfSpaceHeatKernel:
    """Dirichlet heat kernel of the half-space by reflection."""

    def __init__(self, d: int = 2):
        if d < 2:
            raise InvalidParameterError("dimension must be >= 2")
        self.d = d

    def __call__(self, t: float, x, y) -> float:
        if t <= 0:
            raise InvalidParameterError("t must be positive")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x[-1] <= 0 or y[-1] <= 0:
            return 0.0
        ybar = y.copy()
        ybar[-1] = -ybar[-1]
        r2 = float(np.dot(x - y, x - y))
        rb2 = float(np.dot(x - ybar, x - ybar))
        pref = (4.0 * math.pi * t) ** (-self.d / 2.0)
        return pref * (math.exp(-r2 / (4.0 * t)) - math.exp(-rb2 / (4.0 * t)))


class SkbmHalfspaceOracle:
    """Closed-form half-space oracle for dimension d in {2, 3, 4}.

    Every closed form has a *_quadrature sibling evaluating the defining
    integral directly; the two are compared in the tests and never share code
    beyond the heat kernel itself.
    """

    def __init__(self, d: int, beta: float):
        if d not in (2, 3, 4):
            raise UnsupportedDomainError("half-space oracle supports d in {2, 3, 4}")
        if not (0.0 < beta < 1.0):
            raise InvalidParameterError("beta must be in (0, 1)")
        self.d = d
        self.beta = beta
        self.alpha = 2.0 * beta
        self.c_beta = stable_subordinator_levy_constant(beta)
        self.c_jump = riesz_constant(d, -self.alpha)
        self.heat = HalfSpaceHeatKernel(d)

    # -- jump kernel ------------------------------------------------------

    def jump_kernel(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = float(np.linalg.norm(x - y))
        if r == 0.0:
            raise InvalidParameterError("jump kernel is singular on the diagonal")
        ybar = y.copy()
        ybar[-1] = -ybar[-1]
        rb = float(np.linalg.norm(x - ybar))
        e = self.d + self.alpha
        return self.c_jump * (r ** -e - rb ** -e)

    def jump_kernel_quadrature(self, x, y, rel_tol: float = 1e-10) -> float:
        """c_beta Integral_0^inf q^H(t, x, y) t^{-1-beta} dt by quadrature."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = float(np.dot(x - y, x - y))

        def integrand(t):
            return self.heat(t, x, y) * t ** (-1.0 - self.beta)

        # Substitute away the essential singularity at t -> 0.
        lo = r2 / 400.0
        val1, err1 = integrate.quad(
            integrand, lo, np.inf, epsrel=rel_tol, epsabs=0.0, limit=400
        )
        val0, err0 = integrate.quad(
            lambda w: integrand(lo * w) * lo, 1e-12, 1.0, epsrel=rel_tol, limit=400
        )
        val = self.c_beta * (val0 + val1)
        if not math.isfinite(val):
            raise QuadratureFailureError(
                "jump kernel quadrature failed", {"val": val, "err": err0 + err1}
            )
        return val

    # -- killing potential --------------------------------------------------

    @property
    def kappa_constant(self) -> float:
        """c1 with kappa(x) = c1 x_d^{-alpha}, from 1-d quadrature."""
        return _kappa_constant(self.beta)

    def kappa(self, x) -> float:
        xd = float(np.asarray(x)[-1])
        if xd <= 0:
            raise InvalidParameterError("point must lie in the half-space")
        return self.kappa_constant * xd ** (-self.alpha)

    # -- Green function -----------------------------------------------------

    @property
    def green_constant(self) -> float:
        b = self.beta
        return (
            4.0 ** (-b)
            * math.pi ** (-self.d / 2.0)
            * math.gamma(self.d / 2.0 - b)
            / math.gamma(b)
        )

    def green(self, x, y) -> float:
        if self.d <= self.alpha:
            raise InvalidParameterError("half-space Green form needs d > alpha")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = float(np.linalg.norm(x - y))
        if r == 0.0:
            raise InvalidParameterError("Green function is singular on the diagonal")
        ybar = y.copy()
        ybar[-1] = -ybar[-1]
        rb = float(np.linalg.norm(x - ybar))
        e = self.alpha - self.d
        return self.green_constant * (r ** e - rb ** e)

    def green_quadrature(self, x, y, rel_tol: float = 1e-10) -> float:
        """Integral_0^inf q^H(s, x, y) s^{beta-1} / Gamma(beta) ds (the
        beta-stable subordinator has potential density s^{beta-1}/Gamma(beta))."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)

        def integrand(s):
            return self.heat(s, x, y) * s ** (self.beta - 1.0)

        r2 = float(np.dot(x - y, x - y))
        lo = r2 / 400.0
        val1, _ = integrate.quad(integrand, lo, np.inf, epsrel=rel_tol, limit=400)
        val0, _ = integrate.quad(
            lambda w: integrand(lo * w) * lo, 1e-12, 1.0, epsrel=rel_tol, limit=400
        )
        return (val0 + val1) / math.gamma(self.beta)

    # -- survival of the time-changed process --------------------------------

    def survival_probability(self, t: float, x) -> float:
        """P(subordinate process survives to time t); closed subordinator
        density for beta = 1/2, else quadrature is not attempted."""
        if abs(self.beta - 0.5) > 1e-12:
            raise InvalidParameterError(
                "closed subordinator density only available for beta = 1/2"
            )
        xd = float(np.asarray(x)[-1])

        def integrand(s):
            return survival_halfspace(s, xd) * subordinator_density_half(t, s)

        val, _ = integrate.quad(integrand, 0.0, np.inf, epsrel=1e-10, limit=400)
        return float(val)


@lru_cache(maxsize=32)
def _kappa_constant(beta: float) -> float:
    """c1 = c_beta Integral_0^inf erfc(1/(2 sqrt t)) t^{-1-beta} dt, evaluated
    after the substitution u = 1/(2 sqrt t), which turns the integral into
    2^{1+2 beta} Integral_0^inf erfc(u) u^{2 beta - 1} du."""
    c_beta = stable_subordinator_levy_constant(beta)

    def integrand(u):
        return math.erfc(u) * u ** (2.0 * beta - 1.0)

    v1, e1 = integrate.quad(integrand, 0.0, 1.0, epsrel=1e-12, epsabs=1e-15, limit=400)
    v2, e2 = integrate.quad(integrand, 1.0, np.inf, epsrel=1e-12, limit=400)
    val = c_beta * 2.0 ** (1.0 + 2.0 * beta) * (v1 + v2)
    if not math.isfinite(val) or (e1 + e2) > 1e-8 * (v1 + v2):
        raise QuadratureFailureError(
            "killing-constant quadrature failed",
            {"value": val, "error_estimate": e1 + e2},
        )
    return val
