"""Two-sided envelope formulas for Green functions and heat kernels."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from ..errors import InvalidParameterError
from ..profiles import upsilon
from .halfspace import subordinator_density_half

__all__ = ["green_envelope", "heat_kernel_envelope_check"]


def green_envelope(x, y, p, alpha, phi1, phi2, domain) -> float:
    """Sharp-estimate envelope

        (d_min/|x-y| ^ 1)^p (d_max/|x-y| ^ 1)^p Upsilon(d_max/|x-y|)
            * |x-y|^(alpha-d)

    with d_min, d_max the smaller/larger boundary distance of x, y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        raise InvalidParameterError("envelope is singular on the diagonal")
    dx = domain.dist_to_boundary(x)
    dy = domain.dist_to_boundary(y)
    dmin, dmax = min(dx, dy), max(dx, dy)
    d = x.shape[0]
    ups = upsilon(dmax / r, alpha, p, phi1, phi2)
    return (
        min(dmin / r, 1.0) ** p * min(dmax / r, 1.0) ** p * ups * r ** (alpha - d)
    )


def heat_kernel_envelope_check(heat_kernel, samples, beta=0.5, horizon=1.0):
    """Ratio of the subordinate density p^Y(t,x,y) to the envelope
    t^{-d/alpha} ^ (t |x-y|^{-d-alpha}) over the given samples.

    ``heat_kernel(s, x, y)`` is the Dirichlet kernel of the base motion; the
    subordinate density uses the closed-form 1/2-stable subordinator density,
    so only beta = 1/2 is supported.  Returns (sup_ratio, ratios).
    """
    if abs(beta - 0.5) > 1e-12:
        raise InvalidParameterError("closed subordinator density needs beta = 1/2")
    alpha = 2.0 * beta
    ratios = []
    for (t, x, y) in samples:
        if t > horizon:
            raise InvalidParameterError("envelope asserted only up to the horizon")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x.shape[0]

        def integrand(s):
            return heat_kernel(s, x, y) * float(subordinator_density_half(t, s))

        val, _ = integrate.quad(integrand, 0.0, np.inf, epsrel=1e-8, limit=300)
        r = float(np.linalg.norm(x - y))
        env = t ** (-d / alpha)
        if r > 0.0:
            env = min(env, t * r ** (-d - alpha))
        ratios.append(val / env)
    return max(ratios), ratios
