"""Jump kernels with boundary decay, killing potentials, and boundary
profile functions on the shifted half-space.

The kernel body is the product form

    B(x, y) = a(x, y) Phi1(r1) Phi2(r2) ell(r3),
    r1 = (dx ^ dy)/|x-y|,  r2 = (dx v dy)/|x-y|,
    r3 = (dx ^ dy)/((dx v dy) ^ |x-y|),

with dx, dy the boundary distances, and J(x, y) = B(x, y) |x-y|^{-d-alpha}.
On the diagonal B(x, x) = a(x, x) by convention.

Boundary profile functions F0 live on H_{-1} = {z : z_d > -1}; their
symmetrization F(z) = (F0(z) + F0(-z/(1+z_d)))/2 is invariant under
z -> -z/(1+z_d), the substitution swapping the roles of the two endpoints of
a jump.  The closed-form profile of subordinate killed Brownian motion on the
half-space is

    F0(z) = 1 - (|z| / |(z~, z_d + 2)|)^{d+alpha},

and the censored-form profile is Theta(|z| / |(z~, -z_d - 2)|); for
Theta(u) = u^{d+alpha} the two are complementary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, InvalidParameterError, PreconditionError
from .geometry import DomainC11, ERegionSpec, LocalFrame, region_membership
from .profiles import BoundaryTriple

__all__ = [
    "BoundaryProfileF",
    "CoefficientA",
    "JumpKernelSpec",
    "KillingSpec",
    "b5_residual",
    "censored_profile",
    "constant_coefficient",
    "eval_B",
    "eval_kappa",
    "f0_skbm_halfspace",
    "profile_from_phi0",
    "skbm_profile",
    "smooth_coefficient_preset",
    "symmetrize_F0",
]


@dataclass(frozen=True)
class CoefficientA:
    """Symmetric coefficient field a(x, y), bounded in [1/bound, bound] and
    Hoelder with exponent > (alpha-1)_+ near the diagonal."""

    fn: Callable[[np.ndarray, np.ndarray], float]
    bound: float
    holder_exponent: float
    holder_constant: float
    name: str = ""

    def __post_init__(self):
        if self.bound < 1.0:
            raise InvalidParameterError("coefficient bound must be >= 1")
        if self.holder_constant < 0.0:
            raise InvalidParameterError("Hoelder constant must be >= 0")

    def __call__(self, x, y) -> float:
        return self.fn(np.asarray(x, float), np.asarray(y, float))


def constant_coefficient(c: float = 1.0) -> CoefficientA:
    if c <= 0:
        raise InvalidParameterError("constant coefficient must be positive")
    return CoefficientA(
        lambda x, y: c, max(c, 1.0 / c), 1.0, 0.0, name=f"constant({c:g})"
    )


def smooth_coefficient_preset(name: str = "gaussian_bump") -> CoefficientA:
    """Smooth symmetric coefficient bounded in [1, 3/2]."""
    if name != "gaussian_bump":
        raise InvalidParameterError(f"unknown coefficient preset {name!r}")

    def fn(x, y):
        return 1.0 + 0.25 * (
            math.exp(-float(np.dot(x, x))) + math.exp(-float(np.dot(y, y)))
        )

    return CoefficientA(fn, 1.5, 1.0, 1.0, name=name)


@dataclass(frozen=True)
class JumpKernelSpec:
    """Product-form jump kernel J = B(x,y) |x-y|^{-d-alpha} on a domain."""

    alpha: float
    domain: DomainC11
    triple: BoundaryTriple
    coeff: CoefficientA

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise InvalidParameterError("alpha must be in (0, 2)")

    def B(self, x, y) -> float:
        return eval_B(self, x, y)

    def J(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = float(np.linalg.norm(x - y))
        if r == 0.0:
            raise InvalidParameterError("jump kernel is singular on the diagonal")
        return self.B(x, y) * r ** (-(self.domain.d + self.alpha))


def eval_B(spec: JumpKernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dom = spec.domain
    if not (dom.contains(x) and dom.contains(y)):
        raise DomainError("both points must lie in the domain")
    a = spec.coeff(x, y)
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        return a
    dx = dom.dist_to_boundary(x)
    dy = dom.dist_to_boundary(y)
    dmin, dmax = min(dx, dy), max(dx, dy)
    r1 = dmin / r
    r2 = dmax / r
    r3 = dmin / min(dmax, r)
    t = spec.triple
    return a * t.phi1(r1) * t.phi2(r2) * t.ell(r3)


@dataclass(frozen=True)
class KillingSpec:
    """Killing potential kappa(x) = c9 B(x,x) delta^{-alpha} + perturbation,
    with |perturbation| <= c8 delta^{-alpha+eta0} for delta < 1 and
    kappa <= c8 for delta >= 1."""

    c9: float
    c8: float
    eta0: float
    base_B_diag: Callable[[float], float] | float
    alpha: float

    def __post_init__(self):
        if self.c9 < 0 or self.c8 < 0:
            raise InvalidParameterError("c9 and c8 must be >= 0")
        if self.eta0 <= 0:
            raise InvalidParameterError("eta0 must be positive")
        if not (0.0 < self.alpha < 2.0):
            raise InvalidParameterError("alpha must be in (0, 2)")

    def _diag(self, delta: float) -> float:
        if callable(self.base_B_diag):
            return float(self.base_B_diag(delta))
        return float(self.base_B_diag)


def eval_kappa(k: KillingSpec, delta: float, perturbation_mode: str = "none") -> float:
    """Evaluate the killing potential at boundary distance delta.

    Below delta = 1 the leading term is c9 B_diag delta^{-alpha} with an
    optional signed perturbation at the admissible envelope; the value is
    clamped at 0.  At delta >= 1 the potential is held constant at
    min(value at delta = 1, c8), an admissible choice since the assumption
    only bounds it by c8 there.
    """
    if delta <= 0:
        raise InvalidParameterError("delta must be positive")
    signs = {"none": 0.0, "plus": 1.0, "minus": -1.0}
    if perturbation_mode not in signs:
        raise InvalidParameterError(f"unknown perturbation mode {perturbation_mode!r}")
    sign = signs[perturbation_mode]

    def value_at(dl: float) -> float:
        lead = k.c9 * k._diag(dl) * dl ** (-k.alpha)
        pert = sign * k.c8 * dl ** (-k.alpha + k.eta0)
        return max(lead + pert, 0.0)

    if delta < 1.0:
        return value_at(delta)
    return min(value_at(1.0), k.c8)


@dataclass(frozen=True)
class BoundaryProfileF:
    """Boundary profile F0 on H_{-1} together with its dimension and the
    flag for horizontal isotropy (dependence on z~ only through |z~|).

    ``f0_shifted(rt, w)``, when provided, evaluates F0 at the point with
    |z~| = rt and z_d = w - 1 carrying w = z_d + 1 exactly; quadratures use
    it near the z_d = -1 face where forming z_d directly loses all precision.
    It must broadcast over numpy arrays.
    """

    f0: Callable[[np.ndarray], float]
    dim: int
    horizontally_isotropic: bool = True
    name: str = ""
    f0_shifted: Callable | None = None

    def __call__(self, z) -> float:
        z = np.asarray(z, dtype=float)
        if z[-1] <= -1.0:
            raise DomainError("profile argument must satisfy z_d > -1")
        return float(self.f0(z))

    def symmetrized(self) -> Callable[[np.ndarray], float]:
        return symmetrize_F0(self)

    def symmetrized_shifted(self) -> Callable | None:
        """(rt, w) -> (F0(rt, w) + F0(rt/w, 1/w)) / 2, or None."""
        if self.f0_shifted is None:
            return None
        f0s = self.f0_shifted

        def F(rt, w):
            return 0.5 * (f0s(rt, w) + f0s(rt / w, 1.0 / w))

        return F


def symmetrize_F0(profile: BoundaryProfileF) -> Callable[[np.ndarray], float]:
    """F(z) = (F0(z) + F0(-z/(1+z_d))) / 2; idempotent on symmetric inputs."""

    def F(z):
        z = np.asarray(z, dtype=float)
        if z[-1] <= -1.0:
            raise DomainError("profile argument must satisfy z_d > -1")
        zr = -z / (1.0 + z[-1])
        return 0.5 * (float(profile.f0(z)) + float(profile.f0(zr)))

    return F


def f0_skbm_halfspace(d: int, beta: float, z) -> float:
    """Closed-form half-space profile of subordinate killed Brownian motion:
    1 - (|z| / |(z~, z_d + 2)|)^{d + alpha}, alpha = 2 beta."""
    if d < 2:
        raise InvalidParameterError("dimension must be >= 2")
    if not (0.0 < beta < 1.0):
        raise InvalidParameterError("beta must be in (0, 1)")
    z = np.asarray(z, dtype=float)
    if z[-1] <= -1.0:
        raise DomainError("profile argument must satisfy z_d > -1")
    alpha = 2.0 * beta
    num = float(np.dot(z, z))
    mirror = z.copy()
    mirror[-1] = z[-1] + 2.0
    den = float(np.dot(mirror, mirror))
    return 1.0 - (num / den) ** ((d + alpha) / 2.0)


def skbm_profile(d: int, beta: float) -> BoundaryProfileF:
    alpha = 2.0 * beta
    power = (d + alpha) / 2.0

    def f0_shifted(rt, w):
        # 1 - [(rt^2 + (w-1)^2) / (rt^2 + (w+1)^2)]^power, cancellation-free:
        # the bracket equals 1 - 4w / (rt^2 + (w+1)^2), which is <= 1 with
        # equality only at z = 0; rounding may push it over, hence the clamp.
        rt = np.asarray(rt, dtype=float)
        w = np.asarray(w, dtype=float)
        frac = np.minimum(4.0 * w / (rt * rt + (w + 1.0) ** 2), 1.0)
        with np.errstate(divide="ignore"):
            return -np.expm1(power * np.log1p(-frac))

    return BoundaryProfileF(
        lambda z: f0_skbm_halfspace(d, beta, z),
        dim=d,
        horizontally_isotropic=True,
        name=f"skbm(d={d}, beta={beta:g})",
        f0_shifted=f0_shifted,
    )


def profile_from_phi0(phi0: Callable[[float], float], d: int, name: str = "") -> BoundaryProfileF:
    """Profile F0(z) = Phi0(((z_d + 1) ^ 1) / |z|): exactly symmetric under
    z -> -z/(1+z_d), bounded when Phi0 is, and with the prescribed boundary
    decay; used to exercise profile-driven behavior of the killing constant."""

    def f0(z):
        z = np.asarray(z, dtype=float)
        w = z[-1] + 1.0
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            return phi0(1.0)
        return phi0(min(w, 1.0) / nz)

    def f0_shifted(rt, w):
        rt = np.asarray(rt, dtype=float)
        w = np.asarray(w, dtype=float)
        nz = np.hypot(rt, w - 1.0)
        arg = np.where(nz > 0, np.minimum(w, 1.0) / np.where(nz > 0, nz, 1.0), 1.0)
        return np.vectorize(phi0, otypes=[float])(arg)

    return BoundaryProfileF(
        f0,
        dim=d,
        horizontally_isotropic=True,
        name=name or "phi0_profile",
        f0_shifted=f0_shifted,
    )


def censored_profile(theta: Callable[[float], float], z) -> float:
    """Censored-form profile Theta(|z| / |(z~, -z_d - 2)|)."""
    z = np.asarray(z, dtype=float)
    if z[-1] <= -1.0:
        raise DomainError("profile argument must satisfy z_d > -1")
    mirror = z.copy()
    mirror[-1] = -z[-1] - 2.0
    num = float(np.linalg.norm(z))
    den = float(np.linalg.norm(mirror))
    return float(theta(num / den))


def b5_residual(
    oracle_J: Callable[[np.ndarray, np.ndarray], float],
    diag_B: float,
    profile: BoundaryProfileF,
    domain: DomainC11,
    frame: LocalFrame,
    x,
    y,
    alpha: float,
    nu: float = 0.5,
) -> float:
    """|B(x,y) - B(x,x) F0((y - x)/x_d)| with B(x,y) = |x-y|^{d+a} J(x,y).

    x, y are ambient points that must lie in E_nu(R_hat/8) of the given
    frame; the profile argument is formed in frame coordinates.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r_reg = domain.R_hat / 8.0
    for pt in (x, y):
        inside, _ = region_membership(domain, frame, pt, ERegionSpec(nu, r_reg))
        if not inside:
            raise PreconditionError("points must lie in E_nu(R_hat/8) of the frame")
    vx = frame.to_frame(x)
    vy = frame.to_frame(y)
    if np.allclose(vx, vy):
        z = np.zeros_like(vx)
    else:
        z = (vy - vx) / vx[-1]
    d = domain.d
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        B_xy = diag_B
    else:
        B_xy = r ** (d + alpha) * float(oracle_J(x, y))
    return abs(B_xy - diag_B * profile(z))
