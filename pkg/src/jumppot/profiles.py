"""Boundary profile functions with weak-scaling validation.

A scaling profile is a positive function on (0, inf) equal to 1 on [1, inf)
whose ratios obey two-sided power bounds

    c_L (r/s)^lower <= Phi(r)/Phi(s) <= c_U (r/s)^upper,   0 < s <= r <= 1.

Profiles of the power-log family (r ^ 1)^beta * (log(1 + 1/(r ^ 1))/log 2)^a
carry declared indices lower = upper = beta; the log factor is absorbed into
the comparison constants, which for a finite validation grid are computed at
construction time.  A slow factor is the log-only analogue whose per-epsilon
comparison constant c(eps) is computed on demand.

The module also provides the Green-envelope integral

    Upsilon(t) = int_{t^1}^{2} u^{2 alpha - 2 p - 1} Phi1(u) Phi2(u) du

and the preset profile triples indexed by (gamma, beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import InvalidParameterError, QuadratureFailureError

__all__ = [
    "ScalingProfile",
    "SlowFactor",
    "BoundaryTriple",
    "ValidationReport",
    "constant_profile",
    "constant_slow_factor",
    "default_ratio_grid",
    "make_power_log_profile",
    "preset_gamma_beta",
    "profile_from_config",
    "slow_factor_log_e",
    "slow_factor_log2",
    "upsilon",
    "upsilon_regime",
    "validate_scaling",
]


def default_ratio_grid(max_k: int = 30) -> list[tuple[float, float]]:
    """All ordered pairs (r, s) with r = 2^-i >= s = 2^-j, 0 <= i <= j <= max_k."""
    pts = [2.0 ** -k for k in range(max_k + 1)]
    return [(pts[i], pts[j]) for i in range(len(pts)) for j in range(i, len(pts))]


@dataclass(frozen=True)
class ScalingProfile:
    """Positive function on (0, inf), equal to 1 on [1, inf), with declared
    weak-scaling indices and comparison constants."""

    fn: Callable[[float], float]
    lower_index: float
    upper_index: float
    comparison_lo: float
    comparison_hi: float
    name: str = ""

    def __post_init__(self):
        if self.lower_index < 0 or self.upper_index < self.lower_index:
            raise InvalidParameterError(
                f"need 0 <= lower_index <= upper_index, got "
                f"({self.lower_index}, {self.upper_index})"
            )
        if self.comparison_lo <= 0 or self.comparison_hi <= 0:
            raise InvalidParameterError("comparison constants must be positive")

    def __call__(self, r):
        return self.fn(r)


@dataclass(frozen=True)
class SlowFactor:
    """Slowly-oscillating factor ell, equal to 1 on [1, inf).

    The two-sided bound uses exponents -(eps ^ beta1_cap) and eps ^ beta2_cap
    with a per-epsilon constant c(eps) > 1 supplied by ``epsilon_constant``.
    """

    fn: Callable[[float], float]
    beta1_cap: float
    beta2_cap: float
    epsilon_constant: Callable[[float], float]
    name: str = ""

    def __call__(self, r):
        return self.fn(r)


@dataclass(frozen=True)
class ValidationReport:
    profile_name: str
    n_pairs: int
    violations: list = field(default_factory=list)
    worst_margin: float = math.inf

    @property
    def passed(self) -> bool:
        return not self.violations


def _power_log(r: float, beta: float, log_power: float) -> float:
    rc = min(r, 1.0)
    val = rc ** beta
    if log_power > 0.0:
        val *= (math.log1p(1.0 / rc) / math.log(2.0)) ** log_power
    return val


def make_power_log_profile(
    beta: float, log_power: float, *, slow_factor_only: bool = False, name: str = ""
) -> ScalingProfile:
    """Profile (r ^ 1)^beta * (log(1 + 1/(r ^ 1)) / log 2)^log_power.

    Normalized so the value is exactly 1 on [1, inf).  Declared indices are
    (beta, beta); for log_power > 0 the lower comparison constant is computed
    on the default validation grid (the log factor cannot be bounded below by
    a fixed constant times a power on all of (0, 1]).
    """
    if beta < 0 or log_power < 0:
        raise InvalidParameterError("beta and log_power must be >= 0")
    if log_power > 0 and beta == 0 and not slow_factor_only:
        raise InvalidParameterError(
            "a pure log factor grows unboundedly near 0; pass "
            "slow_factor_only=True to build it anyway"
        )

    def fn(r, _b=beta, _lp=log_power):
        return _power_log(r, _b, _lp)

    if log_power == 0.0:
        c_lo = c_hi = 1.0
    else:
        # Ratio = (r/s)^beta * L with L <= 1 on the ordered pairs, so c_hi = 1.
        # c_lo is the grid minimum of L, shaded by 1%.
        c_hi = 1.0
        c_lo = 1.0
        for r, s in default_ratio_grid():
            l_ratio = fn(r) / fn(s) / (r / s) ** beta
            c_lo = min(c_lo, l_ratio)
        c_lo *= 0.99
    label = name or f"power_log(beta={beta:g}, log_power={log_power:g})"
    return ScalingProfile(fn, beta, beta, c_lo, c_hi, label)


def constant_profile(name: str = "one") -> ScalingProfile:
    return ScalingProfile(lambda r: 1.0, 0.0, 0.0, 1.0, 1.0, name)


def validate_scaling(
    profile: ScalingProfile, grid: list[tuple[float, float]] | None = None
) -> ValidationReport:
    """Check the two-sided scaling inequality on a grid of ordered pairs.

    A finite grid can only refute the inequality, never certify it for all
    ratios; a passing report is a necessary condition.
    """
    if grid is None:
        grid = default_ratio_grid()
    if not grid:
        raise InvalidParameterError("empty validation grid")
    violations = []
    worst = math.inf
    for r, s in grid:
        if not (0.0 < s <= r <= 1.0):
            raise InvalidParameterError(f"grid pair ({r}, {s}) outside 0 < s <= r <= 1")
        ratio = profile(r) / profile(s)
        lo = profile.comparison_lo * (r / s) ** profile.lower_index
        hi = profile.comparison_hi * (r / s) ** profile.upper_index
        margin = min(ratio - lo, hi - ratio)
        worst = min(worst, margin)
        # relative tolerance: pure powers sit exactly on the equality case
        # and ulp-level rounding must not count as a violation
        if margin < -1e-12 * max(1.0, ratio, hi):
            violations.append((r, s, ratio, lo, hi))
    return ValidationReport(profile.name, len(grid), violations, worst)


def _grid_comparison_constant(fn, lo_exp, hi_exp, max_k=40):
    """Smallest c with c^-1 (r/s)^lo_exp <= fn(r)/fn(s) <= c (r/s)^hi_exp on a
    fine geometric grid of ordered pairs, inflated by 5%."""
    pts = np.array([2.0 ** (-0.5 * k) for k in range(2 * max_k + 1)])
    vals = np.array([fn(p) for p in pts])
    c = 1.0
    for i in range(len(pts)):
        r, vr = pts[i], vals[i]
        ratio = vr / vals[i:]
        q = r / pts[i:]
        c = max(c, np.max(ratio / q ** hi_exp), np.max(q ** lo_exp / ratio))
    return 1.05 * c


def _make_slow_factor(fn, beta1_cap, beta2_cap, name) -> SlowFactor:
    @lru_cache(maxsize=64)
    def c_of_eps(eps: float) -> float:
        if eps <= 0:
            raise InvalidParameterError("epsilon must be positive")
        return _grid_comparison_constant(
            fn, -min(eps, beta1_cap), min(eps, beta2_cap)
        )

    return SlowFactor(fn, beta1_cap, beta2_cap, c_of_eps, name)


def constant_slow_factor(beta1_cap: float = 0.0, beta2_cap: float = 0.0) -> SlowFactor:
    return _make_slow_factor(lambda r: 1.0, beta1_cap, beta2_cap, "one")


def slow_factor_log_e(
    power: float = 1.0, beta1_cap: float = 0.0, beta2_cap: float = 0.0
) -> SlowFactor:
    """ell(r) = log(e / (r ^ 1))^power; equals 1 on [1, inf)."""
    if power < 0:
        raise InvalidParameterError("power must be >= 0")

    def fn(r, _p=power):
        return math.log(math.e / min(r, 1.0)) ** _p

    return _make_slow_factor(fn, beta1_cap, beta2_cap, f"log_e^{power:g}")


def slow_factor_log2(
    power: float, beta1_cap: float = 0.0, beta2_cap: float = 0.0
) -> SlowFactor:
    """ell(r) = (log(1 + 1/(r ^ 1)) / log 2)^power; equals 1 on [1, inf)."""
    if power < 0:
        raise InvalidParameterError("power must be >= 0")

    def fn(r, _p=power):
        return (math.log1p(1.0 / min(r, 1.0)) / math.log(2.0)) ** _p

    return _make_slow_factor(fn, beta1_cap, beta2_cap, f"log2^{power:g}")


@dataclass(frozen=True)
class BoundaryTriple:
    """The (Phi1, Phi2, ell) triple entering product-form jump kernels.

    beta1 and beta2 are the lower Matuszewska indices of Phi1 and Phi2; the
    product Phi1 * ell is again a scaling profile whose lower index is beta1
    up to an arbitrarily small epsilon loss.
    """

    phi1: ScalingProfile
    phi2: ScalingProfile
    ell: SlowFactor
    beta1: float
    beta2: float

    def phi0(self, eps: float = 0.0) -> ScalingProfile:
        """Product profile Phi1 * ell with indices (beta1 - eps^beta1, up + eps^beta2)."""
        if eps < 0:
            raise InvalidParameterError("eps must be >= 0")
        p1, el = self.phi1, self.ell

        def fn(r):
            return p1(r) * el(r)

        lower = self.beta1 - min(eps, self.beta1)
        upper = self.phi1.upper_index + min(eps, self.beta2)
        c = _grid_comparison_constant(fn, lower, upper)
        c = max(c, 1.0 / self.phi1.comparison_lo, self.phi1.comparison_hi)
        name = f"({p1.name})*({el.name})"
        return ScalingProfile(fn, lower, upper, 1.0 / c, c, name)


def preset_gamma_beta(gamma: float, beta: float) -> tuple[BoundaryTriple, float]:
    """Preset triple for the subordinate killed gamma-stable family.

    Returns the triple and the exponent b driving the Phi1 power:
    b = gamma/2 when gamma = 2 or beta < 1/2, else gamma - alpha, with
    alpha = gamma * beta required to be < 2.
    """
    if not (0.0 < gamma <= 2.0) or not (0.0 < beta < 1.0):
        raise InvalidParameterError("need gamma in (0,2], beta in (0,1)")
    alpha = gamma * beta
    if alpha >= 2.0:
        raise InvalidParameterError(f"alpha = gamma*beta = {alpha} must be < 2")

    if gamma == 2.0 or beta < 0.5:
        b = gamma / 2.0
    else:
        b = gamma - alpha
    phi1 = make_power_log_profile(b, 0.0, name=f"phi1[{gamma:g},{beta:g}]")

    if gamma == 2.0:
        phi2 = make_power_log_profile(1.0, 0.0, name=f"phi2[{gamma:g},{beta:g}]")
    elif beta < 0.5:
        phi2 = make_power_log_profile(
            gamma / 2.0 - alpha, 0.0, name=f"phi2[{gamma:g},{beta:g}]"
        )
    else:
        phi2 = constant_profile(name=f"phi2[{gamma:g},{beta:g}]")

    beta1 = phi1.lower_index
    beta2 = phi2.lower_index
    if gamma < 2.0 and beta == 0.5:
        ell = slow_factor_log_e(1.0, beta1_cap=beta1, beta2_cap=beta2)
    else:
        ell = constant_slow_factor(beta1_cap=beta1, beta2_cap=beta2)

    return BoundaryTriple(phi1, phi2, ell, beta1, beta2), b


def upsilon(
    t: float,
    alpha: float,
    p: float,
    phi1: ScalingProfile | Callable[[float], float],
    phi2: ScalingProfile | Callable[[float], float],
    rel_tol: float = 1e-8,
) -> float:
    """Adaptive quadrature of int_{t^1}^{2} u^{2a-2p-1} Phi1(u) Phi2(u) du."""
    if t <= 0:
        raise InvalidParameterError("t must be positive")
    if not (0.0 < alpha < 2.0):
        raise InvalidParameterError("alpha must be in (0, 2)")
    lo = min(t, 1.0)
    expo = 2.0 * alpha - 2.0 * p - 1.0

    def integrand(u):
        return u ** expo * phi1(u) * phi2(u)

    pts = [1.0] if lo < 1.0 else None
    val, err = integrate.quad(
        integrand, lo, 2.0, points=pts, epsrel=rel_tol, epsabs=1e-14, limit=200
    )
    if not math.isfinite(val) or err > max(rel_tol * abs(val), 1e-10):
        raise QuadratureFailureError(
            "upsilon quadrature failed",
            {"t": t, "value": val, "error_estimate": err},
        )
    return val


def upsilon_regime(
    alpha: float,
    p: float,
    beta1: float,
    beta2: float,
    beta1_up: float,
    beta2_up: float,
) -> str:
    """Classify Upsilon(t) as 'constant', 'power', or 'intermediate'."""
    lo_adm = max(alpha - 1.0, 0.0)
    hi_adm = alpha + beta1
    if not (lo_adm <= p < hi_adm) or p <= 0:
        raise InvalidParameterError(
            f"p = {p} outside admissible [{lo_adm}, {hi_adm}) ^ (0, inf)"
        )
    if p < alpha + (beta1 + beta2) / 2.0:
        return "constant"
    if p > alpha + (beta1_up + beta2_up) / 2.0:
        return "power"
    return "intermediate"


def profile_from_config(cfg: dict):
    """Build profile objects from a structured config record.

    Families: {"family": "power_log", "beta": b, "log_power": a},
    {"family": "preset_gamma_beta", "gamma": g, "beta": b} (returns the
    triple and exponent), {"family": "constant"}.
    """
    family = cfg.get("family")
    if family == "power_log":
        return make_power_log_profile(
            float(cfg["beta"]),
            float(cfg.get("log_power", 0.0)),
            slow_factor_only=bool(cfg.get("slow_factor_only", False)),
        )
    if family == "preset_gamma_beta":
        return preset_gamma_beta(float(cfg["gamma"]), float(cfg["beta"]))
    if family == "constant":
        return constant_profile()
    raise InvalidParameterError(f"unknown profile family: {family!r}")
