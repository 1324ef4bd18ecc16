"""C^{1,1} domains and their local coordinate machinery.

A domain with characteristics (R_hat, Lambda) looks, near each boundary point
Q, like the region above the graph of a C^{1,1} function Psi in an orthonormal
frame whose last axis is the inward normal at Q.  On top of membership and
boundary distance, this module provides the frame-local objects the estimates
are phrased in: the vertical distance rho_D(x) = x_d - Psi(x_tilde), boxes
U(a, b), the paraboloid-shaped regions E_nu(r), interior/exterior tangent
balls S(r) / S~(r), and the box diffeomorphism

    f^(r)(v) = (r v~, r v_d + Psi(r v~)),   v in U_H(3),

which maps the reference box of the half-space onto U(3r).

Supported variants: half-space {x_d > 0}, balls, and graph domains
{x_d > psi(x~)} with Lipschitz gradient.  The admissibility constants
(2 + Lambda0), (6 + 3 Lambda0), R_hat/8 etc. are enforced verbatim as
preconditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import (
    AmbiguityError,
    DegeneratePointError,
    GeometryFailureError,
    InvalidParameterError,
    UnsupportedDomainError,
)

__all__ = [
    "Ball",
    "BoxSpec",
    "ERegionSpec",
    "GraphDomain",
    "HalfSpace",
    "LocalFrame",
    "TangentBallSpec",
    "box_diffeo",
    "domain_from_config",
    "region_membership",
    "verify_bilipschitz",
]


def _unit(v):
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DegeneratePointError("zero vector has no direction")
    return v / n


def _complete_frame(normal: np.ndarray) -> np.ndarray:
    """Orthonormal d x d matrix whose last column is the given unit vector."""
    d = normal.shape[0]
    # Householder reflection mapping e_d to the normal keeps orthonormality
    # to machine precision.
    e = np.zeros(d)
    e[-1] = 1.0
    w = normal - e
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return np.eye(d)
    w = w / nw
    H = np.eye(d) - 2.0 * np.outer(w, w)
    # Columns of H are orthonormal and H @ e_d = normal.
    return H


@dataclass(frozen=True)
class LocalFrame:
    """Orthonormal coordinate system at a boundary point.

    Columns of ``axes`` are the frame axes in ambient coordinates; the last
    column is the inward normal at ``origin``.  ``psi`` is the local boundary
    graph in these coordinates (Psi(0) = 0, grad Psi(0) = 0).
    """

    origin: np.ndarray
    axes: np.ndarray
    domain: "DomainC11"

    def to_frame(self, x) -> np.ndarray:
        return self.axes.T @ (np.asarray(x, dtype=float) - self.origin)

    def from_frame(self, v) -> np.ndarray:
        return self.origin + self.axes @ np.asarray(v, dtype=float)

    @property
    def inward_normal(self) -> np.ndarray:
        return self.axes[:, -1].copy()

    def psi(self, u_tilde) -> float:
        return self.domain._psi_local(self, np.atleast_1d(np.asarray(u_tilde, float)))

    def rho(self, x) -> float:
        """Vertical distance x_d - Psi(x~) of an ambient point in this frame."""
        v = self.to_frame(x)
        return float(v[-1] - self.psi(v[:-1]))


class DomainC11:
    """Base class; concrete variants implement membership, distance and
    nearest-point queries and the frame-local boundary graph."""

    d: int
    R_hat: float
    Lambda: float

    @property
    def Lambda0(self) -> float:
        # Lipschitz constant of the local boundary graphs over the
        # localization window.
        return self.Lambda * self.R_hat

    def contains(self, x) -> bool:
        raise NotImplementedError

    def dist_to_boundary(self, x) -> float:
        raise NotImplementedError

    def nearest_boundary_point(self, x) -> tuple[np.ndarray, LocalFrame]:
        raise NotImplementedError

    def _psi_local(self, frame: LocalFrame, u_tilde: np.ndarray) -> float:
        raise NotImplementedError

    def frame_at(self, Q, inward_normal) -> LocalFrame:
        Q = np.asarray(Q, dtype=float)
        axes = _complete_frame(_unit(np.asarray(inward_normal, dtype=float)))
        return LocalFrame(Q, axes, self)


class HalfSpace(DomainC11):
    """Open half-space {x : x_d > 0}."""

    def __init__(self, d: int = 2, R_hat: float = 1.0):
        if d < 2:
            raise InvalidParameterError("dimension must be >= 2")
        if not (0.0 < R_hat <= 1.0):
            raise InvalidParameterError("R_hat must lie in (0, 1]")
        self.d = d
        self.R_hat = R_hat
        self.Lambda = 0.0

    def contains(self, x) -> bool:
        return float(np.asarray(x)[-1]) > 0.0

    def dist_to_boundary(self, x) -> float:
        return max(float(np.asarray(x)[-1]), 0.0)

    def nearest_boundary_point(self, x):
        x = np.asarray(x, dtype=float)
        Q = x.copy()
        Q[-1] = 0.0
        # The canonical frame of the half-space is the ambient frame itself.
        return Q, LocalFrame(Q, np.eye(self.d), self)

    def _psi_local(self, frame, u_tilde) -> float:
        return 0.0


class Ball(DomainC11):
    """Open ball; the local boundary graph is the spherical cap
    Psi(u~) = R - sqrt(R^2 - |u~|^2)."""

    def __init__(self, center, radius: float, R_hat: float | None = None):
        center = np.asarray(center, dtype=float)
        if center.ndim != 1 or center.shape[0] < 2:
            raise InvalidParameterError("center must be a vector of length >= 2")
        if radius <= 0:
            raise InvalidParameterError("radius must be positive")
        self.center = center
        self.radius = float(radius)
        self.d = center.shape[0]
        self.Lambda = 2.0 / self.radius
        default = min(1.0, self.radius / 4.0)
        self.R_hat = default if R_hat is None else float(R_hat)
        if not (0.0 < self.R_hat <= min(1.0, 1.0 / (2.0 * self.Lambda))):
            raise InvalidParameterError("R_hat must be in (0, 1 ^ 1/(2 Lambda)]")

    def contains(self, x) -> bool:
        return float(np.linalg.norm(np.asarray(x, float) - self.center)) < self.radius

    def dist_to_boundary(self, x) -> float:
        return max(
            self.radius - float(np.linalg.norm(np.asarray(x, float) - self.center)),
            0.0,
        )

    def nearest_boundary_point(self, x):
        x = np.asarray(x, dtype=float)
        v = x - self.center
        r = np.linalg.norm(v)
        if r == 0.0:
            raise DegeneratePointError("ball center is equidistant from the boundary")
        u = v / r
        Q = self.center + self.radius * u
        return Q, self.frame_at(Q, -u)

    def _psi_local(self, frame, u_tilde) -> float:
        s2 = float(np.dot(u_tilde, u_tilde))
        R = self.radius
        if s2 >= R * R:
            raise InvalidParameterError("|u~| must be < ball radius")
        return R - math.sqrt(R * R - s2)


class GraphDomain(DomainC11):
    """Region above the graph of a C^{1,1} function psi: R^{d-1} -> R.

    ``grad_psi`` must be Lipschitz with constant ``lam``.  Named presets:
    "flat" (psi = 0) and "paraboloid" (psi = c |u~|^2 with c <= lam/2).
    """

    def __init__(
        self,
        psi: Callable[[np.ndarray], float],
        grad_psi: Callable[[np.ndarray], np.ndarray],
        lam: float,
        d: int = 2,
        name: str = "custom",
    ):
        if d < 2:
            raise InvalidParameterError("dimension must be >= 2")
        if lam < 0:
            raise InvalidParameterError("gradient Lipschitz constant must be >= 0")
        self.psi = psi
        self.grad_psi = grad_psi
        self.Lambda = float(lam)
        self.d = d
        self.name = name
        self.R_hat = 1.0 if lam == 0.0 else min(1.0, 1.0 / (2.0 * lam))

    @classmethod
    def preset(cls, name: str, d: int = 2, lam: float = 1.0, c: float | None = None):
        if name == "flat":
            return cls(lambda u: 0.0, lambda u: np.zeros(d - 1), 0.0, d, "flat")
        if name == "paraboloid":
            cc = lam / 2.0 if c is None else float(c)
            if cc > lam / 2.0 + 1e-15:
                raise InvalidParameterError("paraboloid needs c <= Lambda/2")
            return cls(
                lambda u, _c=cc: _c * float(np.dot(u, u)),
                lambda u, _c=cc: 2.0 * _c * np.asarray(u, float),
                lam,
                d,
                f"paraboloid(c={cc:g})",
            )
        raise InvalidParameterError(f"unknown graph preset {name!r}")

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return float(x[-1]) > float(self.psi(x[:-1]))

    def _project(self, x: np.ndarray) -> np.ndarray:
        """Foot point parameter u~ minimizing |x - (u~, psi(u~))|.

        Damped Newton on the first-order condition, started at u~ = x~, with
        a line-search fallback; valid in the uniqueness regime.
        """
        xt, xd = x[:-1], x[-1]

        def obj(u):
            du = u - xt
            dp = self.psi(u) - xd
            return 0.5 * (float(np.dot(du, du)) + dp * dp)

        def grad(u):
            dp = self.psi(u) - xd
            return (u - xt) + dp * np.asarray(self.grad_psi(u), float)

        u = xt.astype(float).copy()
        fu = obj(u)
        for _ in range(100):
            g = grad(u)
            gn = float(np.linalg.norm(g))
            if gn < 1e-13 * (1.0 + abs(xd)):
                break
            # Finite-difference Hessian of the objective; SPD in the basin.
            m = u.shape[0]
            H = np.empty((m, m))
            h = 1e-6 * (1.0 + float(np.linalg.norm(u)))
            for j in range(m):
                e = np.zeros(m)
                e[j] = h
                H[:, j] = (grad(u + e) - grad(u - e)) / (2.0 * h)
            H = 0.5 * (H + H.T)
            try:
                step = np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                step = g
            if not np.all(np.isfinite(step)):
                step = g
            # backtracking along the Newton direction, then steepest descent
            improved = False
            for direction in (step, g):
                lam_ls = 1.0
                for _ in range(40):
                    cand = u - lam_ls * direction
                    fc = obj(cand)
                    if fc < fu:
                        u, fu = cand, fc
                        improved = True
                        break
                    lam_ls *= 0.5
                if improved:
                    break
            if not improved:
                break  # no representable improvement; converged numerically
        if float(np.linalg.norm(grad(u))) > 1e-8 * (1.0 + abs(xd)):
            raise GeometryFailureError("nearest-point projection did not converge")
        return u

    def dist_to_boundary(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            return 0.0
        u = self._project(x)
        dist = float(np.hypot(np.linalg.norm(u - x[:-1]), self.psi(u) - x[-1]))
        # Certificate: rho/(1+Lambda1^2)^(1/2) <= delta <= rho with the
        # vertical distance rho = x_d - psi(x~).
        rho = float(x[-1]) - float(self.psi(x[:-1]))
        lam1 = max(self.Lambda0, 0.5)
        if dist > rho * (1.0 + 1e-9) + 1e-12:
            raise GeometryFailureError("projection certificate failed (dist > rho)")
        if rho <= self.R_hat / (6.0 + 4.0 * self.Lambda0) and dist < rho / math.sqrt(
            1.0 + lam1 * lam1
        ) * (1.0 - 1e-9):
            raise GeometryFailureError("projection certificate failed (dist too small)")
        return dist

    def nearest_boundary_point(self, x):
        x = np.asarray(x, dtype=float)
        delta = self.dist_to_boundary(x)
        if delta >= self.R_hat / 8.0 and self.Lambda > 0.0:
            raise AmbiguityError(
                "uniqueness of the nearest boundary point is only guaranteed "
                "for dist < R_hat/8"
            )
        u = self._project(x)
        Q = np.append(u, self.psi(u))
        g = np.asarray(self.grad_psi(u), float)
        n = np.append(-g, 1.0)
        return Q, self.frame_at(Q, n / np.linalg.norm(n))

    def _psi_local(self, frame, u_tilde) -> float:
        # Boundary height over the frame point: solve for t such that
        # frame.from_frame((u~, t)) lies on the graph.  Monotone in t for
        # Lambda0 <= 1/2, so bracketed bisection is safe.
        def g(t):
            p = frame.from_frame(np.append(u_tilde, t))
            return float(p[-1]) - float(self.psi(p[:-1]))

        lo, hi = -2.0 * self.R_hat, 2.0 * self.R_hat
        glo, ghi = g(lo), g(hi)
        grow = 0
        while glo > 0.0 and grow < 30:
            lo *= 2.0
            glo = g(lo)
            grow += 1
        while ghi < 0.0 and grow < 60:
            hi *= 2.0
            ghi = g(hi)
            grow += 1
        if glo > 0.0 or ghi < 0.0:
            raise GeometryFailureError("could not bracket the local boundary graph")
        return float(optimize.brentq(g, lo, hi, xtol=1e-14))


@dataclass(frozen=True)
class BoxSpec:
    """Box U(a, b): width a, height b in vertical distance."""

    a: float
    b: float


@dataclass(frozen=True)
class ERegionSpec:
    """Region E_nu(r): |x~| < r/4 and 4 r^-nu |x~|^(1+nu) < x_d < r/2."""

    nu: float
    r: float


@dataclass(frozen=True)
class TangentBallSpec:
    """Interior tangent ball S(r) or exterior tangent ball S~(r)."""

    r: float
    interior: bool = True


def region_membership(domain: DomainC11, frame: LocalFrame, x, spec):
    """Membership of x in a frame-local region; returns (bool, rho_D(x))."""
    v = frame.to_frame(x)
    vt, vd = v[:-1], float(v[-1])
    rho = vd - float(frame.psi(vt))

    if isinstance(spec, BoxSpec):
        cap = domain.R_hat / (2.0 + domain.Lambda0)
        if not (0.0 < spec.a <= cap and 0.0 < spec.b <= cap):
            raise InvalidParameterError(
                f"box sides must lie in (0, R_hat/(2+Lambda0)] = (0, {cap:g}]"
            )
        inside = float(np.linalg.norm(vt)) < spec.a and 0.0 < rho < spec.b
        return inside, rho

    if isinstance(spec, ERegionSpec):
        if not (0.0 < spec.nu <= 1.0):
            raise InvalidParameterError("nu must be in (0, 1]")
        if not (0.0 < spec.r <= domain.R_hat / 4.0):
            raise InvalidParameterError("E_nu needs r in (0, R_hat/4]")
        s = float(np.linalg.norm(vt))
        inside = (
            s < spec.r / 4.0
            and 4.0 * spec.r ** (-spec.nu) * s ** (1.0 + spec.nu) < vd < spec.r / 2.0
        )
        return inside, rho

    if isinstance(spec, TangentBallSpec):
        # generic C^{1,1} sets guarantee S(r) in D only for r <= R_hat/4;
        # for an exact ball the inclusion holds up to the full radius
        cap = domain.radius if isinstance(domain, Ball) else domain.R_hat / 4.0
        if not (0.0 < spec.r <= cap):
            raise InvalidParameterError(f"tangent balls need r in (0, {cap:g}]")
        sign = 1.0 if spec.interior else -1.0
        center = frame.from_frame(np.append(np.zeros_like(vt), sign * spec.r))
        inside = float(np.linalg.norm(np.asarray(x, float) - center)) < spec.r
        return inside, rho

    raise InvalidParameterError(f"unknown region spec {spec!r}")


def box_diffeo(domain: DomainC11, frame: LocalFrame, r: float, v):
    """Forward box diffeomorphism f^(r)(v) = (r v~, r v_d + Psi(r v~)).

    Input v lives in the reference box U_H(3); the image is the ambient point
    in U(3r) based at the frame origin.
    """
    cap = domain.R_hat / (6.0 + 3.0 * domain.Lambda0)
    if not (0.0 < r <= cap):
        raise InvalidParameterError(f"box_diffeo needs r in (0, {cap:g}]")
    v = np.asarray(v, dtype=float)
    vt, vd = v[:-1], float(v[-1])
    if not (float(np.linalg.norm(vt)) < 3.0 and 0.0 < vd < 3.0):
        raise InvalidParameterError("v must lie in the reference box U_H(3)")
    w = np.append(r * vt, r * vd + frame.psi(r * vt))
    return frame.from_frame(w)


def box_diffeo_inverse(domain: DomainC11, frame: LocalFrame, r: float, y):
    """Inverse of :func:`box_diffeo`: v = (y~/r, (y_d - Psi(y~))/r)."""
    cap = domain.R_hat / (6.0 + 3.0 * domain.Lambda0)
    if not (0.0 < r <= cap):
        raise InvalidParameterError(f"box_diffeo needs r in (0, {cap:g}]")
    w = frame.to_frame(y)
    wt = w[:-1]
    return np.append(wt / r, (float(w[-1]) - frame.psi(wt)) / r)


def verify_bilipschitz(domain, frame, r, n_samples=200, seed=0):
    """Sampled check of the (1+Lambda0) bi-Lipschitz bound of the box map."""
    rng = np.random.default_rng(seed)
    lam0 = domain.Lambda0
    worst = 0.0
    for _ in range(n_samples):
        v = np.append(rng.uniform(-2, 2, size=domain.d - 1), rng.uniform(0.1, 2.9))
        w = np.append(rng.uniform(-2, 2, size=domain.d - 1), rng.uniform(0.1, 2.9))
        if np.linalg.norm(v[:-1]) >= 3 or np.linalg.norm(w[:-1]) >= 3:
            continue
        fv = box_diffeo(domain, frame, r, v)
        fw = box_diffeo(domain, frame, r, w)
        ratio = np.linalg.norm(fv - fw) / (r * np.linalg.norm(v - w))
        worst = max(worst, ratio, 1.0 / ratio)
    return worst <= (1.0 + lam0) * (1.0 + 1e-9), worst


def domain_from_config(cfg: dict) -> DomainC11:
    """Build a domain from a config record {variant, d, radius?, R_hat?, Lambda?}."""
    variant = cfg.get("variant")
    if variant == "halfspace":
        return HalfSpace(int(cfg.get("d", 2)), float(cfg.get("R_hat", 1.0)))
    if variant == "ball":
        d = int(cfg.get("d", 2))
        center = np.asarray(cfg.get("center", np.zeros(d)), dtype=float)
        kwargs = {}
        if "R_hat" in cfg:
            kwargs["R_hat"] = float(cfg["R_hat"])
        return Ball(center, float(cfg["radius"]), **kwargs)
    if variant == "graph":
        return GraphDomain.preset(
            cfg.get("preset", "flat"),
            d=int(cfg.get("d", 2)),
            lam=float(cfg.get("Lambda", 1.0)),
            c=cfg.get("c"),
        )
    raise UnsupportedDomainError(f"unknown domain variant {variant!r}")
