"""Path simulation of subordinate killed Brownian motion and statistical
estimators for exit probabilities and occupation-time Green functions.

The process is simulated on a deterministic time grid: over each grid step
an increment of the beta-stable subordinator provides the operational time,
and the killed Brownian motion is advanced over that operational increment
in one shot.  The half-space transition is exact: a Gaussian endpoint with
per-coordinate variance 2 dt (generator = full Laplacian), killed either by
a non-positive endpoint height or with the Brownian-bridge crossing
probability exp(-x_d y_d / dt).  The ball uses the endpoint-inside test plus
the same bridge probability against the tangent plane at the nearest
boundary point whenever the endpoints come within 3 sqrt(2 dt) of the
boundary (farther endpoints cross with probability exponentially small in
distance^2/dt).

Subordinator increments use Kanter's representation of the positive
beta-stable law: with U uniform on (0, pi) and W standard exponential,

    S = (A(U) / W)^{(1-beta)/beta},
    A(u) = [sin(beta u)^beta sin((1-beta) u)^{1-beta} / sin(u)]^{1/(1-beta)},

satisfies E exp(-lam S) = exp(-lam^beta), and the increment over dt is
dt^{1/beta} S.

Reproducibility: every estimator partitions its paths into fixed-size
chunks; chunk i draws from the generator seeded by (seed, stream_id = i).
Results are therefore bit-identical for a given (seed, config) no matter
how the chunks are scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, UnsupportedDomainError
from .geometry import Ball, DomainC11, HalfSpace

__all__ = [
    "PathRecord",
    "RngStream",
    "exit_probability_estimate",
    "occupation_green_estimate",
    "power_slope_fit",
    "sample_subordinator",
    "sample_subordinator_increment",
    "simulate_skbm",
    "step_killed_bm_halfspace",
]

CHUNK_SIZE = 4096


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass
class PathRecord:
    times: list = field(default_factory=list)
    positions: list = field(default_factory=list)
    death_time: float | str = "survived"
    exit_info: tuple | None = None


def sample_subordinator(beta: float, dt: float, rng, size=None) -> np.ndarray:
    """Increments of the beta-stable subordinator over dt (Kanter)."""
    if not (0.0 < beta < 1.0):
        raise InvalidParameterError("beta must be in (0, 1)")
    if dt <= 0:
        raise InvalidParameterError("dt must be positive")
    shape = () if size is None else size
    u = rng.uniform(0.0, math.pi, size=shape)
    w = rng.standard_exponential(size=shape)
    a = (
        np.sin(beta * u) ** beta
        * np.sin((1.0 - beta) * u) ** (1.0 - beta)
        / np.sin(u)
    ) ** (1.0 / (1.0 - beta))
    s = (a / w) ** ((1.0 - beta) / beta)
    return dt ** (1.0 / beta) * s


def sample_subordinator_increment(beta: float, dt: float, rng) -> float:
    return float(sample_subordinator(beta, dt, rng))


def step_killed_bm_halfspace(x, dt: float, rng):
    """One killed-Brownian-motion transition over operational time dt.

    Returns (y, killed).  Survival through the step combines the endpoint
    sign with the bridge crossing probability exp(-x_d y_d / dt)."""
    if dt <= 0:
        raise InvalidParameterError("dt must be positive")
    x = np.asarray(x, dtype=float)
    y = x + math.sqrt(2.0 * dt) * rng.standard_normal(x.shape)
    if y[-1] <= 0.0:
        return y, True
    p_cross = math.exp(-x[-1] * y[-1] / dt)
    return y, bool(rng.uniform() < p_cross)


def _step_batch_halfspace(pos, dts, rng):
    """(m, d) positions advanced over per-path operational times dts."""
    m, d = pos.shape
    y = pos + np.sqrt(2.0 * dts)[:, None] * rng.standard_normal((m, d))
    killed = y[:, -1] <= 0.0
    alive = ~killed
    p_cross = np.exp(-pos[alive, -1] * y[alive, -1] / dts[alive])
    crossed = rng.uniform(size=p_cross.shape) < p_cross
    idx = np.flatnonzero(alive)
    killed[idx[crossed]] = True
    return y, killed


def _step_batch_ball(pos, dts, rng, center, radius):
    """Ball variant: endpoint-inside test plus tangent half-space bridge for
    endpoints within 3 sqrt(2 dt) of the boundary."""
    m, d = pos.shape
    y = pos + np.sqrt(2.0 * dts)[:, None] * rng.standard_normal((m, d))
    dist_y = radius - np.linalg.norm(y - center, axis=1)
    killed = dist_y <= 0.0
    dist_x = radius - np.linalg.norm(pos - center, axis=1)
    near = (~killed) & (
        np.minimum(dist_x, dist_y) <= 3.0 * np.sqrt(2.0 * dts)
    )
    if np.any(near):
        p_cross = np.exp(-dist_x[near] * dist_y[near] / dts[near])
        crossed = rng.uniform(size=p_cross.shape) < p_cross
        idx = np.flatnonzero(near)
        killed[idx[crossed]] = True
    return y, killed


def _stepper(domain: DomainC11):
    if isinstance(domain, HalfSpace):
        return _step_batch_halfspace
    if isinstance(domain, Ball):
        return lambda pos, dts, rng: _step_batch_ball(
            pos, dts, rng, domain.center, domain.radius
        )
    raise UnsupportedDomainError("simulation supports half-space and ball only")


def simulate_skbm(domain, beta, x0, time_grid, rng) -> PathRecord:
    """Single-path simulation on the given time grid."""
    x0 = np.asarray(x0, dtype=float)
    if not domain.contains(x0):
        raise InvalidParameterError("x0 must lie in the domain")
    time_grid = np.asarray(time_grid, dtype=float)
    if time_grid.ndim != 1 or time_grid[0] != 0.0 or np.any(np.diff(time_grid) <= 0):
        raise InvalidParameterError("time grid must increase from 0")
    step = _stepper(domain)
    rec = PathRecord(times=[0.0], positions=[x0.copy()])
    pos = x0[None, :].copy()
    for t_prev, t_next in zip(time_grid[:-1], time_grid[1:]):
        ds = sample_subordinator(beta, t_next - t_prev, rng, size=1)
        pos, killed = step(pos, ds, rng)
        if killed[0]:
            rec.death_time = float(t_next)
            rec.exit_info = (len(rec.times), "killed-inside")
            return rec
        rec.times.append(float(t_next))
        rec.positions.append(pos[0].copy())
    return rec


def _iterate_chunks(n_paths: int, seed: int, start_stream: int = 0):
    n_chunks = (n_paths + CHUNK_SIZE - 1) // CHUNK_SIZE
    for i in range(n_chunks):
        size = min(CHUNK_SIZE, n_paths - i * CHUNK_SIZE)
        yield size, RngStream(seed, start_stream + i).generator()


def exit_probability_estimate(
    domain,
    beta: float,
    x0,
    box_spec: Callable[[np.ndarray], np.ndarray],
    target_spec: Callable[[np.ndarray], np.ndarray] | None,
    n_paths: int,
    seed: int,
    dt: float,
    max_steps: int = 100000,
    stream_offset: int = 0,
):
    """Probability that the first grid-detected exit from the box lands in
    the target set, with death-before-exit counted as a non-event.

    ``box_spec(positions)`` and ``target_spec(positions)`` are vectorized
    membership predicates on (m, d) arrays; ``target_spec = None`` means
    "anywhere in the domain".  Returns (estimate, standard_error).
    """
    if n_paths <= 0:
        raise InvalidParameterError("n_paths must be positive")
    x0 = np.asarray(x0, dtype=float)
    step = _stepper(domain)
    hits = 0
    total = 0
    for size, rng in _iterate_chunks(n_paths, seed, stream_offset):
        pos = np.tile(x0, (size, 1))
        active = np.ones(size, dtype=bool)
        for _ in range(max_steps):
            if not np.any(active):
                break
            idx = np.flatnonzero(active)
            ds = sample_subordinator(beta, dt, rng, size=idx.size)
            new_pos, killed = step(pos[idx], ds, rng)
            pos[idx] = new_pos
            # deaths are non-events
            active[idx[killed]] = False
            live = idx[~killed]
            if live.size:
                outside = ~box_spec(pos[live])
                exited = live[outside]
                if exited.size:
                    if target_spec is None:
                        hits += exited.size
                    else:
                        hits += int(np.sum(target_spec(pos[exited])))
                    active[exited] = False
        total += size
    p = hits / total
    se = math.sqrt(max(p * (1.0 - p), 1e-300) / total)
    return p, se


def occupation_green_estimate(
    domain,
    beta: float,
    x0,
    cell_center,
    cell_radius: float,
    horizon: float,
    n_paths: int,
    seed: int,
    dt: float,
):
    """Expected occupation time of a small ball per unit volume, up to
    min(death, horizon); converges to the cell-average of the Green function
    as dt -> 0 and horizon -> infinity.  Returns (estimate, standard_error).
    """
    if horizon < 0:
        raise InvalidParameterError("horizon must be >= 0")
    x0 = np.asarray(x0, dtype=float)
    cell_center = np.asarray(cell_center, dtype=float)
    d = x0.shape[0]
    if d == 2:
        volume = math.pi * cell_radius ** 2
    elif d == 3:
        volume = 4.0 / 3.0 * math.pi * cell_radius ** 3
    else:
        volume = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * cell_radius ** d
    n_steps = int(round(horizon / dt))
    step = _stepper(domain)
    sums = []
    for size, rng in _iterate_chunks(n_paths, seed):
        pos = np.tile(x0, (size, 1))
        active = np.ones(size, dtype=bool)
        occ = np.zeros(size)
        for _ in range(n_steps):
            if not np.any(active):
                break
            idx = np.flatnonzero(active)
            ds = sample_subordinator(beta, dt, rng, size=idx.size)
            new_pos, killed = step(pos[idx], ds, rng)
            pos[idx] = new_pos
            active[idx[killed]] = False
            live = idx[~killed]
            if live.size:
                inside = (
                    np.linalg.norm(pos[live] - cell_center, axis=1) < cell_radius
                )
                occ[live[inside]] += dt
        sums.append(occ)
    occ_all = np.concatenate(sums) / volume
    est = float(np.mean(occ_all))
    se = float(np.std(occ_all, ddof=1) / math.sqrt(occ_all.size))
    return est, se


def power_slope_fit(points):
    """Weighted least squares of log(value) on log(scale).

    ``points`` is a list of (scale, value, weight); returns
    (slope, intercept, confidence_halfwidth) with the halfwidth
    1.96 * se(slope) from the weighted residual variance.
    """
    if len(points) < 3:
        raise InvalidParameterError("need at least 3 points")
    s = np.array([p[0] for p in points], dtype=float)
    v = np.array([p[1] for p in points], dtype=float)
    w = np.array([p[2] for p in points], dtype=float)
    if np.any(s <= 0) or np.any(v <= 0) or np.any(w <= 0):
        raise InvalidParameterError("scales, values and weights must be positive")
    X = np.log(s)
    Y = np.log(v)
    W = w / np.sum(w)
    xbar = float(np.sum(W * X))
    ybar = float(np.sum(W * Y))
    sxx = float(np.sum(W * (X - xbar) ** 2))
    sxy = float(np.sum(W * (X - xbar) * (Y - ybar)))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = Y - (intercept + slope * X)
    dof = max(len(points) - 2, 1)
    var = float(np.sum(W * resid ** 2)) * len(points) / dof
    se_slope = math.sqrt(var / (len(points) * sxx))
    return slope, intercept, 1.96 * se_slope
