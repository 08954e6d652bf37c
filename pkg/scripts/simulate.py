# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
# =============================================================================
"""
Monte Carlo simulation of (X, Y, Z).

Two routes are provided:

    simulate_paths     Euler–Maruyama on the jump SDE system of (X, Z) with full
                       truncation of X and self-exciting jump intensities
                       frozen at the left end of each step
    simulate_lamperti  the time-change route X = X0 + M_Y + K, Z = N_Y with
                       Lévy increments drawn over clock increments δY;
                       meant as a distributional cross-check

Jumps of size >= ε are drawn exactly (Poisson counts, inverse-transform or
rejection sizes). Jumps below ε are either replaced by a variance-matched
Gaussian term (DiffusionApprox) or by their compensator only (CompensateOnly).

Path i draws from four Philox streams spawned from
SeedSequence(seed, spawn_key=(route, i)): Gaussian, jump count, jump size and
uniform. Batches only group paths for vectorization and worker threads, so
path i is the same whatever the path count, batch size or worker count.

Usage:
    from simulate import SimConfig, simulate_paths

    paths = simulate_paths(model, SimConfig(horizon=1.0, step=2**-8, paths=10_000, seed=7))
    x_T, y_T, z_T = paths.terminal()
"""

import csv
import io
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
from scipy import stats

from errors import ConfigError, EndpointDerivativeUnavailable, RNGError, SimulationStabilityWarning
from mechanisms import (
    CGMY,
    INF,
    CBITCLModel,
    LevyMeasureSpec,
    StablePositive,
    TemperedStablePositive,
    lower_incomplete_gamma,
    upper_incomplete_gamma,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "CBITCL_THREADS"
STABILITY_LIMIT = 1.0
MAX_REJECTION_ROUNDS = 1000
CHUNK_TICKS = 32
SIZE_BLOCK = 256
COUNT_SEARCH_LIMIT = 30.0
MAX_COUNT_SEARCH = 200

ROUTE_EULER = 0
ROUTE_LAMPERTI = 1

IMMIGRATION, BRANCHING, NOISE = 0, 1, 2


class SmallJumpMode(str, Enum):
    DIFFUSION_APPROX = "DiffusionApprox"
    COMPENSATE_ONLY = "CompensateOnly"


def default_workers() -> int:
    """Worker count from CBITCL_THREADS, 1 when unset."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer", location=THREADS_ENV) from e
    if value < 1:
        raise ConfigError(f"{THREADS_ENV}={value} must be >= 1", location=THREADS_ENV)
    return value


@dataclass(frozen=True)
class SimConfig:
    """Simulation grid, sample size and jump treatment."""

    horizon: float
    step: float
    paths: int
    seed: int = 0
    eps: float = 1e-3
    small_jumps: SmallJumpMode = SmallJumpMode.DIFFUSION_APPROX
    batch_size: int = 2048
    workers: Optional[int] = None
    record_stride: int = 1
    substeps: int = 8

    def __post_init__(self):
        object.__setattr__(self, "small_jumps", SmallJumpMode(self.small_jumps))
        if not self.horizon > 0.0:
            raise ConfigError(f"simulation: horizon={self.horizon} must be > 0", location="simulation.horizon")
        if not 0.0 < self.step <= self.horizon:
            raise ConfigError(
                f"simulation: step={self.step} must lie in (0, horizon={self.horizon}]", location="simulation.step"
            )
        n = round(self.horizon / self.step)
        if abs(n * self.step - self.horizon) > 1e-9 * self.horizon:
            raise ConfigError(
                f"simulation: step={self.step} does not divide horizon={self.horizon}", location="simulation.step"
            )
        if self.paths < 1:
            raise ConfigError(f"simulation: paths={self.paths} must be >= 1", location="simulation.paths")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError(f"simulation: seed={self.seed} must be a nonnegative integer", location="simulation.seed")
        if not 0.0 < self.eps < 1.0:
            raise ConfigError(f"simulation: eps={self.eps} must lie in (0, 1)", location="simulation.eps")
        if self.batch_size < 1:
            raise ConfigError("simulation: batch_size must be >= 1", location="simulation.batch_size")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("simulation: workers must be >= 1", location="simulation.workers")
        if self.record_stride < 1:
            raise ConfigError("simulation: record_stride must be >= 1", location="simulation.record_stride")
        if self.substeps < 1:
            raise ConfigError("simulation: substeps must be >= 1", location="simulation.substeps")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.step))

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def record_index(self) -> np.ndarray:
        idx = np.arange(0, self.n_steps + 1, self.record_stride)
        if idx[-1] != self.n_steps:
            idx = np.append(idx, self.n_steps)
        return idx

    @property
    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else default_workers()

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        d = asdict(self)
        d["small_jumps"] = self.small_jumps.value
        d["seed"] = int(self.seed)
        return d


@dataclass
class PathSet:
    """Simulated (X, Y, Z) on the recorded grid, one row per path."""

    times: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    stream_ids: List[Tuple[int, int]]  # (route, path index) spawn keys
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.X.shape[0]

    def terminal(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.X[:, -1], self.Y[:, -1], self.Z[:, -1]

    def write_csv(self, target: Union[str, Path, TextIO]) -> None:
        """Columns path,t,X,Y,Z with round-trip float formatting and a `#` config echo."""
        if isinstance(target, (str, Path)):
            with open(target, "w", encoding="utf-8", newline="") as f:
                self.write_csv(f)
            return
        for key, value in self.config.items():
            target.write(f"# {key}: {value}\n")
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["path", "t", "X", "Y", "Z"])
        times = [repr(float(t)) for t in self.times]
        for p in range(self.n_paths):
            for j, t in enumerate(times):
                writer.writerow([p, t, repr(float(self.X[p, j])), repr(float(self.Y[p, j])), repr(float(self.Z[p, j]))])

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


# =============================================================================
# Jump laws
# =============================================================================

@dataclass(frozen=True)
class _Side:
    """One side of a jump measure: scale · x^{−1−α} e^{−θx} on (0, ∞), mirrored when sign < 0."""

    sign: float
    scale: float
    alpha: float
    theta: float

    def integral(self, p: float, lo: float, hi: float) -> float:
        """∫_lo^hi x^p · scale · x^{−1−α} e^{−θx} dx."""
        s = p - self.alpha
        if self.scale == 0.0:
            return 0.0
        if (hi == INF and s >= 0.0 and self.theta == 0.0) or (lo == 0.0 and s <= 0.0):
            return INF
        if self.theta == 0.0:
            hi_term = 0.0 if hi == INF else hi ** s
            lo_term = 0.0 if lo == 0.0 else lo ** s
            return self.scale * (hi_term - lo_term) / s
        th = self.theta
        if lo == 0.0:
            body = math.gamma(s) if hi == INF else lower_incomplete_gamma(s, th * hi)
        else:
            body = upper_incomplete_gamma(s, th * lo) - (0.0 if hi == INF else upper_incomplete_gamma(s, th * hi))
        return self.scale * th ** (-s) * body

    def sample(self, n: int, eps: float, rng: np.random.Generator, uniform: np.random.Generator) -> np.ndarray:
        """n jump sizes from the normalized measure restricted to [ε, ∞)."""
        pareto = lambda k: eps * (1.0 - rng.random(k)) ** (-1.0 / self.alpha)  # noqa: E731
        if self.theta == 0.0:
            return pareto(n)
        out = np.empty(n)
        filled = 0
        for _ in range(MAX_REJECTION_ROUNDS):
            need = n - filled
            proposal = pareto(need)
            keep = proposal[uniform.random(need) < np.exp(-self.theta * (proposal - eps))]
            out[filled:filled + keep.size] = keep
            filled += keep.size
            if filled == n:
                return out
        raise RNGError(f"tempered jump sampler accepted {filled}/{n} after {MAX_REJECTION_ROUNDS} rounds")


def _sides(family: LevyMeasureSpec) -> List[_Side]:
    if family is None:
        return []
    if isinstance(family, StablePositive):
        return [_Side(1.0, family.density_scale, family.alpha, 0.0)]
    if isinstance(family, TemperedStablePositive):
        return [_Side(1.0, family.c_alpha, family.alpha, family.theta)]
    if isinstance(family, CGMY):
        return [_Side(1.0, family.c, family.y, family.m), _Side(-1.0, family.c, family.y, family.g)]
    raise ConfigError(f"unsupported jump family {type(family).__name__}")


@lru_cache(maxsize=64)
def jump_rates(family: LevyMeasureSpec, eps: float) -> Tuple[Tuple[float, ...], float, float]:
    """(tail mass per side, compensation drift rate, small-jump variance rate).

    The drift follows the truncation convention of each role:
    branching π (α > 1) is fully compensated, immigration ν (α < 1) is not
    compensated so the dropped small jumps contribute their mean, and the
    CGMY noise measure is compensated on {|z| < 1} only.
    """
    sides = _sides(family)
    masses = tuple(s.integral(0.0, eps, INF) for s in sides)
    variance = sum(s.integral(2.0, 0.0, eps) for s in sides)
    if isinstance(family, CGMY):
        drift = -sum(s.sign * s.integral(1.0, eps, 1.0) for s in sides)
    elif family is not None and family.alpha > 1.0:
        drift = -sum(s.sign * s.integral(1.0, eps, INF) for s in sides)
    else:
        drift = sum(s.sign * s.integral(1.0, 0.0, eps) for s in sides)
    return masses, drift, variance


def tail_mass(family: LevyMeasureSpec, eps: float) -> float:
    """Total mass of the measure on {|x| >= ε}."""
    return sum(jump_rates(family, eps)[0])


def sample_levy_increment(
    family: LevyMeasureSpec,
    time_product,
    eps: float,
    rng: np.random.Generator,
    uniform: Optional[np.random.Generator] = None,
):
    """Jump sum and compensation drift over an intensity-time product.

    Args:
        family: jump measure
        time_product: scalar or array of (intensity × time), >= 0
        eps: small-jump cutoff, 0 < ε < 1
        rng: stream for counts and sizes
        uniform: stream for rejection tests (defaults to rng)

    Returns:
        (jump_sum, drift) with the shape of time_product
    """
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps={eps} must lie in (0, 1)", location="eps")
    tp = np.asarray(time_product, dtype=float)
    scalar = tp.ndim == 0
    tp = np.atleast_1d(tp)
    if np.any(tp < 0.0):
        raise ConfigError("time_product must be >= 0")
    total = np.zeros_like(tp)
    drift = np.zeros_like(tp)
    if family is not None:
        uniform = uniform if uniform is not None else rng
        masses, drift_rate, _ = jump_rates(family, eps)
        for side, mass in zip(_sides(family), masses):
            counts = rng.poisson(tp * mass)
            n = int(counts.sum())
            if n:
                sizes = side.sample(n, eps, rng, uniform)
                owner = np.repeat(np.arange(tp.size), counts.ravel())
                total += side.sign * np.bincount(owner, weights=sizes, minlength=tp.size).reshape(tp.shape)
        drift = tp * drift_rate
    if scalar:
        return float(total[0]), float(drift[0])
    return total, drift


# =============================================================================
# Per-path streams
# =============================================================================

def _streams(seed: int, route: int, path: int) -> Tuple[np.random.Generator, ...]:
    """Gaussian, jump-count, jump-size and uniform Philox streams of one path."""
    seq = np.random.SeedSequence(int(seed), spawn_key=(route, path))
    return tuple(np.random.Generator(np.random.Philox(child)) for child in seq.spawn(4))


class _Chunked:
    """A fixed number of draws per tick, taken CHUNK_TICKS ticks at a time from each path's stream."""

    def __init__(self, streams: Sequence[np.random.Generator], width: int, normal: bool):
        self.streams = streams
        self.shape = (CHUNK_TICKS, width)
        self.normal = normal
        self.block = np.empty((0, width, len(streams)))
        self.pos = 0

    def next(self) -> np.ndarray:
        """(width, paths) draws of the next tick."""
        if self.pos == self.block.shape[0]:
            if self.normal:
                rows = [g.standard_normal(self.shape) for g in self.streams]
            else:
                rows = [g.random(self.shape) for g in self.streams]
            self.block = np.stack(rows, axis=-1)
            self.pos = 0
        row = self.block[self.pos]
        self.pos += 1
        return row


def _poisson_counts(u: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Poisson(mu) counts by inverting the CDF at u, elementwise."""
    counts = np.zeros(mu.shape, dtype=np.int64)
    large = mu > COUNT_SEARCH_LIMIT
    if large.any():
        counts[large] = np.maximum(stats.poisson.ppf(u[large], mu[large]), 0.0).astype(np.int64)
    small = np.flatnonzero((mu > 0.0) & ~large)
    if small.size == 0:
        return counts
    uu, m = u[small], mu[small]
    pmf = np.exp(-m)
    cdf = pmf.copy()
    k = np.zeros(small.size, dtype=np.int64)
    active = uu > cdf
    for _ in range(MAX_COUNT_SEARCH):
        if not active.any():
            break
        k[active] += 1
        pmf[active] *= m[active] / k[active]
        cdf[active] += pmf[active]
        active &= uu > cdf
    if active.any():
        # u within round-off of 1
        k[active] = np.maximum(stats.poisson.ppf(uu[active], m[active]), 0.0).astype(np.int64)
    counts[small] = k
    return counts


class _SizeBuffer:
    """Accepted jump sizes of one measure side, one row per path, consumed in draw order."""

    def __init__(self, side: _Side, eps: float, sizes: Sequence[np.random.Generator],
                 uniforms: Sequence[np.random.Generator]):
        n = len(sizes)
        self.side = side
        self.eps = eps
        self.sizes = sizes
        self.uniforms = uniforms
        self.raw = np.zeros((n, 0))
        self.cum = np.zeros((n, 1))
        self.cursor = np.zeros(n, dtype=np.int64)
        self.avail = np.zeros(n, dtype=np.int64)
        self.rows = np.arange(n)

    def take(self, counts: np.ndarray) -> np.ndarray:
        """Sum of the next counts[p] sizes of every path p."""
        for p in np.flatnonzero(self.cursor + counts > self.avail):
            self._refill(int(p), int(counts[p]))
        end = self.cursor + counts
        total = self.cum[self.rows, end] - self.cum[self.rows, self.cursor]
        self.cursor = end
        return total

    def _refill(self, p: int, count: int) -> None:
        left = self.raw[p, self.cursor[p]:self.avail[p]]
        fresh = self.side.sample(max(SIZE_BLOCK, count - left.size), self.eps, self.sizes[p], self.uniforms[p])
        row = np.concatenate([left, fresh])
        grow = row.size - self.raw.shape[1]
        if grow > 0:
            self.raw = np.pad(self.raw, ((0, 0), (0, grow)))
            self.cum = np.pad(self.cum, ((0, 0), (0, grow)), mode="edge")
        self.raw[p, :row.size] = row
        self.cum[p, 0] = 0.0
        self.cum[p, 1:row.size + 1] = np.cumsum(row)
        self.cursor[p] = 0
        self.avail[p] = row.size


class _JumpSource:
    """Jump increments of one Lévy measure for a block of paths."""

    def __init__(self, family: LevyMeasureSpec, cfg: SimConfig, sizes, uniforms):
        self.masses, self.drift_rate, self.variance = jump_rates(family, cfg.eps)
        self.buffers = [_SizeBuffer(side, cfg.eps, sizes, uniforms) for side in _sides(family)]
        self.diffusion = cfg.small_jumps is SmallJumpMode.DIFFUSION_APPROX

    def increment(self, tp: np.ndarray, count_draws: np.ndarray, normal: np.ndarray) -> np.ndarray:
        inc = tp * self.drift_rate
        for buf, mass, u in zip(self.buffers, self.masses, count_draws):
            inc = inc + buf.side.sign * buf.take(_poisson_counts(u, tp * mass))
        if self.diffusion:
            inc = inc + np.sqrt(tp * self.variance) * normal
        return inc


class _PathDraws:
    """Random inputs of paths first, ..., first + count − 1, each read from its own streams.

    Every tick takes two Brownian normals plus one small-jump normal per jump
    measure from the Gaussian stream, so neither ε nor the small-jump mode
    moves the Brownian path.
    """

    def __init__(self, cfg: SimConfig, route: int, first: int, count: int,
                 families: Sequence[LevyMeasureSpec]):
        gauss, counts, sizes, uniforms = (list(s) for s in zip(*(_streams(cfg.seed, route, first + i)
                                                                 for i in range(count))))
        self.sources: List[Optional[_JumpSource]] = []
        self.count_rows: List[int] = []
        self.normal_rows: List[int] = []
        n_sides = 0
        for family in families:
            source = None if family is None else _JumpSource(family, cfg, sizes, uniforms)
            self.sources.append(source)
            self.count_rows.append(n_sides)
            self.normal_rows.append(2 + sum(s is not None for s in self.sources[:-1]))
            if source is not None:
                n_sides += len(source.buffers)
        n_normals = 2 + sum(s is not None for s in self.sources)
        self.gauss = _Chunked(gauss, n_normals, normal=True)
        self.counts = _Chunked(counts, n_sides, normal=False) if n_sides else None
        self._normals = self._count_draws = None

    def tick(self) -> np.ndarray:
        """Advance one tick; returns the (2, count) Brownian normals."""
        self._normals = self.gauss.next()
        self._count_draws = self.counts.next() if self.counts is not None else None
        return self._normals[:2]

    def jump(self, role: int, tp: np.ndarray) -> np.ndarray:
        source = self.sources[role]
        k = self.count_rows[role]
        return source.increment(tp, self._count_draws[k:k + len(source.buffers)], self._normals[self.normal_rows[role]])


# =============================================================================
# Moments and checks
# =============================================================================

def mean_x(model: CBITCLModel, t: float) -> float:
    """E[X_t] = X0 e^{−b_X t} + (Ψ′(0)/b_X)(1 − e^{−b_X t})."""
    try:
        drift = float(model.immigration.psi_prime(0.0))
    except EndpointDerivativeUnavailable:
        return INF
    b = model.branching.b
    if b == 0.0:
        return model.x0 + drift * t
    decay = math.exp(-b * t)
    return model.x0 * decay + drift / b * (1.0 - decay)


def check_stability(model: CBITCLModel, cfg: SimConfig) -> float:
    """Δ · (jump intensity per unit X) · E[X]; warns when it exceeds STABILITY_LIMIT."""
    intensity = tail_mass(model.branching.pi, cfg.eps) + tail_mass(model.noise.gamma, cfg.eps)
    if intensity == 0.0:
        return 0.0
    level = max(model.x0, mean_x(model, cfg.horizon))
    value = cfg.dt * intensity * level
    if value > STABILITY_LIMIT:
        warnings.warn(
            f"step {cfg.dt:.3g} is coarse for a jump intensity of {intensity:.3g} per unit X "
            f"(Δ·intensity·E[X] = {value:.3g})",
            SimulationStabilityWarning,
            stacklevel=3,
        )
    return value


# =============================================================================
# Batch drivers
# =============================================================================

def _families(model: CBITCLModel) -> Tuple[LevyMeasureSpec, LevyMeasureSpec, LevyMeasureSpec]:
    return model.immigration.nu, model.branching.pi, model.noise.gamma


def _euler_batch(model: CBITCLModel, cfg: SimConfig, first: int, count: int):
    draws = _PathDraws(cfg, ROUTE_EULER, first, count, _families(model))
    dt = cfg.dt
    br, im, no, rho = model.branching, model.immigration, model.noise, model.rho
    rho_bar = math.sqrt(max(0.0, 1.0 - rho * rho))
    record = set(cfg.record_index.tolist())
    n_rec = len(record)

    out_x = np.empty((count, n_rec))
    out_y = np.empty((count, n_rec))
    out_z = np.empty((count, n_rec))
    x = np.full(count, float(model.x0))
    y = np.zeros(count)
    z = np.zeros(count)
    out_x[:, 0], out_y[:, 0], out_z[:, 0] = x, y, z
    col = 1
    constant_dt = np.full(count, dt)

    for k in range(1, cfg.n_steps + 1):
        xp = np.maximum(x, 0.0)
        w = draws.tick()
        clock = xp * dt
        root = np.sqrt(clock)

        dx = (im.beta - br.b * xp) * dt + br.sigma * root * w[0]
        dz = no.b * clock + no.sigma * root * (rho * w[0] + rho_bar * w[1])
        if im.nu is not None:
            dx += draws.jump(IMMIGRATION, constant_dt)
        if br.pi is not None:
            dx += draws.jump(BRANCHING, clock)
        if no.gamma is not None:
            dz += draws.jump(NOISE, clock)

        # Full truncation: the auxiliary x may go negative, X = max(x, 0).
        x = x + dx
        x_next = np.maximum(x, 0.0)
        y = y + 0.5 * (xp + x_next) * dt
        z = z + dz
        if k in record:
            out_x[:, col], out_y[:, col], out_z[:, col] = x_next, y, z
            col += 1
    return out_x, out_y, out_z


def _lamperti_batch(model: CBITCLModel, cfg: SimConfig, first: int, count: int):
    draws = _PathDraws(cfg, ROUTE_LAMPERTI, first, count, _families(model))
    br, im, no, rho = model.branching, model.immigration, model.noise, model.rho
    rho_bar = math.sqrt(max(0.0, 1.0 - rho * rho))
    record = set(cfg.record_index.tolist())
    n_rec = len(record)
    delta = cfg.dt / cfg.substeps
    constant_delta = np.full(count, delta)

    out_x = np.empty((count, n_rec))
    out_y = np.empty((count, n_rec))
    out_z = np.empty((count, n_rec))
    # X = X0 + M_Y + K with M, N Lévy processes on the business clock Y.
    m = np.zeros(count)
    big_k = np.zeros(count)
    n = np.zeros(count)
    y = np.zeros(count)
    x = np.full(count, float(model.x0))
    out_x[:, 0], out_y[:, 0], out_z[:, 0] = x, y, n
    col = 1

    for k in range(1, cfg.n_steps + 1):
        for _ in range(cfg.substeps):
            dy = x * delta
            root = np.sqrt(dy)
            w = draws.tick()
            dm = -br.b * dy + br.sigma * root * w[0]
            dn = no.b * dy + no.sigma * root * (rho * w[0] + rho_bar * w[1])
            dk = im.beta * delta
            if br.pi is not None:
                dm = dm + draws.jump(BRANCHING, dy)
            if no.gamma is not None:
                dn = dn + draws.jump(NOISE, dy)
            if im.nu is not None:
                dk = dk + draws.jump(IMMIGRATION, constant_delta)
            m, n, big_k, y = m + dm, n + dn, big_k + dk, y + dy
            x = np.maximum(model.x0 + m + big_k, 0.0)
        if k in record:
            out_x[:, col], out_y[:, col], out_z[:, col] = x, y, n
            col += 1
    return out_x, out_y, out_z


def _run(model: CBITCLModel, cfg: SimConfig, driver, route: int) -> PathSet:
    check_stability(model, cfg)
    batches: List[Tuple[int, int]] = [
        (first, min(cfg.batch_size, cfg.paths - first)) for first in range(0, cfg.paths, cfg.batch_size)
    ]

    def work(item):
        first, count = item
        return driver(model, cfg, first, count)

    workers = min(cfg.resolved_workers, len(batches))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, batches))
    else:
        results = [work(item) for item in batches]

    X = np.concatenate([r[0] for r in results])
    Y = np.concatenate([r[1] for r in results])
    Z = np.concatenate([r[2] for r in results])
    stream_ids = [(route, path) for path in range(cfg.paths)]
    times = cfg.record_index * cfg.dt
    config = {"route": "euler" if route == ROUTE_EULER else "lamperti", **cfg.to_dict()}
    logger.debug("simulated %d paths in %d batches (%s)", cfg.paths, len(batches), config["route"])
    return PathSet(times=times, X=X, Y=Y, Z=Z, stream_ids=stream_ids, config=config)


def simulate_paths(model: CBITCLModel, cfg: SimConfig) -> PathSet:
    """Euler–Maruyama simulation of the SDE system on a uniform grid."""
    return _run(model, cfg, _euler_batch, ROUTE_EULER)


def simulate_lamperti(model: CBITCLModel, cfg: SimConfig) -> PathSet:
    """Time-change simulation: Lévy increments of M and N over the clock increments of Y."""
    return _run(model, cfg, _lamperti_batch, ROUTE_LAMPERTI)
