"""Simulation engine: stream derivation, chunking, worker dispatch, backend selection.

Reproducibility contract: every path owns an RNG stream derived from
(seed, stream_index) through SeedSequence, so results are bit-identical for
any chunk size and any worker count.  Antithetic twins (odd path indices)
replay the even twin's stream with all uniforms reflected and all block
normals negated.

The compiled kernels are used when importable; set CREDITFX_PURE_PYTHON=1 to
force the fallback.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..affine import CirPpParams
from ..riccati import AjdParams, DiracJumps, ExponentialJumps

__all__ = [
    "SimConfig",
    "PathBundle",
    "DiscountEstimates",
    "simulate_xy",
    "simulate_cir",
    "backend_name",
]

_DT_CAP = 1.0 / 252.0
_GRID_TOL = 1e-9


def _select_backend():
    if os.environ.get("CREDITFX_PURE_PYTHON"):
        from . import _pykernels

        return _pykernels
    try:
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    except ImportError:
        from . import _pykernels

        return _pykernels


_BACKEND = _select_backend()


def backend_name() -> str:
    return _BACKEND.BACKEND


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo run configuration.

    record_times limits state storage to the listed grid times (None keeps the
    full step grid; at 1e5 paths and thousands of steps that is gigabytes, so
    estimator-driven runs list only the payoff dates).
    """

    n_paths: int
    dt: float
    horizon: float
    seed: int
    antithetic: bool = False
    record_times: Optional[tuple] = None
    workers: int = 1
    chunk_size: Optional[int] = None
    collect_jumps: bool = True

    def __post_init__(self):
        if self.n_paths < 100:
            raise ValueError(f"n_paths must be >= 100, got {self.n_paths}")
        if not (0.0 < self.dt <= _DT_CAP + 1e-15):
            raise ValueError(f"dt must lie in (0, 1/252], got {self.dt}")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        n_steps = round(self.horizon / self.dt)
        if n_steps < 1 or abs(n_steps * self.dt - self.horizon) > _GRID_TOL:
            raise ValueError(
                f"horizon {self.horizon} is not a whole number of steps of {self.dt}"
            )
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling needs an even n_paths")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.record_times is not None:
            times = tuple(sorted(set(float(t) for t in self.record_times)))
            object.__setattr__(self, "record_times", times)

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.dt)

    @property
    def dt_effective(self) -> float:
        return self.horizon / self.n_steps


@dataclass(eq=False)
class PathBundle:
    """Recorded simulation output: times grid, state matrices and per-path jump times."""

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    jump_times: Optional[list]
    config: SimConfig

    @property
    def n_paths(self) -> int:
        return self.x.shape[0]

    def index_of(self, t: float) -> int:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(float(self.times[idx]) - t) > _GRID_TOL:
            if t > float(self.times[-1]) + _GRID_TOL:
                raise ValueError(
                    f"payoff time {t} exceeds the simulated horizon {self.times[-1]}"
                )
            raise ValueError(f"time {t} was not recorded")
        return idx

    def x_at(self, t: float) -> np.ndarray:
        return self.x[:, self.index_of(t)]

    def y_at(self, t: float) -> np.ndarray:
        return self.y[:, self.index_of(t)]


@dataclass(frozen=True, eq=False)
class DiscountEstimates:
    """Per-tenor Monte-Carlo discount factors with standard errors."""

    tenors: np.ndarray
    values: np.ndarray
    standard_errors: np.ndarray
    n_samples: int


def _par_tuple(p: AjdParams) -> tuple:
    if isinstance(p.jumps, ExponentialJumps):
        kind, jp1, jp2 = 0, p.jumps.lam_x, 0.0
    else:
        kind, jp1, jp2 = 1, p.jumps.j_x, p.jumps.j_y
    return (p.sigma_x, p.sigma_y, p.m, p.mu_x, p.mu_y, kind, jp1, jp2)


def _record_steps(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    n_steps = cfg.n_steps
    dt = cfg.dt_effective
    if cfg.record_times is None:
        steps = np.arange(n_steps + 1, dtype=np.int64)
    else:
        steps = []
        for t in cfg.record_times:
            k = round(t / dt)
            if not (0 <= k <= n_steps) or abs(k * dt - t) > _GRID_TOL:
                raise ValueError(f"record time {t} is not on the step grid")
            steps.append(k)
        steps = np.array(sorted(set(steps)), dtype=np.int64)
    return steps, steps.astype(float) * dt


def _streams(cfg: SimConfig, start: int, count: int):
    """Per-path generators (twin pairs share a stream) and the tail-reflection flags."""
    gens = []
    anti = np.zeros(count, dtype=np.uint8)
    for i in range(count):
        path = start + i
        if cfg.antithetic:
            stream = path // 2
            anti[i] = path % 2
        else:
            stream = path
        ss = np.random.SeedSequence(entropy=int(cfg.seed), spawn_key=(stream,))
        gens.append(np.random.Generator(np.random.PCG64(ss)))
    return gens, anti


def _auto_chunk(n_steps: int) -> int:
    # keep the per-chunk block draws near ~160 MB
    return max(64, min(8192, int(1.6e8 / (24 * max(n_steps, 1)))))


def _chunk_ranges(n_paths: int, chunk: int) -> list[tuple[int, int]]:
    return [(s, min(s + chunk, n_paths)) for s in range(0, n_paths, chunk)]


def _xy_chunk(p: AjdParams, cfg: SimConfig, start: int, stop: int, kern):
    n = stop - start
    n_steps = cfg.n_steps
    dt = cfg.dt_effective
    rec_steps, _ = _record_steps(cfg)
    gens, anti = _streams(cfg, start, n)
    z = np.empty((n, 2 * n_steps))
    c = np.empty((n, n_steps))
    for i, g in enumerate(gens):
        z[i] = g.standard_normal(2 * n_steps)
        c[i] = g.random(n_steps)
    flip = anti.astype(bool)
    z[flip] *= -1.0
    c[flip] = 1.0 - c[flip]
    return kern.run_xy_chunk(
        _par_tuple(p), p.x0, p.y0, dt, n_steps, rec_steps, gens, z, c, anti,
        cfg.collect_jumps,
    )


def _xy_task(args):
    p, cfg, start, stop = args
    return _xy_chunk(p, cfg, start, stop, _BACKEND)


def simulate_xy(p: AjdParams, cfg: SimConfig, backend=None) -> PathBundle:
    """Simulate (X, Y) paths by thinning + full-truncation Euler; see module docstring."""
    kern = backend if backend is not None else _BACKEND
    rec_steps, times = _record_steps(cfg)
    chunk = cfg.chunk_size or _auto_chunk(cfg.n_steps)
    ranges = _chunk_ranges(cfg.n_paths, chunk)
    if cfg.workers == 1 or backend is not None:
        parts = [_xy_chunk(p, cfg, a, b, kern) for a, b in ranges]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_xy_task, [(p, cfg, a, b) for a, b in ranges]))
    x = np.vstack([pt[0] for pt in parts])
    y = np.vstack([pt[1] for pt in parts])
    jumps = None
    if cfg.collect_jumps:
        jumps = []
        for pt in parts:
            jumps.extend(pt[2])
    return PathBundle(times=times, x=x, y=y, jump_times=jumps, config=cfg)


def _cir_chunk(c: CirPpParams, cfg: SimConfig, shift_vals, start: int, stop: int, kern):
    n = stop - start
    n_steps = cfg.n_steps
    rec_steps, _ = _record_steps(cfg)
    gens, anti = _streams(cfg, start, n)
    z = np.empty((n, n_steps))
    for i, g in enumerate(gens):
        z[i] = g.standard_normal(n_steps)
    z[anti.astype(bool)] *= -1.0
    return kern.run_cir_chunk(
        c.b_x, c.beta_x, c.sigma_x, c.x0_state, shift_vals, cfg.dt_effective,
        n_steps, rec_steps, z,
    )


def _cir_task(args):
    c, cfg, shift_vals, start, stop = args
    return _cir_chunk(c, cfg, shift_vals, start, stop, _BACKEND)


def simulate_cir(
    c: CirPpParams, cfg: SimConfig, tenors: Optional[Sequence[float]] = None, backend=None
) -> DiscountEstimates:
    """Monte-Carlo discount factors E[exp(-integral r)] at the requested tenors.

    Full-truncation Euler on the square-root factor, trapezoidal integration of
    r = x + shift(t) along the step grid.
    """
    if c.x0_state < 0.0:
        raise ValueError(
            f"initial factor state r0 - shift(0) = {c.x0_state:.6g} must be nonnegative"
        )
    kern = backend if backend is not None else _BACKEND
    if tenors is None:
        tenors = (cfg.horizon,)
    cfg = SimConfig(
        n_paths=cfg.n_paths,
        dt=cfg.dt,
        horizon=cfg.horizon,
        seed=cfg.seed,
        antithetic=cfg.antithetic,
        record_times=tuple(tenors),
        workers=cfg.workers,
        chunk_size=cfg.chunk_size,
        collect_jumps=False,
    )
    rec_steps, times = _record_steps(cfg)
    grid = np.arange(cfg.n_steps + 1, dtype=float) * cfg.dt_effective
    shift_vals = np.array([c.shift(float(t)) for t in grid])
    chunk = cfg.chunk_size or _auto_chunk(cfg.n_steps)
    ranges = _chunk_ranges(cfg.n_paths, chunk)
    if cfg.workers == 1 or backend is not None:
        parts = [_cir_chunk(c, cfg, shift_vals, a, b, kern) for a, b in ranges]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(
                pool.map(_cir_task, [(c, cfg, shift_vals, a, b) for a, b in ranges])
            )
    integrals = np.vstack(parts)
    dfs = np.exp(-integrals)
    if cfg.antithetic:
        dfs = 0.5 * (dfs[0::2] + dfs[1::2])
    n = dfs.shape[0]
    values = dfs.mean(axis=0)
    ses = dfs.std(axis=0, ddof=1) / math.sqrt(n)
    return DiscountEstimates(
        tenors=times, values=values, standard_errors=ses, n_samples=n
    )
