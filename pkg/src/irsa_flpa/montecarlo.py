"""Seeded Monte Carlo simulation of IRSA frames.

Every trial draws from its own Philox stream keyed by ``master_seed`` and
offset by the trial index, so a trial's collision matrix does not depend
on how trials are split across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import DegreeDistribution, SystemConfig
from .sic import peel_rows

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    trials: int = 1000
    master_seed: int = 0
    parallel_chunks: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.parallel_chunks < 1:
            raise ConfigError(f"parallel_chunks must be >= 1, got {self.parallel_chunks}")
        if not 0 <= self.master_seed <= _MASK64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")


@dataclass(frozen=True)
class SimEstimate:
    """Empirical residual distribution from ``trials`` simulated frames."""

    k: int
    counts: dict[int, int]
    trials: int
    seed: int

    @property
    def pmf_hat(self) -> dict[int, float]:
        return {u: c / self.trials for u, c in sorted(self.counts.items())}

    @property
    def plr_hat(self) -> float:
        return sum(u * c for u, c in self.counts.items()) / (self.k * self.trials)

    @property
    def stderr(self) -> float:
        """Sample standard deviation of u/k over the trials, divided by sqrt(trials)."""
        n = self.trials
        if n < 2:
            return 0.0
        mean = self.plr_hat
        ss = sum(c * (u / self.k - mean) ** 2 for u, c in self.counts.items())
        return math.sqrt(ss / (n - 1)) / math.sqrt(n)


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for trial ``index``.

    The Philox counter starts at ``index * 2**128``; each stream has room for
    2**128 draws before touching the next one.
    """
    counter = [0, 0, index & _MASK64, (index >> 64) & _MASK64]
    return np.random.Generator(np.random.Philox(key=master_seed, counter=counter))


class _Sampler:
    """Degree and slot sampling for one (Lambda, k, t) setting."""

    def __init__(self, dist: DegreeDistribution, cfg: SystemConfig):
        dist.check_against(cfg)
        self.k, self.t = cfg.k, cfg.t
        self.support = list(dist.support)
        cum = np.cumsum([float(dist.probs[d]) for d in self.support])
        cum[-1] = 1.0
        self.cum = cum

    def rows(self, rng: np.random.Generator) -> list[int]:
        """Per-user slot bitmasks for one frame."""
        k, t = self.k, self.t
        u = rng.random(k * (t + 1))
        idx = np.searchsorted(self.cum, u[:k], side="right")
        np.minimum(idx, len(self.support) - 1, out=idx)
        rest = u[k:].tolist()
        rows = []
        for i, di in enumerate(idx.tolist()):
            d = self.support[di]
            slots = list(range(t))
            base = i * t
            mask = 0
            # partial Fisher-Yates: the first d positions become a uniform d-subset
            for j in range(d):
                r = j + int(rest[base + j] * (t - j))
                slots[j], slots[r] = slots[r], slots[j]
                mask |= 1 << slots[j]
            rows.append(mask)
        return rows


def rows_to_matrix(rows, t: int) -> np.ndarray:
    M = np.zeros((len(rows), t), dtype=np.uint8)
    for i, r in enumerate(rows):
        for j in range(t):
            if (r >> j) & 1:
                M[i, j] = 1
    return M


def sample_matrix(dist: DegreeDistribution, cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """One k x t collision matrix: per-user degree from Lambda, then a uniform slot subset."""
    return rows_to_matrix(_Sampler(dist, cfg).rows(rng), cfg.t)


def run_trial(dist: DegreeDistribution, cfg: SystemConfig, master_seed: int, index: int) -> int:
    """Undecoded-user count of trial ``index``."""
    return peel_rows(_Sampler(dist, cfg).rows(trial_rng(master_seed, index)))


def _run_chunk(args):
    dist, cfg, seed, lo, hi = args
    sampler = _Sampler(dist, cfg)
    counts: dict[int, int] = {}
    for index in range(lo, hi):
        u = peel_rows(sampler.rows(trial_rng(seed, index)))
        counts[u] = counts.get(u, 0) + 1
    return counts


def simulate(dist: DegreeDistribution, cfg: SystemConfig, sim: SimConfig = SimConfig()) -> SimEstimate:
    """Estimate the residual pmf and P_L from ``sim.trials`` random frames.

    With ``parallel_chunks > 1`` the trial range is split into contiguous
    chunks run in worker processes; the result is identical to a serial run.
    """
    dist.check_against(cfg)
    n_chunks = min(sim.parallel_chunks, sim.trials)
    bounds = np.linspace(0, sim.trials, n_chunks + 1).astype(int).tolist()
    jobs = [(dist, cfg, sim.master_seed, lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
    if n_chunks > 1:
        with ProcessPoolExecutor(max_workers=n_chunks) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(jobs[0])]
    counts: dict[int, int] = {}
    for part in parts:
        for u, c in part.items():
            counts[u] = counts.get(u, 0) + c
    return SimEstimate(cfg.k, dict(sorted(counts.items())), sim.trials, sim.master_seed)
