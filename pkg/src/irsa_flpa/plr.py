"""Packet-loss rate of a finite IRSA frame.

``exact_plr`` sums over degree-vector classes and, for each, over the
feasible reduced occupancy vectors; ``oracle_plr`` gets the same numbers by
listing every collision matrix. Both return a :class:`PlrReport` whose
probabilities are exact fractions.
"""
from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

from .errors import BudgetExceeded, ConfigError
from .model import (
    DEFAULT_MAX_K,
    DegreeDistribution,
    SystemConfig,
    degree_vector_classes,
    enumerate_degree_vectors,
    parse_rational,
    validate_degree_vector,
)
from .occupancy import (
    DEFAULT_NODE_BUDGET,
    assemble,
    class_size,
    enumerate_feasible,
    matrix_count,
)
from .sic import peel_rows, residual_count

log = logging.getLogger(__name__)

DEFAULT_MLV_THRESHOLD = Fraction(1, 1000)
DEFAULT_ORACLE_BUDGET = 10**7


def render(p, decimals: int = 6) -> str:
    """Fixed-point string of an exact probability, rounded half to even."""
    if not isinstance(p, Fraction):
        return f"{p:.{decimals}f}"
    scaled = round(p * 10**decimals)  # Fraction.__round__ is half-to-even
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**decimals)
    return f"{sign}{whole}.{frac:0{decimals}d}" if decimals else f"{sign}{whole}"


@dataclass
class PlrReport:
    """Residual-count distribution and packet-loss rate.

    ``pmf`` maps the number of undecoded users ``u`` (0 and 2..k) to its
    probability. In MLV mode it only carries the mass of the evaluated
    degree vectors (it sums to ``coverage``); ``plr`` is then the loss rate
    conditional on that mass and ``plr_lower_bound`` the unconditional sum.
    """

    k: int
    t: int
    mode: str
    pmf: dict[int, Fraction]
    coverage: Fraction = Fraction(1)
    stats: dict = field(default_factory=dict)

    @property
    def plr_lower_bound(self) -> Fraction:
        """sum_u (u/k) pmf(u), counting skipped mass as decoded."""
        return sum((Fraction(u, self.k) * p for u, p in self.pmf.items()), Fraction(0))

    @property
    def plr(self) -> Fraction:
        if self.coverage == 1:
            return self.plr_lower_bound
        if self.coverage == 0:
            return Fraction(0)
        return self.plr_lower_bound / self.coverage

    @property
    def throughput(self) -> float:
        """Decoded users per slot, (1 - P_L) k / t."""
        return float((1 - self.plr) * Fraction(self.k, self.t))

    @property
    def G(self) -> Fraction:
        return Fraction(self.k, self.t)

    def pmf_float(self) -> dict[int, float]:
        return {u: float(p) for u, p in self.pmf.items()}

    def rendered(self, decimals: int = 6) -> dict[str, str]:
        out = {f"pmf({u})": render(p, decimals) for u, p in self.pmf.items()}
        out["P_L"] = render(self.plr, decimals)
        return out


def _empty_pmf(k: int) -> dict[int, Fraction]:
    return {u: Fraction(0) for u in (0, *range(2, k + 1))}


def _check_inputs(dist: DegreeDistribution, cfg: SystemConfig, max_k: int | None = None):
    dist.check_against(cfg)
    if max_k is not None and cfg.k > max_k:
        raise ConfigError(f"k={cfg.k} exceeds the exact-mode cap of {max_k}")


def residual_counts(d: Sequence[int], cfg: SystemConfig, *, budget: int = DEFAULT_NODE_BUDGET,
                    shard=None, max_k: int = DEFAULT_MAX_K) -> dict[int, int]:
    """Number of collision matrices for ``d`` that stop with ``u`` undecoded users."""
    counts = {u: 0 for u in (0, *range(2, cfg.k + 1))}
    for reduced, comp in enumerate_feasible(d, cfg, budget=budget, shard=shard, max_k=max_k):
        u = residual_count(assemble(reduced, comp, cfg.k), cfg.k)
        counts[u] += class_size(reduced, comp, cfg.t)
    return counts


def conditional_pmf(d: Sequence[int], cfg: SystemConfig, *, budget: int = DEFAULT_NODE_BUDGET,
                    max_k: int = DEFAULT_MAX_K) -> dict[int, Fraction]:
    """P(u | d) for every u in {0, 2, ..., k}."""
    d = validate_degree_vector(d, cfg)
    if any(di > cfg.t for di in d):
        raise ConfigError(f"degree vector {list(d)} needs more than t={cfg.t} slots")
    total = matrix_count(d, cfg.t)
    return {u: Fraction(c, total) for u, c in residual_counts(d, cfg, budget=budget, max_k=max_k).items()}


@lru_cache(maxsize=4096)
def _cached_counts(d, cfg, budget, max_k):
    return residual_counts(d, cfg, budget=budget, max_k=max_k)


def _class_job(args):
    d, cfg, budget, max_k = args
    start = time.perf_counter()
    counts = _cached_counts(d, cfg, budget, max_k)
    return dict(counts), time.perf_counter() - start


def _accumulate(dist, cfg, classes, budget, max_k, workers):
    """Weighted sum of conditional pmfs over the given degree classes."""
    pmf = _empty_pmf(cfg.k)
    jobs = [(d, cfg, budget, max_k) for d, _, _ in classes]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_class_job, jobs))
    else:
        results = [_class_job(j) for j in jobs]
    # reduction in class order keeps serial and parallel runs identical
    for (d, mult, p), (counts, _) in zip(classes, results):
        weight = mult * p / matrix_count(d, cfg.t)
        for u, c in counts.items():
            pmf[u] += weight * c
    return pmf


def exact_plr(dist: DegreeDistribution, cfg: SystemConfig, *, budget: int = DEFAULT_NODE_BUDGET,
              max_k: int = DEFAULT_MAX_K, workers: int | None = None) -> PlrReport:
    """Exact residual pmf and P_L by occupancy enumeration.

    Permuted degree vectors share P(u|d), so each sorted multiset is
    evaluated once and weighted by its number of orderings.
    """
    _check_inputs(dist, cfg, max_k)
    start = time.perf_counter()
    classes = list(degree_vector_classes(dist, cfg.k))
    pmf = _accumulate(dist, cfg, classes, budget, max_k, workers)
    return PlrReport(cfg.k, cfg.t, "exact", pmf, Fraction(1), {
        "classes_evaluated": len(classes),
        "classes_total": len(classes),
        "vectors_evaluated": dist.D ** cfg.k,
        "seconds": time.perf_counter() - start,
    })


def mlv_plr(dist: DegreeDistribution, cfg: SystemConfig, threshold=DEFAULT_MLV_THRESHOLD, *,
            budget: int = DEFAULT_NODE_BUDGET, max_k: int = DEFAULT_MAX_K,
            workers: int | None = None) -> PlrReport:
    """Most-likely-vectors approximation.

    Only degree vectors with prod Lambda_{d_i} >= ``threshold`` are decoded.
    The skipped probability mass is left out of the pmf and reported as
    ``1 - coverage``; ``report.plr`` is the loss rate given that the degree
    vector is one of the evaluated ones.
    """
    threshold = parse_rational(threshold)
    if not 0 <= threshold <= 1:
        raise ConfigError(f"MLV threshold must lie in [0, 1], got {threshold}")
    _check_inputs(dist, cfg, max_k)
    start = time.perf_counter()
    all_classes = list(degree_vector_classes(dist, cfg.k))
    kept = [cl for cl in all_classes if cl[2] >= threshold]
    coverage = sum((mult * p for _, mult, p in kept), Fraction(0))
    if kept:
        pmf = _accumulate(dist, cfg, kept, budget, max_k, workers)
    else:
        pmf = {}
        log.warning("MLV threshold %s leaves no degree vector to evaluate (coverage 0)", threshold)
    return PlrReport(cfg.k, cfg.t, f"mlv({threshold})", pmf, coverage, {
        "classes_evaluated": len(kept),
        "classes_total": len(all_classes),
        "vectors_evaluated": sum(mult for _, mult, _ in kept),
        "seconds": time.perf_counter() - start,
    })


def oracle_plr(dist: DegreeDistribution, cfg: SystemConfig, *,
               budget: int = DEFAULT_ORACLE_BUDGET) -> PlrReport:
    """Brute force: decode every collision matrix of every degree vector."""
    dist.check_against(cfg)
    k, t = cfg.k, cfg.t
    total = sum(math.comb(t, d) for d in dist.support) ** k
    if total > budget:
        raise BudgetExceeded(f"oracle needs {total} matrices, budget is {budget}",
                             visited=0, produced=0, budget=budget)
    start = time.perf_counter()
    pmf = _empty_pmf(k)
    for d, p in enumerate_degree_vectors(dist, k):
        counts = oracle_conditional_counts(d, t)
        n_mat = matrix_count(d, t)
        for u, c in counts.items():
            pmf[u] += p * Fraction(c, n_mat)
    return PlrReport(k, t, "oracle", pmf, Fraction(1), {
        "matrices": total,
        "seconds": time.perf_counter() - start,
    })


def row_choices(d: int, t: int) -> list[int]:
    """All d-subsets of the t slots as bitmasks."""
    return [sum(1 << s for s in combo) for combo in itertools.combinations(range(t), d)]


def oracle_conditional_counts(d: Sequence[int], t: int) -> dict[int, int]:
    """Residual counts over all prod binom(t, d_i) matrices for degree vector ``d``."""
    k = len(d)
    counts = {u: 0 for u in (0, *range(2, k + 1))}
    for rows in itertools.product(*(row_choices(di, t) for di in d)):
        counts[peel_rows(rows)] += 1
    return counts


def oracle_conditional_pmf(d: Sequence[int], t: int) -> dict[int, Fraction]:
    n_mat = matrix_count(d, t)
    return {u: Fraction(c, n_mat) for u, c in oracle_conditional_counts(d, t).items()}


def reduced_pattern_count(k: int) -> int:
    """Number of column patterns of weight at most k-2."""
    return sum(math.comb(k, n) for n in range(0, k - 1))


def complexity_estimate(dist: DegreeDistribution, cfg: SystemConfig) -> dict:
    """|D| = D**k and the stars-and-bars bound on the feasible reduced vectors."""
    c_hat = reduced_pattern_count(cfg.k)
    return {
        "num_degree_vectors": dist.D ** cfg.k,
        "reduced_patterns": c_hat,
        "occupancy_bound": math.comb(c_hat + cfg.t - 1, cfg.t),
    }

