"""Occupancy vectors of collision matrices.

An occupancy vector maps each column pattern to how many slots carry it.
The reduced vector keeps only patterns of weight <= k-2; the counts of the
k+1 heavier patterns (the k patterns missing exactly one user, plus the
all-ones pattern) are then forced by the frame length and the degree vector.
"""
from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from typing import Iterator, Mapping, NamedTuple, Sequence

from .errors import BudgetExceeded, ConfigError, PreconditionError
from .model import (
    DEFAULT_MAX_K,
    ColumnUniverse,
    SystemConfig,
    validate_degree_vector,
    weight,
)

Occupancy = dict[int, int]

DEFAULT_NODE_BUDGET = 10**9


class Completion(NamedTuple):
    """Forced counts of the k+1 heavy patterns.

    ``f[i]`` (i < k) counts the pattern missing only user ``i``; ``f[k]``
    counts the all-ones pattern.
    """

    f: tuple[int, ...]
    feasible: bool


def _check_reduced(reduced: Mapping[int, int], k: int) -> None:
    for c, n in reduced.items():
        if c < 0 or c >> k:
            raise PreconditionError(f"pattern {c:#b} does not fit in k={k} bits")
        if weight(c) > k - 2:
            raise PreconditionError(f"pattern {c:#b} has weight {weight(c)} > k-2")
        if n < 0:
            raise PreconditionError(f"negative count {n} for pattern {c:#b}")


def complete(reduced: Mapping[int, int], d: Sequence[int], cfg: SystemConfig) -> Completion:
    """Solve the frame-length and row-sum constraints for the heavy patterns.

    Row ``i`` must contain exactly ``t - d[i]`` columns with bit ``i`` clear
    (every weight, the empty column included).
    """
    k, t = cfg.k, cfg.t
    d = validate_degree_vector(d, cfg)
    _check_reduced(reduced, k)
    total = sum(reduced.values())
    if total > t:
        raise PreconditionError(f"reduced vector holds {total} columns, frame has {t}")
    a = [0] * k
    for c, n in reduced.items():
        for i in range(k):
            if (c >> i) & 1:
                a[i] += n
    f_all = sum(d) - sum(a) - (k - 1) * (t - total)
    heavy = t - total - f_all
    f = tuple(a[i] + heavy + f_all - d[i] for i in range(k)) + (f_all,)
    return Completion(f, all(x >= 0 for x in f))


def assemble(reduced: Mapping[int, int], comp: Completion, k: int) -> Occupancy:
    """Join a reduced vector and its completion into a full occupancy vector."""
    if not comp.feasible:
        raise PreconditionError("cannot assemble an infeasible completion")
    full = (1 << k) - 1
    n = {c: cnt for c, cnt in reduced.items() if cnt}
    for i in range(k):
        if comp.f[i]:
            n[full & ~(1 << i)] = comp.f[i]
    if comp.f[k]:
        n[full] = comp.f[k]
    return n


def class_size(reduced: Mapping[int, int], comp: Completion, t: int) -> int:
    """Number of collision matrices with this occupancy (the multinomial)."""
    denom = 1
    for n in reduced.values():
        denom *= math.factorial(n)
    for n in comp.f:
        denom *= math.factorial(n)
    return math.factorial(t) // denom


def matrix_count(d: Sequence[int], t: int) -> int:
    """prod_i binom(t, d_i): all collision matrices for degree vector ``d``."""
    total = 1
    for di in d:
        total *= math.comb(t, di)
    return total


def occupancy_probability(reduced, comp: Completion, d: Sequence[int], cfg: SystemConfig) -> Fraction:
    """P(reduced | d); zero for an infeasible completion."""
    if not comp.feasible:
        return Fraction(0)
    return Fraction(class_size(reduced, comp, cfg.t), matrix_count(d, cfg.t))


def occupancy_of_matrix(M) -> Occupancy:
    """Occupancy vector of an explicit k x t 0/1 matrix (rows are users)."""
    rows = [list(r) for r in M]
    if not rows:
        raise ConfigError("empty matrix")
    t = len(rows[0])
    counts: Counter = Counter()
    for j in range(t):
        c = 0
        for i, row in enumerate(rows):
            if row[j]:
                c |= 1 << i
        counts[c] += 1
    return dict(counts)


def enumerate_feasible(
    d: Sequence[int],
    cfg: SystemConfig,
    *,
    budget: int = DEFAULT_NODE_BUDGET,
    shard: tuple[int, int] | None = None,
    max_k: int = DEFAULT_MAX_K,
) -> Iterator[tuple[Occupancy, Completion]]:
    """Yield every feasible reduced occupancy vector with its completion.

    Reduced vectors are generated as nondecreasing sequences of reduced
    patterns. A pattern may be added only if it keeps every row's one-count
    at most ``d[i]`` and its zero-count at most ``t - d[i]``; both bounds are
    necessary because the heavy patterns only add to either count.

    ``shard=(index, count)`` restricts the walk to top-level branches whose
    first pattern position is congruent to ``index`` mod ``count``; the
    empty reduced vector belongs to shard 0. Shards are disjoint and cover
    the full set.

    Raises:
        BudgetExceeded: more than ``budget`` search nodes were visited.
    """
    d = validate_degree_vector(d, cfg)
    k, t = cfg.k, cfg.t
    if k > max_k:
        raise ConfigError(f"k={k} exceeds the exact-enumeration cap of {max_k}")
    if shard is not None:
        index, count = shard
        if count < 1 or not 0 <= index < count:
            raise ConfigError(f"invalid shard {shard!r}")
    if any(di > t for di in d):
        return

    reduced = ColumnUniverse(k).reduced
    npat = len(reduced)
    ones_left = list(d)
    zeros_left = [t - di for di in d]
    chosen: list[int] = []
    stats = {"visited": 0, "produced": 0}

    def emit(r):
        f_all = r - sum(zeros_left)
        if f_all < 0:
            return None
        stats["produced"] += 1
        return dict(Counter(chosen)), Completion(tuple(zeros_left) + (f_all,), True)

    def walk(start, r, depth):
        stats["visited"] += 1
        if stats["visited"] > budget:
            raise BudgetExceeded(
                f"occupancy enumeration for d={list(d)} exceeded {budget} nodes "
                f"after yielding {stats['produced']} vectors",
                visited=stats["visited"] - 1,
                produced=stats["produced"],
                budget=budget,
            )
        if depth > 0 or shard is None or shard[0] == 0:
            item = emit(r)
            if item is not None:
                yield item
        if r == 0:
            return
        ones_mask = 0
        forced_mask = 0
        for i in range(k):
            if ones_left[i]:
                ones_mask |= 1 << i
            if not zeros_left[i]:
                forced_mask |= 1 << i
        for idx in range(start, npat):
            if depth == 0 and shard is not None and idx % shard[1] != shard[0]:
                continue
            c = reduced[idx]
            if c & ~ones_mask or forced_mask & ~c:
                continue
            for i in range(k):
                if (c >> i) & 1:
                    ones_left[i] -= 1
                else:
                    zeros_left[i] -= 1
            chosen.append(c)
            yield from walk(idx, r - 1, depth + 1)
            chosen.pop()
            for i in range(k):
                if (c >> i) & 1:
                    ones_left[i] += 1
                else:
                    zeros_left[i] += 1

    yield from walk(0, t, 0)
