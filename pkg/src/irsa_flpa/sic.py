"""Successive interference cancellation (peeling) decoders.

Two decoders that must always agree:

* :func:`residual` works on an occupancy vector, clearing a decoded user's
  bit from every pattern that contains it;
* :func:`peel_matrix` works on an explicit collision matrix, zeroing the
  decoded user's row.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import PreconditionError
from .model import complement_in, weight

POLICIES = ("smallest", "largest", "random")


@dataclass
class PeelState:
    """Occupancy vector and undecoded users at step ``j`` of the decoder."""

    occupancy: dict[int, int]
    undecoded: frozenset[int]
    j: int = 0

    @classmethod
    def start(cls, occupancy: Mapping[int, int], k: int) -> "PeelState":
        return cls({c: n for c, n in occupancy.items() if n}, frozenset(range(k)), 0)

    def singletons(self) -> list[int]:
        """Users that currently own a weight-1 column, ascending."""
        return sorted(m for m in self.undecoded if self.occupancy.get(1 << m, 0) > 0)


@dataclass(frozen=True)
class ResidualOutcome:
    u: int
    peel_trace: tuple[int, ...] | None = field(default=None, compare=False)


def peel_step(state: PeelState, m: int) -> PeelState:
    """Decode user ``m`` from one of its singleton slots and cancel it everywhere."""
    if m not in state.undecoded:
        raise PreconditionError(f"user {m} is already decoded")
    if state.occupancy.get(1 << m, 0) <= 0:
        raise PreconditionError(f"user {m} has no singleton slot")
    nxt: dict[int, int] = {}
    for c, n in state.occupancy.items():
        if (c >> m) & 1:
            c = complement_in(c, m)
        nxt[c] = nxt.get(c, 0) + n
    return PeelState(nxt, state.undecoded - {m}, state.j + 1)


def _choose(candidates, policy, rng):
    if policy == "smallest":
        return candidates[0]
    if policy == "largest":
        return candidates[-1]
    if policy == "random":
        return candidates[rng.randrange(len(candidates))]
    raise ValueError(f"unknown peel policy {policy!r}; choose from {POLICIES}")


def residual(
    n: Mapping[int, int],
    k: int,
    policy: str = "smallest",
    *,
    rng: random.Random | None = None,
    trace: bool = False,
) -> ResidualOutcome:
    """Run the occupancy-level decoder to a stop; return the undecoded count."""
    if policy == "random" and rng is None:
        rng = random.Random(0)
    state = PeelState.start(n, k)
    order = []
    while True:
        candidates = state.singletons()
        if not candidates:
            break
        m = _choose(candidates, policy, rng)
        state = peel_step(state, m)
        if trace:
            order.append(m)
    return ResidualOutcome(len(state.undecoded), tuple(order) if trace else None)


def residual_count(n: Mapping[int, int], k: int) -> int:
    """Fast path of ``residual(n, k).u`` for the exact engine.

    Decoding every currently available singleton in one sweep reaches the
    same stopping set as one-at-a-time peeling.
    """
    cols = [c for c, cnt in n.items() if cnt and c]
    decoded = 0
    while True:
        singles = 0
        for c in cols:
            if c & (c - 1) == 0:
                singles |= c
        if not singles:
            return k - weight(decoded)
        decoded |= singles
        cols = [c & ~singles for c in cols]
        cols = [c for c in cols if c]


def peel_matrix(
    M,
    policy: str = "smallest",
    *,
    rng: random.Random | None = None,
    trace: bool = False,
) -> ResidualOutcome:
    """Matrix-level SIC on a k x t 0/1 matrix (rows are users, columns slots).

    Repeatedly finds a weight-1 column, decodes its user and zeroes that
    user's row; stops when no weight-1 column remains.
    """
    A = np.array(M, dtype=np.int64, copy=True)
    if A.ndim != 2:
        raise PreconditionError(f"collision matrix must be 2-D, got shape {A.shape}")
    if policy == "random" and rng is None:
        rng = random.Random(0)
    k = A.shape[0]
    order = []
    while True:
        col_w = A.sum(axis=0)
        single_cols = np.flatnonzero(col_w == 1)
        if single_cols.size == 0:
            break
        users = sorted({int(np.flatnonzero(A[:, j])[0]) for j in single_cols})
        m = _choose(users, policy, rng)
        A[m, :] = 0
        order.append(m)
    return ResidualOutcome(k - len(order), tuple(order) if trace else None)


def peel_rows(rows) -> int:
    """Undecoded count for a matrix given as per-user slot bitmasks.

    Same decoder as :func:`peel_matrix`, used in the hot loops of the
    simulator and the brute-force oracle. All singleton slots of a sweep are
    decoded together.
    """
    active = list(rows)
    while active:
        seen = 0
        twice = 0
        for r in active:
            twice |= seen & r
            seen |= r
        single = seen & ~twice
        if not single:
            break
        active = [r for r in active if not r & single]
    return len(active)
