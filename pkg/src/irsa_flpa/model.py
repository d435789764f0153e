"""Core types for a k-user, t-slot IRSA frame.

Column patterns (the set of users transmitting in one slot) are k-bit
integers: user ``i`` (0-based) is bit ``i``.  ``pattern_from_bits([1, 1, 0])``
is therefore ``0b011``.  All probabilities are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ConfigError, PreconditionError

Rational = Fraction
DegreeVector = tuple[int, ...]

DEFAULT_MAX_K = 10


@dataclass(frozen=True)
class SystemConfig:
    """``k`` sources sharing a MAC frame of ``t`` slots."""

    k: int
    t: int

    def __post_init__(self):
        for name in ("k", "t"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")

    @property
    def G(self) -> Fraction:
        """Offered traffic k/t."""
        return Fraction(self.k, self.t)


def parse_rational(text) -> Fraction:
    """Parse ``"0.25"``, ``"1/4"``, ``"3"`` (or an int/Fraction) exactly.

    Floats are rejected: ``0.1`` has no exact binary representation and
    silently turning it into 3602879701896397/36028797018963968 would break
    exact reproduction of published tables.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool) or isinstance(text, float):
        raise ConfigError(f"refusing inexact value {text!r}; pass a string or Fraction")
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {text!r} as an exact rational") from exc


@dataclass(frozen=True)
class DegreeDistribution:
    """Replica-count distribution Lambda over degrees 1..D_max.

    ``probs`` maps degree to exact probability. Degrees in 1..D_max missing
    from ``probs`` have probability zero.
    """

    probs: Mapping[int, Fraction]
    D_max: int = field(default=0)

    def __post_init__(self):
        probs = {}
        for d, p in dict(self.probs).items():
            if not isinstance(d, int) or isinstance(d, bool) or d < 1:
                raise ConfigError(f"degree must be an integer >= 1, got {d!r}")
            p = parse_rational(p)
            if p < 0:
                raise ConfigError(f"negative probability {p} for degree {d}")
            probs[d] = p
        if not probs:
            raise ConfigError("degree distribution is empty")
        total = sum(probs.values())
        if total != 1:
            raise ConfigError(f"degree probabilities sum to {total}, not 1")
        d_max = self.D_max or max(probs)
        if max(probs) > d_max:
            raise ConfigError(f"degree {max(probs)} exceeds D_max={d_max}")
        object.__setattr__(self, "probs", dict(sorted(probs.items())))
        object.__setattr__(self, "D_max", d_max)

    @classmethod
    def parse(cls, text: str) -> "DegreeDistribution":
        """Build from ``"2:0.25,3:0.75"`` or ``"1:1/5,2:1/2,4:3/10"``."""
        probs = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                deg, prob = item.split(":")
                deg = int(deg)
            except ValueError as exc:
                raise ConfigError(f"malformed degree entry {item!r}; expected d:p") from exc
            if deg in probs:
                raise ConfigError(f"degree {deg} listed twice")
            probs[deg] = parse_rational(prob)
        return cls(probs)

    def __getitem__(self, d: int) -> Fraction:
        if not 1 <= d <= self.D_max:
            raise ConfigError(f"degree {d} outside 1..{self.D_max}")
        return self.probs.get(d, Fraction(0))

    @property
    def support(self) -> tuple[int, ...]:
        """Degrees with strictly positive probability, ascending."""
        return tuple(d for d, p in self.probs.items() if p > 0)

    @property
    def D(self) -> int:
        return len(self.support)

    def mean(self) -> Fraction:
        """Average degree, Lambda'(1)."""
        return sum((d * p for d, p in self.probs.items()), Fraction(0))

    def check_against(self, cfg: SystemConfig) -> None:
        if max(self.support) > cfg.t:
            raise ConfigError(
                f"degree {max(self.support)} has positive probability but the frame has only {cfg.t} slots"
            )

    def __str__(self):
        return ",".join(f"{d}:{p}" for d, p in self.probs.items())


def validate_degree_vector(d: Sequence[int], cfg: SystemConfig) -> DegreeVector:
    d = tuple(d)
    if len(d) != cfg.k:
        raise ConfigError(f"degree vector has length {len(d)}, expected k={cfg.k}")
    for di in d:
        if not isinstance(di, int) or di < 1:
            raise ConfigError(f"degrees must be integers >= 1, got {di!r}")
    return d


def degree_vector_probability(dist: DegreeDistribution, d: Sequence[int], k: int | None = None) -> Fraction:
    """Return prod_i Lambda_{d_i}, exactly."""
    if k is not None and len(d) != k:
        raise ConfigError(f"degree vector has length {len(d)}, expected k={k}")
    p = Fraction(1)
    for di in d:
        p *= dist[di]
    return p


def enumerate_degree_vectors(dist: DegreeDistribution, k: int) -> Iterator[tuple[DegreeVector, Fraction]]:
    """Yield every degree vector over the support of ``dist`` with its probability.

    Vectors come in lexicographic order; there are exactly ``dist.D ** k``.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    support = dist.support
    for d in itertools.product(support, repeat=k):
        yield d, degree_vector_probability(dist, d)


def degree_vector_classes(dist: DegreeDistribution, k: int) -> Iterator[tuple[DegreeVector, int, Fraction]]:
    """Yield sorted degree multisets as ``(d, multiplicity, per_vector_probability)``.

    ``multiplicity`` is how many distinct vectors are permutations of ``d``,
    so ``sum(mult * p) == 1``.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    for d in itertools.combinations_with_replacement(dist.support, k):
        mult = multinomial(k, list(Counter(d).values()))
        yield d, mult, degree_vector_probability(dist, d)


def multinomial(total: int, parts: Sequence[int]) -> int:
    """total! / prod(parts_i!), exactly."""
    if any(p < 0 for p in parts):
        raise PreconditionError(f"negative part in {list(parts)}")
    if sum(parts) != total:
        raise PreconditionError(f"parts {list(parts)} do not sum to {total}")
    result = 1
    running = 0
    for p in parts:
        running += p
        result *= math.comb(running, p)
    return result


# ---------------------------------------------------------------------------
# column patterns


def weight(c: int) -> int:
    return c.bit_count()


def pattern_from_bits(bits: Iterable[int]) -> int:
    """``[1, 0, 1]`` -> pattern with users 0 and 2 transmitting."""
    c = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ConfigError(f"pattern entries must be 0/1, got {b!r}")
        c |= b << i
    return c


def pattern_to_bits(c: int, k: int) -> list[int]:
    return [(c >> i) & 1 for i in range(k)]


def complement_in(c: int, m: int) -> int:
    """Clear user ``m`` (0-based) from pattern ``c``; bit ``m`` must be set."""
    if not (c >> m) & 1:
        raise PreconditionError(f"user {m} is not present in pattern {c:#b}")
    return c & ~(1 << m)


class ColumnUniverse:
    """All 2**k column patterns for ``k`` users, in increasing integer order."""

    def __init__(self, k: int):
        if k < 1:
            raise ConfigError(f"k must be >= 1, got {k}")
        self.k = k
        self.full = (1 << k) - 1

    @cached_property
    def patterns(self) -> tuple[int, ...]:
        return tuple(range(1 << self.k))

    @cached_property
    def _by_weight(self) -> tuple[tuple[int, ...], ...]:
        classes = [[] for _ in range(self.k + 1)]
        for c in self.patterns:
            classes[weight(c)].append(c)
        return tuple(tuple(cl) for cl in classes)

    def weight_class(self, l: int) -> tuple[int, ...]:
        """C_l: patterns of weight ``l``."""
        return self._by_weight[l]

    def weight_class_without(self, l: int, i: int) -> tuple[int, ...]:
        """C_{l,i}: patterns of weight ``l`` with user ``i`` absent."""
        return tuple(c for c in self._by_weight[l] if not (c >> i) & 1)

    @cached_property
    def reduced(self) -> tuple[int, ...]:
        """Patterns of weight <= k-2, in canonical order (the reduced set)."""
        return tuple(c for c in self.patterns if weight(c) <= self.k - 2)

    def almost_full(self, i: int) -> int:
        """The weight-(k-1) pattern missing only user ``i``."""
        return self.full & ~(1 << i)

    def __len__(self):
        return 1 << self.k
