"""Method-of-types machinery: empirical types, typical sets, and the
enumeration of blocklength-realizable jammer conditional types.

Type tables keep exact integer counts; floats appear only when a table is
compared against a target distribution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .errors import ConfigurationError, EnumerationTooLargeError, UsageError
from .probability import Alphabet, Distribution, JointDistribution

if TYPE_CHECKING:  # pragma: no cover
    from .model import ProblemSpec

__all__ = [
    "SymbolVector",
    "TypeTable",
    "ConditionalType",
    "compositions",
    "empirical_type",
    "joint_type",
    "conditional_type",
    "nearest_type",
    "type_template",
    "linf_deviation",
    "is_typical",
    "is_jointly_typical",
    "enumerate_cond_types",
    "count_cond_types",
    "valid_jammer_types",
]

# Absolute slack for threshold comparisons, so an exactly-attained bound is
# never lost to float rounding.
TYPE_TOL = 1e-12


@dataclass(frozen=True)
class SymbolVector:
    """A length-n sequence of symbol indices over one alphabet."""

    alphabet: Alphabet
    symbols: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.symbols, dtype=np.int64)
        if s.ndim != 1 or s.size < 1:
            raise UsageError("symbol vector must be one-dimensional and non-empty")
        if s.min() < 0 or s.max() >= self.alphabet.size:
            raise UsageError(
                f"symbol out of range for alphabet {self.alphabet.name!r} "
                f"of size {self.alphabet.size}"
            )
        s = np.ascontiguousarray(s)
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)

    def __len__(self) -> int:
        return int(self.symbols.size)


@dataclass(frozen=True)
class TypeTable:
    """Empirical distribution as integer counts over one or more axes."""

    counts: np.ndarray
    n: int

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        if c.min(initial=0) < 0:
            raise UsageError("type counts must be non-negative")
        if int(c.sum()) != self.n:
            raise UsageError(f"type counts sum to {int(c.sum())}, expected n={self.n}")
        if self.n < 1:
            raise UsageError("type denominator n must be >= 1")
        c = np.ascontiguousarray(c)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / float(self.n)

    def key(self) -> tuple:
        return (self.counts.shape, tuple(self.counts.ravel().tolist()), self.n)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TypeTable):
            return NotImplemented
        return self.n == other.n and self.counts.shape == other.counts.shape and bool(
            np.array_equal(self.counts, other.counts)
        )

    def __hash__(self) -> int:
        return hash(self.key())


@dataclass(frozen=True)
class ConditionalType:
    """A blocklength-realizable conditional type T(j | x).

    ``rows[x]`` holds integer counts with denominator ``given_counts[x]``.  A
    conditioning symbol that never occurs leaves its row unconstrained, stored
    as ``None``; such rows act as wildcards until completed.
    """

    given_counts: tuple[int, ...]
    rows: tuple[tuple[int, ...] | None, ...]
    out_size: int

    def __post_init__(self) -> None:
        if len(self.rows) != len(self.given_counts):
            raise UsageError("row list and conditioning counts differ in length")
        for cx, row in zip(self.given_counts, self.rows):
            if cx == 0:
                if row is not None:
                    raise UsageError("zero-count conditioning symbol must have a wildcard row")
                continue
            if row is None or len(row) != self.out_size or sum(row) != cx:
                raise UsageError("conditional type row does not match its denominator")

    @property
    def has_wildcards(self) -> bool:
        return any(r is None for r in self.rows)

    def matrix(self) -> np.ndarray:
        """Row-stochastic float matrix; requires all rows defined."""
        if self.has_wildcards:
            raise UsageError("conditional type has unconstrained rows; complete it first")
        return np.array(
            [np.asarray(r, dtype=np.float64) / c for r, c in zip(self.rows, self.given_counts)]
        )

    def key(self) -> tuple:
        parts = []
        for cx, row in zip(self.given_counts, self.rows):
            if row is None:
                parts.append(None)
            else:
                parts.append(tuple(Fraction(v, cx) for v in row))
        return tuple(parts)

    def completions(self, denominator: int) -> Iterator["ConditionalType"]:
        """Fill every wildcard row with a count row of the given denominator."""
        if not self.has_wildcards:
            yield self
            return
        wild = [i for i, r in enumerate(self.rows) if r is None]
        options = list(compositions(denominator, self.out_size))
        for combo in itertools.product(options, repeat=len(wild)):
            rows = list(self.rows)
            counts = list(self.given_counts)
            for i, row in zip(wild, combo):
                rows[i] = row
                counts[i] = denominator
            yield ConditionalType(tuple(counts), tuple(rows), self.out_size)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in compositions(total - head, parts - 1):
            yield (head,) + tail


def empirical_type(x: SymbolVector) -> TypeTable:
    """The type (normalized histogram) of a sequence."""
    counts = np.bincount(x.symbols, minlength=x.alphabet.size)
    return TypeTable(counts, len(x))


def joint_type(x: SymbolVector, y: SymbolVector) -> TypeTable:
    """The joint type of a pair of equal-length sequences, axes (x, y)."""
    if len(x) != len(y):
        raise UsageError(f"joint type of sequences with lengths {len(x)} != {len(y)}")
    flat = x.symbols * y.alphabet.size + y.symbols
    counts = np.bincount(flat, minlength=x.alphabet.size * y.alphabet.size)
    return TypeTable(counts.reshape(x.alphabet.size, y.alphabet.size), len(x))


def conditional_type(x: SymbolVector, y: SymbolVector) -> ConditionalType:
    """The conditional type T(x | y); rows for unseen y symbols are wildcards."""
    if len(x) != len(y):
        raise UsageError(f"conditional type of sequences with lengths {len(x)} != {len(y)}")
    jt = joint_type(x, y).counts  # axes (x, y)
    y_counts = jt.sum(axis=0)
    rows: list[tuple[int, ...] | None] = []
    for b in range(y.alphabet.size):
        if y_counts[b] == 0:
            rows.append(None)
        else:
            rows.append(tuple(int(v) for v in jt[:, b]))
    return ConditionalType(tuple(int(v) for v in y_counts), tuple(rows), x.alphabet.size)


def nearest_type(p: np.ndarray, n: int) -> TypeTable:
    """Round a pmf to a blocklength-n type by largest-remainder apportionment.

    Leftover counts go to the largest fractional parts, lowest index first on
    ties, so the rounding is deterministic.
    """
    p = np.asarray(p, dtype=np.float64)
    scaled = p * n
    counts = np.floor(scaled).astype(np.int64)
    missing = n - int(counts.sum())
    if missing > 0:
        order = np.lexsort((np.arange(p.size), -(scaled - counts)))
        counts[order[:missing]] += 1
    return TypeTable(counts, n)


def type_template(table: TypeTable) -> np.ndarray:
    """A canonical sequence with the given type: symbols in ascending order."""
    return np.repeat(np.arange(table.counts.size, dtype=np.int64), table.counts)


def linf_deviation(table: TypeTable, target: np.ndarray) -> float:
    """Largest absolute entry-wise gap between a type and a target table."""
    t = np.asarray(target, dtype=np.float64)
    if t.shape != table.counts.shape:
        raise UsageError(f"target shape {t.shape} does not match type shape {table.counts.shape}")
    return float(np.abs(table.probabilities - t).max())


def is_typical(x: SymbolVector, p: Distribution, eps: float) -> bool:
    """Membership of x in the eps-typical set of p (l-infinity criterion)."""
    if eps < 0:
        raise UsageError("typicality radius must be >= 0")
    return linf_deviation(empirical_type(x), p.mass) <= eps + TYPE_TOL


def is_jointly_typical(
    x: SymbolVector, y: SymbolVector, p_xy: JointDistribution, eps: float
) -> bool:
    """Joint typicality of (x, y) against a two-variable joint distribution."""
    if eps < 0:
        raise UsageError("typicality radius must be >= 0")
    if len(p_xy.variables) != 2:
        raise ConfigurationError("joint typicality target must have exactly two variables")
    return linf_deviation(joint_type(x, y), p_xy.mass) <= eps + TYPE_TOL


def enumerate_cond_types(
    n: int, x_counts: tuple[int, ...] | list[int], j_alphabet: Alphabet
) -> list[ConditionalType]:
    """All conditional types T(j | x) realizable at blocklength ``n`` for the
    given per-symbol counts of x.  Unseen symbols yield one wildcard row."""
    x_counts = tuple(int(c) for c in x_counts)
    if sum(x_counts) != n:
        raise UsageError(f"x counts sum to {sum(x_counts)}, expected n={n}")
    per_row: list[list[tuple[int, ...] | None]] = []
    for c in x_counts:
        if c == 0:
            per_row.append([None])
        else:
            per_row.append(list(compositions(c, j_alphabet.size)))
    out = []
    for combo in itertools.product(*per_row):
        out.append(ConditionalType(x_counts, tuple(combo), j_alphabet.size))
    return out


def count_cond_types(x_counts: tuple[int, ...] | list[int], j_size: int) -> int:
    """Closed-form size of :func:`enumerate_cond_types` via compositions."""
    total = 1
    for c in x_counts:
        total *= math.comb(int(c) + j_size - 1, j_size - 1)
    return total


def valid_jammer_types(
    t_y: TypeTable,
    spec: "ProblemSpec",
    f_eps: float,
    n: int,
    max_tables: int = 2_000_000,
) -> list[ConditionalType]:
    """Conditional jammer types whose induced Y-marginal is close to ``t_y``.

    Enumerates every conditional type realizable at blocklength ``n`` (all
    splits of n over the source alphabet), completes wildcard rows on the
    denominator-n grid, and keeps tables T with
    || [P_X T W]_Y - t_y ||_inf <= f_eps.  An empty result is legal.
    """
    if f_eps < 0:
        raise UsageError("f_eps must be >= 0")
    x_size = spec.x_alphabet.size
    j_size = spec.j_alphabet.size
    target = t_y.probabilities
    if target.shape != (spec.y_alphabet.size,):
        raise UsageError("t_y is not a type over the Y alphabet")

    seen: dict[tuple, ConditionalType] = {}
    matrices: list[np.ndarray] = []
    for counts in compositions(n, x_size):
        for ct in enumerate_cond_types(n, counts, spec.j_alphabet):
            for complete in ct.completions(n):
                key = complete.key()
                if key in seen:
                    continue
                seen[key] = complete
                matrices.append(complete.matrix())
                if len(matrices) > max_tables:
                    raise EnumerationTooLargeError(
                        f"more than {max_tables} jammer conditional types at n={n}"
                    )

    if not matrices:
        return []
    stack = np.stack(matrices)  # (M, |X|, |J|)
    w_y = spec.w.y_marginal_kernel  # (|X|, |J|, |Y|)
    margins = np.einsum("x,mxj,xjy->my", spec.p_x.mass, stack, w_y, optimize=True)
    dev = np.abs(margins - target[None, :]).max(axis=1)
    keep = dev <= f_eps + TYPE_TOL
    tables = list(seen.values())
    return [t for t, ok in zip(tables, keep) if ok]
