"""Solver for zero-sum games that are bilinear over products of simplices.

The maximizing player is handled by multiplicative weights over its finite
set of deterministic strategies (the vertices of its product simplex); the
minimizing player answers each round with an exact best response.  Averaged
strategies certify an upper and a lower bound on the game value, and the
reported duality gap is their difference, shrinking as O(sqrt(log K / T)).

The inner loop is compiled with numba when available; the pure-numpy
fallback runs the same algorithm.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, UsageError

__all__ = ["BilinearGame", "GameResult", "solve_bilinear_game"]


@dataclass(frozen=True)
class BilinearGame:
    """payoff(sigma, q) = sigma' @ matrix @ q' where sigma' and q' are the
    concatenated per-block pmfs of the minimizing and maximizing player."""

    matrix: np.ndarray
    min_blocks: tuple[int, ...]
    max_blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if not np.all(np.isfinite(m)):
            raise NumericError("game payoff matrix has non-finite entries")
        if m.shape != (sum(self.min_blocks), sum(self.max_blocks)):
            raise UsageError(
                f"payoff matrix shape {m.shape} does not match block sizes "
                f"{self.min_blocks} x {self.max_blocks}"
            )
        if any(b < 1 for b in self.min_blocks) or any(b < 1 for b in self.max_blocks):
            raise UsageError("every simplex block must have size >= 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "min_blocks", tuple(self.min_blocks))
        object.__setattr__(self, "max_blocks", tuple(self.max_blocks))

    def max_vertices(self) -> list[tuple[int, ...]]:
        """Deterministic strategies of the maximizer, lexicographic order."""
        return list(itertools.product(*(range(b) for b in self.max_blocks)))

    def vertex_payoff_columns(self) -> np.ndarray:
        """Matrix (dim_min, K): payoff of each min coordinate vs each vertex."""
        offsets = np.cumsum((0,) + self.max_blocks[:-1])
        cols = []
        for vertex in self.max_vertices():
            idx = [o + k for o, k in zip(offsets, vertex)]
            cols.append(self.matrix[:, idx].sum(axis=1))
        return np.ascontiguousarray(np.stack(cols, axis=1))

    def payoff(self, sigma: list[np.ndarray], q: list[np.ndarray]) -> float:
        s = np.concatenate([np.asarray(x, dtype=np.float64) for x in sigma])
        t = np.concatenate([np.asarray(x, dtype=np.float64) for x in q])
        return float(s @ self.matrix @ t)


@dataclass(frozen=True)
class GameResult:
    """Certified solve of a bilinear minimax game.

    ``value`` is the level the minimizer's averaged strategy guarantees
    (an upper certificate); ``duality_gap`` is the distance to the
    maximizer's best lower certificate, so the true value lies within
    ``duality_gap`` of ``value``.
    """

    value: float
    min_strategy: tuple[np.ndarray, ...]
    max_strategy: np.ndarray  # weights over the maximizer's vertex set
    duality_gap: float
    iterations: int


def _mw_loop(bv, starts, sizes, iterations, rate, check_every, tol):
    dim, num_v = bv.shape
    nblocks = starts.shape[0]
    logw = np.zeros(num_v)
    q = np.zeros(num_v)
    sigma_sum = np.zeros(dim)
    q_sum = np.zeros(num_v)
    chosen = np.zeros(nblocks, dtype=np.int64)

    scale = 0.0
    for v in range(num_v):
        s = 0.0
        for b in range(nblocks):
            mx = 0.0
            for i in range(starts[b], starts[b] + sizes[b]):
                a = abs(bv[i, v])
                if a > mx:
                    mx = a
            s += mx
        if s > scale:
            scale = s
    if scale <= 0.0:
        scale = 1.0
    ln_v = math.log(num_v) if num_v > 1 else 1.0

    best_u = np.inf
    best_l = -np.inf
    sigma_at_u = np.zeros(dim)
    q_at_l = np.zeros(num_v)
    done = 0

    for t in range(1, iterations + 1):
        m = logw[0]
        for v in range(1, num_v):
            if logw[v] > m:
                m = logw[v]
        total = 0.0
        for v in range(num_v):
            q[v] = math.exp(logw[v] - m)
            total += q[v]
        for v in range(num_v):
            q[v] /= total
            q_sum[v] += q[v]

        # exact best response of the minimizer, block by block; ties go to
        # the lexicographically smallest coordinate
        for b in range(nblocks):
            lo = starts[b]
            hi = lo + sizes[b]
            best_i = lo
            best_c = 0.0
            for i in range(lo, hi):
                c = 0.0
                for v in range(num_v):
                    c += bv[i, v] * q[v]
                if i == lo or c < best_c:
                    best_c = c
                    best_i = i
            chosen[b] = best_i
            sigma_sum[best_i] += 1.0

        eta = rate if rate > 0.0 else min(math.sqrt(ln_v / t), 0.5) / scale
        for v in range(num_v):
            r = 0.0
            for b in range(nblocks):
                r += bv[chosen[b], v]
            logw[v] += eta * r

        done = t
        if t % check_every == 0 or t == iterations:
            inv = 1.0 / t
            upper = -np.inf
            for v in range(num_v):
                s = 0.0
                for i in range(dim):
                    s += sigma_sum[i] * inv * bv[i, v]
                if s > upper:
                    upper = s
            lower = 0.0
            for b in range(nblocks):
                lo = starts[b]
                hi = lo + sizes[b]
                mn = np.inf
                for i in range(lo, hi):
                    c = 0.0
                    for v in range(num_v):
                        c += bv[i, v] * q_sum[v] * inv
                    if c < mn:
                        mn = c
                lower += mn
            if upper < best_u:
                best_u = upper
                for i in range(dim):
                    sigma_at_u[i] = sigma_sum[i] * inv
            if lower > best_l:
                best_l = lower
                for v in range(num_v):
                    q_at_l[v] = q_sum[v] * inv
            if best_u - best_l <= tol:
                break

    return best_u, best_l, sigma_at_u, q_at_l, done


try:  # pragma: no cover - exercised implicitly wherever numba is installed
    from numba import njit

    _mw_loop_fast = njit(cache=True)(_mw_loop)
except ImportError:  # pragma: no cover
    _mw_loop_fast = _mw_loop


def solve_bilinear_game(
    game: BilinearGame,
    iterations: int = 200_000,
    rate: float | None = None,
    tol: float = 0.0,
    check_every: int = 500,
) -> GameResult:
    """Approximate the minimax value of a bilinear simplex-product game.

    ``rate`` overrides the default decreasing learning-rate schedule.  When
    ``tol`` is positive the loop stops early once the certified gap falls
    below it.
    """
    if iterations < 1:
        raise UsageError("iterations must be >= 1")
    bv = game.vertex_payoff_columns()
    if not np.all(np.isfinite(bv)):
        raise NumericError("game payoff evaluated to non-finite values")
    sizes = np.asarray(game.min_blocks, dtype=np.int64)
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1])).astype(np.int64)
    best_u, best_l, sigma, q_weights, done = _mw_loop_fast(
        bv,
        starts,
        sizes,
        int(iterations),
        float(rate) if rate is not None else 0.0,
        int(check_every),
        float(tol),
    )
    splits = np.cumsum(sizes)[:-1]
    return GameResult(
        value=float(best_u),
        min_strategy=tuple(np.array(part) for part in np.split(sigma, splits)),
        max_strategy=np.asarray(q_weights),
        duality_gap=float(best_u - best_l),
        iterations=int(done),
    )
