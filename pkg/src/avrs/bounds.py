"""Single-letter minimax quantities: worst-case distortion floors, the
jamming-robust rate bounds, and the per-type codebook rates.

The distortion floors are bilinear games solved exactly up to a certified
gap.  The rate bounds are nested optimizations in which the mutual
information term is not concave in the jammer argument, so the inner
adversary is handled by grid-plus-vertices search with one local refinement
pass; every reported value carries a grid-resolution uncertainty equal to
the observed refinement shift plus a step-resolution floor.  Distortion
feasibility is checked only on deterministic jammers, which is exact because
expected distortion is linear in the jamming kernel.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationTooLargeError, InfeasibleDistortionError, UsageError
from .games import BilinearGame, GameResult, solve_bilinear_game
from .model import AuxiliaryPolicy, ProblemSpec
from .mtypes import TYPE_TOL, TypeTable
from .probability import entropy_bits

__all__ = [
    "GridConfig",
    "RateBoundSolver",
    "PerTypeRates",
    "BoundPoint",
    "BoundReport",
    "minimax_distortion_game",
    "d0",
    "d1",
    "r_upper",
    "r_lower",
    "per_type_rates",
    "compute_bound_report",
    "simplex_lattice",
    "simplex_window",
    "column_product",
]

# Slack added to distortion-feasibility comparisons so exactly attained
# constraints survive float rounding.
DISTORTION_TOL = 1e-9


@dataclass(frozen=True)
class GridConfig:
    """Resolution of the simplex searches.

    Steps must divide 1, and the refine step must divide the coarse step so
    that every coarse point stays on the refined lattice.
    """

    coarse_step: float = 0.05
    refine_step: float = 0.005
    refine: bool = True
    max_candidates: int = 1_000_000
    chunk_cells: int = 4_000_000

    def __post_init__(self) -> None:
        for name, step in (("coarse_step", self.coarse_step), ("refine_step", self.refine_step)):
            if not (0 < step <= 1):
                raise UsageError(f"{name} must lie in (0, 1]")
            m = round(1.0 / step)
            if abs(step * m - 1.0) > 1e-9:
                raise UsageError(f"{name}={step} does not divide 1")
        ratio = self.coarse_step / self.refine_step
        if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
            raise UsageError("refine_step must divide coarse_step")


def simplex_lattice(dim: int, step: float) -> np.ndarray:
    """All points of the step-lattice on the probability simplex, in
    lexicographic order of their integer coordinates."""
    m = round(1.0 / step)
    points = [np.array(c, dtype=np.float64) / m for c in _compositions(m, dim)]
    return np.stack(points)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def simplex_window(center: np.ndarray, step: float, radius: float) -> np.ndarray:
    """Lattice points of ``step`` on the simplex within l-infinity ``radius``
    of ``center``.  If ``center`` is itself on the lattice it is included."""
    center = np.asarray(center, dtype=np.float64)
    dim = center.size
    m = round(1.0 / step)
    los = [max(0, math.ceil((c - radius) * m - 1e-9)) for c in center]
    his = [min(m, math.floor((c + radius) * m + 1e-9)) for c in center]
    out = []

    def rec(i: int, remaining: int, prefix: list[int]) -> None:
        if i == dim - 1:
            if los[i] <= remaining <= his[i]:
                out.append(prefix + [remaining])
            return
        lo = max(los[i], remaining - sum(his[i + 1 :]))
        hi = min(his[i], remaining)
        for k in range(lo, hi + 1):
            rec(i + 1, remaining - k, prefix + [k])

    rec(0, m, [])
    if not out:
        return center.reshape(1, -1)
    return np.array(out, dtype=np.float64) / m


def column_product(column_grids: list[np.ndarray], max_candidates: int) -> np.ndarray:
    """Cartesian product of per-column simplex grids.

    Returns shape (N, columns, dim); candidate order is lexicographic in the
    per-column indices, which fixes all tie-breaking downstream.
    """
    sizes = [g.shape[0] for g in column_grids]
    total = math.prod(sizes)
    if total > max_candidates:
        raise EnumerationTooLargeError(
            f"policy grid would hold {total} candidates (> {max_candidates}); "
            "coarsen the grid or reduce the auxiliary alphabet"
        )
    out = np.empty((total, len(column_grids), column_grids[0].shape[1]))
    for c, g in enumerate(column_grids):
        reps_after = math.prod(sizes[c + 1 :])
        reps_before = math.prod(sizes[:c])
        out[:, c, :] = np.tile(np.repeat(g, reps_after, axis=0), (reps_before, 1))
    return out


def _cmi_uyz(p: np.ndarray) -> np.ndarray:
    """I(U;Y|Z) in bits for tables of shape (..., U, Y, Z)."""
    h_uz = entropy_bits(p.sum(axis=-2), axis=(-2, -1))
    h_yz = entropy_bits(p.sum(axis=-3), axis=(-2, -1))
    h_uyz = entropy_bits(p, axis=(-3, -2, -1))
    h_z = entropy_bits(p.sum(axis=(-3, -2)), axis=-1)
    return np.maximum(h_uz + h_yz - h_uyz - h_z, 0.0)


def _mi_2d(p: np.ndarray) -> np.ndarray:
    """I(A;B) in bits for tables of shape (..., A, B)."""
    h_a = entropy_bits(p.sum(axis=-1), axis=-1)
    h_b = entropy_bits(p.sum(axis=-2), axis=-1)
    h_ab = entropy_bits(p, axis=(-2, -1))
    return np.maximum(h_a + h_b - h_ab, 0.0)


def deterministic_maps(domain: int, codomain: int) -> np.ndarray:
    """All maps domain -> codomain as an integer array, lexicographic order."""
    return np.array(list(itertools.product(range(codomain), repeat=domain)), dtype=np.int64)


# ---------------------------------------------------------------------------
# distortion floors


def minimax_distortion_game(
    spec: ProblemSpec,
    observe_y: bool,
    iterations: int = 8000,
    rate: float | None = None,
    tol: float = 1e-4,
) -> GameResult:
    """Estimator-vs-jammer expected distortion game.

    The estimator picks a pmf over reconstructions per observed context
    ((y, z) when ``observe_y``, else z alone); the jammer picks a kernel
    q(j|x).  The payoff is E[d], bilinear in the two kernels.
    """
    nx = spec.x_alphabet.size
    nj = spec.j_alphabet.size
    ny = spec.y_alphabet.size
    nz = spec.z_alphabet.size
    nh = spec.xhat_alphabet.size
    if observe_y:
        w_ctx = spec.w.kernel.reshape(nx, nj, ny * nz)
    else:
        w_ctx = spec.w.z_marginal_kernel
    n_ctx = w_ctx.shape[2]
    # payoff[(ctx, xhat), (x, j)] = p(x) w(ctx|x,j) d(x, xhat)
    b = np.einsum("x,xjc,xh->chxj", spec.p_x.mass, w_ctx, spec.d.entries)
    matrix = b.reshape(n_ctx * nh, nx * nj)
    game = BilinearGame(matrix, (nh,) * n_ctx, (nj,) * nx)
    return solve_bilinear_game(game, iterations=iterations, rate=rate, tol=tol)


def d0(spec: ProblemSpec, iterations: int = 8000, tol: float = 1e-4) -> float:
    """Minimax expected distortion when estimating from (Y, Z) jointly."""
    return minimax_distortion_game(spec, True, iterations=iterations, tol=tol).value


def d1(spec: ProblemSpec, iterations: int = 8000, tol: float = 1e-4) -> float:
    """Minimax expected distortion when estimating from Z alone."""
    return minimax_distortion_game(spec, False, iterations=iterations, tol=tol).value


# ---------------------------------------------------------------------------
# rate bounds


@dataclass(frozen=True)
class _RatePoint:
    value: float
    uncertainty: float
    p_u_given_y: np.ndarray
    zeta: np.ndarray | None
    q_extreme: np.ndarray


class RateBoundSolver:
    """Shared grids and information tables for the two rate bounds of one
    instance at one auxiliary-alphabet size.

    Building the candidate-policy x candidate-jammer information matrix is
    the expensive part; it does not depend on the distortion level, so one
    solver instance amortizes it over a whole distortion sweep.
    """

    def __init__(
        self,
        spec: ProblemSpec,
        u_size: int,
        grid: GridConfig | None = None,
        game_iterations: int = 8000,
    ) -> None:
        if u_size < 1:
            raise UsageError("auxiliary alphabet size must be >= 1")
        self.spec = spec
        self.u_size = u_size
        self.grid = grid or GridConfig()
        self.game_iterations = game_iterations
        self._zeta_maps = deterministic_maps(u_size * spec.z_alphabet.size, spec.xhat_alphabet.size)
        self._det_jammers = deterministic_maps(spec.x_alphabet.size, spec.j_alphabet.size)
        self._p_cache: np.ndarray | None = None
        self._q_cache: np.ndarray | None = None
        self._i_matrix_cache: np.ndarray | None = None
        self._max_e_cache: np.ndarray | None = None
        self._min_e_cache: np.ndarray | None = None
        self._d1_cache: float | None = None

    # -- shared tables ------------------------------------------------------

    @property
    def _p_candidates(self) -> np.ndarray:
        # built on demand: the above-the-floor shortcut never needs grids
        if self._p_cache is None:
            col_u = simplex_lattice(self.u_size, self.grid.coarse_step)
            self._p_cache = column_product(
                [col_u] * self.spec.y_alphabet.size, self.grid.max_candidates
            )
        return self._p_cache

    @property
    def _q_candidates(self) -> np.ndarray:
        if self._q_cache is None:
            col_j = simplex_lattice(self.spec.j_alphabet.size, self.grid.coarse_step)
            self._q_cache = column_product(
                [col_j] * self.spec.x_alphabet.size, self.grid.max_candidates
            )
        return self._q_cache

    @property
    def d1_value(self) -> float:
        if self._d1_cache is None:
            self._d1_cache = d1(self.spec, iterations=self.game_iterations)
        return self._d1_cache

    def _info_matrix(self, p_arr: np.ndarray, q_arr: np.ndarray) -> np.ndarray:
        """I(U;Y|Z) for every (policy, jammer) pair; shape (NP, NQ)."""
        spec = self.spec
        np_, nq = p_arr.shape[0], q_arr.shape[0]
        nu, ny, nz = self.u_size, spec.y_alphabet.size, spec.z_alphabet.size
        out = np.empty((np_, nq))
        cell = max(1, self.grid.chunk_cells // max(1, np_ * nu * ny * nz))
        for lo in range(0, nq, cell):
            qc = q_arr[lo : lo + cell]
            p_yz = np.einsum("x,nxj,xjyz->nyz", spec.p_x.mass, qc, spec.w.kernel, optimize=True)
            table = np.einsum("pyu,nyz->pnuyz", p_arr, p_yz, optimize=True)
            out[:, lo : lo + cell] = _cmi_uyz(table)
        return out

    def _max_e_over_jammers(self, p_arr: np.ndarray) -> np.ndarray:
        """max over deterministic jammers of E[d]; shape (NP, n_zeta)."""
        spec = self.spec
        nx = spec.x_alphabet.size
        w_det = spec.w.kernel[np.arange(nx)[:, None], self._det_jammers.T].transpose(1, 0, 2, 3)
        # w_det: (V, X, Y, Z)
        c = np.einsum("x,vxyz,pyu->pvxuz", spec.p_x.mass, w_det, p_arr, optimize=True)
        nu, nz = self.u_size, spec.z_alphabet.size
        zeta = self._zeta_maps.reshape(-1, nu, nz)
        d_f = spec.d.entries[:, zeta]  # (X, F, U, Z)
        e = np.einsum("pvxuz,xfuz->pfv", c, d_f, optimize=True)
        return e.max(axis=2)

    def _min_e_over_zeta(self, p_arr: np.ndarray, q_arr: np.ndarray) -> np.ndarray:
        """min over reconstruction maps of E[d], per (policy, jammer) pair.

        The best map decomposes per (u, z) cell for a fixed jammer, so no
        explicit enumeration is needed; shape (NP, NQ).
        """
        spec = self.spec
        np_, nq = p_arr.shape[0], q_arr.shape[0]
        nx = spec.x_alphabet.size
        nu, nz = self.u_size, spec.z_alphabet.size
        out = np.empty((np_, nq))
        cell = max(1, self.grid.chunk_cells // max(1, np_ * nx * nu * nz))
        for lo in range(0, nq, cell):
            qc = q_arr[lo : lo + cell]
            c = np.einsum(
                "x,nxj,xjyz,pyu->pnxuz", spec.p_x.mass, qc, spec.w.kernel, p_arr, optimize=True
            )
            per_hat = np.einsum("pnxuz,xh->pnuzh", c, spec.d.entries, optimize=True)
            out[:, lo : lo + cell] = per_hat.min(axis=-1).sum(axis=(-2, -1))
        return out

    @property
    def info_matrix(self) -> np.ndarray:
        if self._i_matrix_cache is None:
            self._i_matrix_cache = self._info_matrix(self._p_candidates, self._q_candidates)
        return self._i_matrix_cache

    @property
    def max_e_matrix(self) -> np.ndarray:
        if self._max_e_cache is None:
            self._max_e_cache = self._max_e_over_jammers(self._p_candidates)
        return self._max_e_cache

    @property
    def min_e_matrix(self) -> np.ndarray:
        if self._min_e_cache is None:
            self._min_e_cache = self._min_e_over_zeta(self._p_candidates, self._q_candidates)
        return self._min_e_cache

    # -- helpers ------------------------------------------------------------

    def _local_policies(self, center: np.ndarray) -> np.ndarray:
        g = self.grid
        cols = [simplex_window(center[y], g.refine_step, g.coarse_step) for y in range(center.shape[0])]
        return column_product(cols, g.max_candidates)

    def _local_jammers(self, center: np.ndarray) -> np.ndarray:
        g = self.grid
        cols = [simplex_window(center[x], g.refine_step, g.coarse_step) for x in range(center.shape[0])]
        return column_product(cols, g.max_candidates)

    def _uncertainty(self, refined: float, coarse: float) -> float:
        g = self.grid
        step = g.refine_step if g.refine else g.coarse_step
        return abs(refined - coarse) + step * math.log2(1.0 / step)

    # -- upper bound --------------------------------------------------------

    def r_upper_point(self, distortion: float) -> _RatePoint:
        if distortion < 0:
            raise UsageError("distortion level must be >= 0")
        spec = self.spec
        if distortion > self.d1_value:
            const_policy = np.full((spec.y_alphabet.size, self.u_size), 1.0 / self.u_size)
            uniform_q = np.full((spec.x_alphabet.size, spec.j_alphabet.size), 1.0 / spec.j_alphabet.size)
            return _RatePoint(0.0, 0.0, const_policy, None, uniform_q)
        feas = self.max_e_matrix <= distortion + DISTORTION_TOL  # (NP, F)
        feas_p = feas.any(axis=1)
        if not feas_p.any():
            raise InfeasibleDistortionError(
                f"no (policy, map) candidate meets E[d] <= {distortion} for every jammer; "
                "the level is below the reachable floor at this grid"
            )
        obj = np.where(feas_p, self.info_matrix.max(axis=1), np.inf)
        p0 = int(np.argmin(obj))
        v0 = float(obj[p0])
        best_p = self._p_candidates[p0]
        best_f = int(np.argmax(feas[p0]))
        value = v0
        if self.grid.refine:
            local = self._local_policies(best_p)
            feas_local = self._max_e_over_jammers(local) <= distortion + DISTORTION_TOL
            ok = feas_local.any(axis=1)
            info_local = self._info_matrix(local, self._q_candidates)
            obj_local = np.where(ok, info_local.max(axis=1), np.inf)
            p1 = int(np.argmin(obj_local))
            if math.isfinite(obj_local[p1]):
                best_p = local[p1]
                best_f = int(np.argmax(feas_local[p1]))
                value = float(obj_local[p1])
                q_inc = self._q_candidates[int(np.argmax(info_local[p1]))]
            else:
                q_inc = self._q_candidates[int(np.argmax(self.info_matrix[p0]))]
            q_local = self._local_jammers(q_inc)
            inner_vals = self._info_matrix(best_p[None], q_local)[0]
            value = max(value, float(inner_vals.max()))
            q_worst = q_local[int(np.argmax(inner_vals))]
        else:
            q_worst = self._q_candidates[int(np.argmax(self.info_matrix[p0]))]
        nu, nz = self.u_size, spec.z_alphabet.size
        zeta = self._zeta_maps[best_f].reshape(nu, nz)
        return _RatePoint(value, self._uncertainty(value, v0), best_p, zeta, q_worst)

    # -- lower bound --------------------------------------------------------

    def r_lower_point(self, distortion: float) -> _RatePoint:
        if distortion < 0:
            raise UsageError("distortion level must be >= 0")
        spec = self.spec
        if distortion > self.d1_value:
            const_policy = np.full((spec.y_alphabet.size, self.u_size), 1.0 / self.u_size)
            uniform_q = np.full((spec.x_alphabet.size, spec.j_alphabet.size), 1.0 / spec.j_alphabet.size)
            return _RatePoint(0.0, 0.0, const_policy, None, uniform_q)
        feas = self.min_e_matrix <= distortion + DISTORTION_TOL  # (NP, NQ)
        if (~feas.any(axis=0)).any():
            raise InfeasibleDistortionError(
                "some jammer kernels admit no feasible policy on the grid; "
                "the level is below the reachable floor"
            )
        inner = np.where(feas, self.info_matrix, np.inf).min(axis=0)  # (NQ,)
        n0 = int(np.argmax(inner))
        v0 = float(inner[n0])
        best_q = self._q_candidates[n0]
        value = v0
        p_inc_idx = int(np.argmin(np.where(feas[:, n0], self.info_matrix[:, n0], np.inf)))
        best_p = self._p_candidates[p_inc_idx]
        if self.grid.refine:
            q_local = self._local_jammers(best_q)
            feas_ql = self._min_e_over_zeta(self._p_candidates, q_local) <= distortion + DISTORTION_TOL
            info_ql = self._info_matrix(self._p_candidates, q_local)
            inner_ql = np.where(feas_ql, info_ql, np.inf).min(axis=0)
            reachable = np.isfinite(inner_ql)
            if reachable.any():
                inner_ql = np.where(reachable, inner_ql, -np.inf)
                n1 = int(np.argmax(inner_ql))
                best_q = q_local[n1]
                value = float(inner_ql[n1])
                p_idx = int(np.argmin(np.where(feas_ql[:, n1], info_ql[:, n1], np.inf)))
                best_p = self._p_candidates[p_idx]
            # polish the cooperative side at the chosen jammer
            p_local = self._local_policies(best_p)
            feas_pl = self._min_e_over_zeta(p_local, best_q[None])[:, 0] <= distortion + DISTORTION_TOL
            if feas_pl.any():
                info_pl = self._info_matrix(p_local, best_q[None])[:, 0]
                masked = np.where(feas_pl, info_pl, np.inf)
                p2 = int(np.argmin(masked))
                if masked[p2] < value:
                    value = float(masked[p2])
                    best_p = p_local[p2]
        zeta = self._best_zeta(best_p, best_q)
        return _RatePoint(value, self._uncertainty(value, v0), best_p, zeta, best_q)

    def _best_zeta(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        spec = self.spec
        c = np.einsum(
            "x,xj,xjyz,yu->xuz", spec.p_x.mass, q, spec.w.kernel, p, optimize=True
        )
        per_hat = np.einsum("xuz,xh->uzh", c, spec.d.entries, optimize=True)
        return np.argmin(per_hat, axis=-1).astype(np.int64)


def r_upper(
    spec: ProblemSpec,
    distortion: float,
    grid: GridConfig | None = None,
    u_size: int | None = None,
) -> tuple[float, float]:
    """Robust rate upper bound at a distortion level: (value, uncertainty).

    The policy must meet the distortion constraint against every jammer; the
    rate is its worst-case conditional information I(U;Y|Z) over jammers.
    """
    size = u_size or spec.xhat_alphabet.size ** spec.z_alphabet.size
    point = RateBoundSolver(spec, size, grid).r_upper_point(distortion)
    return point.value, point.uncertainty


def r_lower(
    spec: ProblemSpec,
    distortion: float,
    grid: GridConfig | None = None,
    u_size: int | None = None,
) -> tuple[float, float]:
    """Robust rate lower bound at a distortion level: (value, uncertainty).

    The jammer commits first; the policy then only needs feasibility against
    that jammer."""
    size = u_size or spec.y_alphabet.size + 1
    point = RateBoundSolver(spec, size, grid).r_lower_point(distortion)
    return point.value, point.uncertainty


# ---------------------------------------------------------------------------
# per-type codebook rates


@dataclass(frozen=True)
class PerTypeRates:
    """Codebook rate, bin-resolution rate and their difference for one
    observed type; ``no_feasible_jammer`` marks an empty consistency set, in
    which case the resolution rate is an infinite sentinel and the bin rate
    is clamped to zero."""

    r_u: float
    r_tilde: float
    r_bin: float
    no_feasible_jammer: bool


def per_type_rates(
    t_y: TypeTable,
    policy: AuxiliaryPolicy,
    spec: ProblemSpec,
    eps: float,
    f_eps: float,
    grid: GridConfig | None = None,
) -> PerTypeRates:
    """Rates of the binned codebook attached to one observed type.

    The codebook rate is I(U;Y) under the observed type plus eps/4; the
    within-bin resolution rate is the smallest I(U;Z) over jammer kernels
    whose induced Y-marginal stays within ``f_eps`` of the type, minus eps/4.
    Both are clamped at zero.
    """
    if eps <= 0:
        raise UsageError("eps must be > 0")
    if f_eps < 0:
        raise UsageError("f_eps must be >= 0")
    grid = grid or GridConfig()
    p_uy = policy.p_u_given_y.matrix  # (Y, U)
    t_probs = t_y.probabilities
    if t_probs.shape != (spec.y_alphabet.size,):
        raise UsageError("type table does not match the Y alphabet")
    joint_yu = t_probs[:, None] * p_uy
    r_u = max(0.0, float(_mi_2d(joint_yu)) + eps / 4.0)

    col_j = simplex_lattice(spec.j_alphabet.size, grid.coarse_step)
    q_arr = column_product([col_j] * spec.x_alphabet.size, grid.max_candidates)

    def consistent(qs: np.ndarray) -> np.ndarray:
        margins = np.einsum(
            "x,nxj,xjy->ny", spec.p_x.mass, qs, spec.w.y_marginal_kernel, optimize=True
        )
        return np.abs(margins - t_probs[None, :]).max(axis=1) <= f_eps + TYPE_TOL

    def info_uz(qs: np.ndarray) -> np.ndarray:
        p_uz = np.einsum(
            "x,nxj,xjyz,yu->nuz", spec.p_x.mass, qs, spec.w.kernel, p_uy, optimize=True
        )
        return _mi_2d(p_uz)

    mask = consistent(q_arr)
    if not mask.any():
        return PerTypeRates(r_u, math.inf, 0.0, True)
    vals = np.where(mask, info_uz(q_arr), np.inf)
    n0 = int(np.argmin(vals))
    best = float(vals[n0])
    if grid.refine:
        cols = [
            simplex_window(q_arr[n0][x], grid.refine_step, grid.coarse_step)
            for x in range(spec.x_alphabet.size)
        ]
        q_local = column_product(cols, grid.max_candidates)
        mask_l = consistent(q_local)
        if mask_l.any():
            vals_l = np.where(mask_l, info_uz(q_local), np.inf)
            best = min(best, float(vals_l.min()))
    r_tilde = max(0.0, best - eps / 4.0)
    return PerTypeRates(r_u, r_tilde, r_u - r_tilde, False)


# ---------------------------------------------------------------------------
# distortion-sweep report


@dataclass(frozen=True)
class BoundPoint:
    d: float
    feasible: bool
    r_upper: float | None
    r_lower: float | None
    uncertainty_upper: float | None
    uncertainty_lower: float | None
    strategy_upper: dict | None
    strategy_lower: dict | None


@dataclass(frozen=True)
class BoundReport:
    d0: float
    d1: float
    d0_gap: float
    d1_gap: float
    points: tuple[BoundPoint, ...]


def _strategy_dict(point: _RatePoint) -> dict:
    return {
        "p_u_given_y": point.p_u_given_y.tolist(),
        "zeta": None if point.zeta is None else point.zeta.tolist(),
        "jammer_q": point.q_extreme.tolist(),
    }


def compute_bound_report(
    spec: ProblemSpec,
    d_values: list[float] | tuple[float, ...] | np.ndarray,
    grid: GridConfig | None = None,
    u_size_upper: int | None = None,
    u_size_lower: int | None = None,
    game_iterations: int = 8000,
) -> BoundReport:
    """Evaluate both rate bounds over a distortion sweep.

    Points below the reachable floor are reported as infeasible rather than
    aborting the sweep.
    """
    g0 = minimax_distortion_game(spec, True, iterations=game_iterations)
    g1 = minimax_distortion_game(spec, False, iterations=game_iterations)
    size_u = u_size_upper or spec.xhat_alphabet.size ** spec.z_alphabet.size
    size_l = u_size_lower or spec.y_alphabet.size + 1
    solver_u = RateBoundSolver(spec, size_u, grid, game_iterations)
    solver_l = RateBoundSolver(spec, size_l, grid, game_iterations)
    points = []
    for d_val in d_values:
        try:
            up = solver_u.r_upper_point(float(d_val))
            low = solver_l.r_lower_point(float(d_val))
        except InfeasibleDistortionError:
            points.append(BoundPoint(float(d_val), False, None, None, None, None, None, None))
            continue
        points.append(
            BoundPoint(
                float(d_val),
                True,
                up.value,
                low.value,
                up.uncertainty,
                low.uncertainty,
                _strategy_dict(up),
                _strategy_dict(low),
            )
        )
    return BoundReport(g0.value, g1.value, g0.duality_gap, g1.duality_gap, tuple(points))
