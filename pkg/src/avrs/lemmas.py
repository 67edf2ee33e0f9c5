"""Statistical harnesses for the typicality, covering, packing and Markov-
chain concentration statements behind the coding scheme.

Every harness reports the empirical value together with the closed-form
bound when one exists, the binomial standard error and the sample size, and
never asserts anything sharper than three standard errors.  Bounds that
evaluate above one at the requested blocklength are flagged vacuous rather
than silently passing.  Where the underlying statements only assert the
existence of positive exponents, the harness measures the empirical
exponent instead of assuming a value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .coding import CodebookFamily, SessionConfig, simulate_session
from .adversary import JammerStrategy
from .errors import EnumerationTooLargeError, UsageError
from .model import ProblemSpec
from .mtypes import (
    TYPE_TOL,
    SymbolVector,
    TypeTable,
    nearest_type,
    type_template,
)
from .probability import CondDistribution, Distribution, entropy_bits
from .rng import derive_seed, philox_stream

__all__ = [
    "HarnessResult",
    "TrendCheck",
    "trend_check",
    "run_conditional_typicality",
    "run_covering",
    "run_packing",
    "run_markov_conclusion",
    "exact_codeword_conditional",
    "ExactCodewordReport",
]


@dataclass(frozen=True)
class HarnessResult:
    """One harness measurement: empirical frequency, bound (if any), the
    binomial standard error, and whether the bound is vacuous (>= 1)."""

    name: str
    n: int
    empirical: float
    bound: float | None
    sigma: float
    trials: int
    vacuous: bool

    @property
    def within_bound(self) -> bool | None:
        if self.bound is None:
            return None
        return self.empirical <= self.bound + 3.0 * self.sigma


def _binomial_sigma(p_hat: float, trials: int) -> float:
    if trials <= 1:
        return 0.0
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials)


@dataclass(frozen=True)
class TrendCheck:
    """Monotonicity of a harness frequency along a blocklength ladder."""

    ns: tuple[int, ...]
    values: tuple[float, ...]
    sigmas: tuple[float, ...]
    decreasing: bool
    pairwise_ok: bool  # no step moves the wrong way beyond 3 sigma
    significant: bool  # endpoints differ in the stated direction by 3 sigma

    @property
    def ok(self) -> bool:
        return self.pairwise_ok and self.significant


def trend_check(results: list[HarnessResult], decreasing: bool = True) -> TrendCheck:
    values = tuple(r.empirical for r in results)
    sigmas = tuple(r.sigma for r in results)
    pairwise = True
    for a, b, sa, sb in zip(values, values[1:], sigmas, sigmas[1:]):
        slack = 3.0 * math.hypot(sa, sb)
        if decreasing and b > a + slack:
            pairwise = False
        if not decreasing and b < a - slack:
            pairwise = False
    net = values[0] - values[-1] if decreasing else values[-1] - values[0]
    significant = net >= 3.0 * math.hypot(sigmas[0], sigmas[-1])
    return TrendCheck(
        tuple(r.n for r in results), values, sigmas, decreasing, pairwise, significant
    )


def run_conditional_typicality(
    p_s: Distribution,
    w_ts: CondDistribution,
    n: int,
    delta0: float,
    trials: int,
    seed: int,
) -> HarnessResult:
    """Frequency that a memoryless output fails joint 3·delta0 typicality
    with a fixed delta0-typical input, against |S||T| exp(-2 n delta0^3)."""
    if delta0 <= 0:
        raise UsageError("delta0 must be > 0")
    if trials < 1:
        raise UsageError("trials must be >= 1")
    t_s = nearest_type(p_s.mass, n)
    if float(np.abs(t_s.probabilities - p_s.mass).max()) > delta0 + TYPE_TOL:
        raise UsageError(
            f"no delta0-typical input block exists at n={n}: the closest type "
            f"deviates by {np.abs(t_s.probabilities - p_s.mass).max():.4f}"
        )
    s = type_template(t_s)
    ns, nt = p_s.alphabet.size, w_ts.to_alphabet.size
    joint_target = p_s.mass[:, None] * w_ts.matrix
    cdf = np.cumsum(w_ts.matrix[s], axis=1)
    cdf[:, -1] = 1.0
    gen = philox_stream(seed, "cond-typicality")
    violations = 0
    for _ in range(trials):
        u = gen.random(n)
        t_draw = (u[:, None] >= cdf).sum(axis=1)
        comp = s * nt + t_draw
        counts = np.bincount(comp, minlength=ns * nt).reshape(ns, nt)
        dev = np.abs(counts / n - joint_target).max()
        if dev > 3.0 * delta0 + TYPE_TOL:
            violations += 1
    rate = violations / trials
    bound = ns * nt * math.exp(-2.0 * n * delta0**3)
    return HarnessResult(
        "conditional-typicality", n, rate, bound, _binomial_sigma(rate, trials), trials, bound >= 1.0
    )


def run_covering(
    config: SessionConfig, t_y: TypeTable, trials: int, seed: int
) -> HarnessResult:
    """Success rate of the encoder (no fallback) over uniform draws from the
    type class of ``t_y`` and fresh code draws."""
    from .coding import encode

    if trials < 1:
        raise UsageError("trials must be >= 1")
    family = CodebookFamily(config)
    n = t_y.n
    template = type_template(t_y)
    gen = philox_stream(seed, "covering")
    successes = 0
    for t in range(trials):
        y = SymbolVector(config.spec.y_alphabet, gen.permutation(template))
        cb = family.codebook(t_y, derive_seed(seed, "code", t))
        res = encode(y, cb, config.params.delta2, philox_stream(seed, "enc", t))
        successes += 0 if res.fallback_used else 1
    rate = successes / trials
    return HarnessResult("covering", n, rate, None, _binomial_sigma(rate, trials), trials, False)


def run_packing(
    config: SessionConfig,
    jammer: JammerStrategy,
    n: int,
    trials: int,
    seed: int,
) -> HarnessResult:
    """Frequency, among sessions whose encoder succeeded, that some other
    codeword of the sent bin also lands in the decoder's list."""
    if trials < 1:
        raise UsageError("trials must be >= 1")
    family = CodebookFamily(config)
    spec = config.spec
    cdf = np.cumsum(spec.p_x.mass)
    cdf[-1] = 1.0
    gen = philox_stream(seed, "packing-sources")
    false_candidates = 0
    effective = 0
    for t in range(trials):
        x = SymbolVector(spec.x_alphabet, np.searchsorted(cdf, gen.random(n), side="right"))
        report = simulate_session(x, jammer, config, derive_seed(seed, "trial", t), family=family)
        if report.e_enc:
            continue
        effective += 1
        false_candidates += 1 if report.e_dec2 else 0
    rate = false_candidates / effective if effective else 0.0
    return HarnessResult(
        "packing", n, rate, None, _binomial_sigma(rate, effective), effective, False
    )


def run_markov_conclusion(
    config: SessionConfig,
    jammer: JammerStrategy,
    n: int,
    delta4: float,
    trials: int,
    seed: int,
) -> HarnessResult:
    """Frequency that the full five-tuple (x, j, y, z, u) of a session fails
    delta4 joint typicality against the chain law built from the realized
    jamming conditional type.

    Conditioning rows for source symbols that never occur in x fall back to
    the marginal type of j, a fixed convention recorded here.
    """
    if trials < 1:
        raise UsageError("trials must be >= 1")
    family = CodebookFamily(config)
    spec, policy = config.spec, config.policy
    nx, nj = spec.x_alphabet.size, spec.j_alphabet.size
    ny, nz = spec.y_alphabet.size, spec.z_alphabet.size
    nu = policy.u_size
    cdf = np.cumsum(spec.p_x.mass)
    cdf[-1] = 1.0
    gen = philox_stream(seed, "markov-sources")
    violations = 0
    for t in range(trials):
        x = SymbolVector(spec.x_alphabet, np.searchsorted(cdf, gen.random(n), side="right"))
        report = simulate_session(x, jammer, config, derive_seed(seed, "trial", t), family=family)
        xs, js = report.x.symbols, report.j.symbols
        ys, zs, us = report.y.symbols, report.z.symbols, report.u_encoded.symbols
        pair = np.bincount(xs * nj + js, minlength=nx * nj).reshape(nx, nj)
        x_counts = pair.sum(axis=1)
        t_j_given_x = np.empty((nx, nj))
        marg = pair.sum(axis=0) / n
        for a in range(nx):
            t_j_given_x[a] = pair[a] / x_counts[a] if x_counts[a] > 0 else marg
        target = np.einsum(
            "x,xj,xjyz,yu->xjyzu",
            spec.p_x.mass,
            t_j_given_x,
            spec.w.kernel,
            policy.p_u_given_y.matrix,
            optimize=True,
        )
        comp = (((xs * nj + js) * ny + ys) * nz + zs) * nu + us
        counts = np.bincount(comp, minlength=nx * nj * ny * nz * nu).reshape(nx, nj, ny, nz, nu)
        dev = np.abs(counts / n - target).max()
        if dev > delta4 + TYPE_TOL:
            violations += 1
    rate = violations / trials
    return HarnessResult(
        "markov-conclusion", n, rate, None, _binomial_sigma(rate, trials), trials, False
    )


@dataclass(frozen=True)
class ExactCodewordReport:
    """Exact encoder output law at tiny blocklength.

    ``max_ratio`` is the largest P(U = u | y) over typical u divided by
    2^{-n H(U|Y)}; its empirical exponent ``g_emp`` = log2(max_ratio)/n is
    the measured slack of the conditional-probability bound."""

    n: int
    num_codewords: int
    probabilities: dict[tuple[int, ...], float]
    h_u_given_y: float
    typical_count: int
    max_ratio: float
    g_emp: float


def exact_codeword_conditional(
    config: SessionConfig,
    t_y: TypeTable,
    delta: float | None = None,
    max_enumeration: int = 1 << 22,
) -> ExactCodewordReport:
    """Enumerate every codebook realization and encoder tie-break to get the
    exact conditional law of the chosen codeword given a fixed y.

    Refuses when the enumeration (|U|^n)^{codewords} would exceed
    ``max_enumeration``.  The reference entropy H(U|Y) is computed under the
    test channel paired with the observed type.
    """
    family = CodebookFamily(config)
    data = family.type_data(t_y)
    n = t_y.n
    nu = config.policy.u_size
    num_cw = data.num_codewords
    patterns = nu**n
    total = patterns**num_cw
    if total > max_enumeration:
        raise EnumerationTooLargeError(
            f"exact enumeration needs {patterns}^{num_cw} = {total} codebook "
            f"realizations (> {max_enumeration}); lower n, |U| or the size cap"
        )
    y = SymbolVector(config.spec.y_alphabet, type_template(t_y))
    all_patterns = np.array(list(itertools.product(range(nu), repeat=n)), dtype=np.int64)
    pattern_prob = np.prod(data.p_u[all_patterns], axis=1)
    # per-pattern joint deviation with the fixed y
    ny = config.spec.y_alphabet.size
    comp = all_patterns * ny + y.symbols[None, :]
    offsets = np.arange(patterns)[:, None] * nu * ny
    counts = np.bincount((comp + offsets).ravel(), minlength=patterns * nu * ny)
    counts = counts.reshape(patterns, nu, ny)
    dev = np.abs(counts / n - data.encoder_target[None]).max(axis=(1, 2))
    satisfies = dev <= config.params.delta2 + TYPE_TOL

    law = np.zeros(patterns)
    for combo in itertools.product(range(patterns), repeat=num_cw):
        prob = float(np.prod(pattern_prob[list(combo)]))
        if prob == 0.0:
            continue
        sat = [g for g in combo if satisfies[g]]
        if sat:
            share = prob / len(sat)
            for g in sat:
                law[g] += share
        else:
            law[combo[0]] += prob

    if delta is None:
        delta = config.params.delta2
    h_rows = entropy_bits(config.policy.p_u_given_y.matrix, axis=-1)
    h_u_given_y = float(np.sum(t_y.probabilities * h_rows))
    typical = dev <= delta + TYPE_TOL
    floor = 2.0 ** (-n * h_u_given_y)
    max_ratio = float((law[typical] / floor).max()) if typical.any() else 0.0
    g_emp = math.log2(max_ratio) / n if max_ratio > 0 else -math.inf
    probabilities = {
        tuple(int(v) for v in all_patterns[g]): float(law[g])
        for g in range(patterns)
        if law[g] > 0
    }
    return ExactCodewordReport(
        n, num_cw, probabilities, h_u_given_y, int(typical.sum()), max_ratio, g_emp
    )
