import itertools
import math

import numpy as np
import pytest

from avrs.adversary import DeterministicJammer
from avrs.coding import CodebookFamily, CodingParams, SessionConfig
from avrs.errors import EnumerationTooLargeError, UsageError
from avrs.lemmas import (
    exact_codeword_conditional,
    run_conditional_typicality,
    run_covering,
    run_markov_conclusion,
    run_packing,
    trend_check,
)
from avrs.model import AuxiliaryPolicy
from avrs.mtypes import TypeTable, nearest_type, type_template
from avrs.probability import Alphabet, CondDistribution, Distribution
from avrs.rng import philox_stream

from conftest import identity_policy, identity_z_spec, noisy_policy, wz_spec

A2 = Alphabet("S", 2)
T2 = Alphabet("T", 2)


def covering_config():
    spec = wz_spec(flip_y=0.05, jam_extra=0.1, flip_z=0.05)
    return SessionConfig(
        spec,
        noisy_policy(spec, stay=0.9),
        CodingParams(eps=0.2, delta2=0.15, gamma=0.25, f_eps=0.1, size_cap=2048),
    )


def packing_config():
    # within-bin rate pinned just above zero: bins stay at two codewords on
    # the whole ladder while the per-codeword hit probability decays
    spec = wz_spec(flip_y=0.01, jam_extra=0.02, flip_z=0.01)
    return SessionConfig(
        spec,
        noisy_policy(spec, stay=0.9),
        CodingParams(eps=1.7, delta2=0.2, gamma=0.1, f_eps=0.1, size_cap=4096),
    )


def markov_config():
    spec = wz_spec(flip_y=0.05, jam_extra=0.1, flip_z=0.05)
    return SessionConfig(
        spec,
        noisy_policy(spec, stay=0.9),
        CodingParams(eps=0.2, delta2=0.2, gamma=0.25, f_eps=0.1, size_cap=2048),
    )


class TestConditionalTypicality:
    def test_deterministic_channel_never_violates(self):
        w = CondDistribution(A2, T2, [[1.0, 0.0], [0.0, 1.0]])
        res = run_conditional_typicality(
            Distribution(A2, [0.5, 0.5]), w, n=100, delta0=0.2, trials=200, seed=1
        )
        assert res.empirical == 0.0

    def test_bsc_within_bound_and_vacuous_flagged(self):
        w = CondDistribution(A2, T2, [[0.8, 0.2], [0.2, 0.8]])
        res = run_conditional_typicality(
            Distribution(A2, [0.5, 0.5]), w, n=200, delta0=0.1, trials=2000, seed=2
        )
        assert res.bound == pytest.approx(4 * math.exp(-0.4), abs=1e-12)
        assert res.bound == pytest.approx(2.6812801841425576, abs=1e-12)
        assert res.vacuous  # the closed form exceeds one at this blocklength
        assert res.empirical <= res.bound + 3 * res.sigma

    def test_tight_radius_non_vacuous(self):
        w = CondDistribution(A2, T2, [[0.8, 0.2], [0.2, 0.8]])
        res = run_conditional_typicality(
            Distribution(A2, [0.5, 0.5]), w, n=200, delta0=0.25, trials=2000, seed=3
        )
        assert not res.vacuous
        assert res.within_bound

    def test_no_typical_input_diagnostic(self):
        w = CondDistribution(A2, T2, [[0.8, 0.2], [0.2, 0.8]])
        with pytest.raises(UsageError, match="typical"):
            run_conditional_typicality(
                Distribution(A2, [0.37, 0.63]), w, n=3, delta0=0.01, trials=10, seed=0
            )

    def test_seed_reproducible(self):
        w = CondDistribution(A2, T2, [[0.7, 0.3], [0.3, 0.7]])
        a = run_conditional_typicality(
            Distribution(A2, [0.5, 0.5]), w, n=60, delta0=0.12, trials=500, seed=11
        )
        b = run_conditional_typicality(
            Distribution(A2, [0.5, 0.5]), w, n=60, delta0=0.12, trials=500, seed=11
        )
        assert a.empirical == b.empirical


class TestCovering:
    def test_loose_threshold_always_succeeds(self):
        config = covering_config()
        loose = SessionConfig(
            config.spec,
            config.policy,
            CodingParams(eps=0.2, delta2=1.0, gamma=0.25, f_eps=0.1, size_cap=256),
        )
        res = run_covering(loose, nearest_type(np.array([0.5, 0.5]), 12), trials=200, seed=4)
        assert res.empirical == 1.0

    def test_reproducible(self):
        config = covering_config()
        t_y = nearest_type(np.array([0.5, 0.5]), 16)
        a = run_covering(config, t_y, trials=300, seed=5)
        b = run_covering(config, t_y, trials=300, seed=5)
        assert a.empirical == b.empirical

    def test_success_rises_along_ladder(self):
        config = covering_config()
        results = [
            run_covering(config, nearest_type(np.array([0.5, 0.5]), n), trials=600, seed=6)
            for n in (8, 16, 32)
        ]
        tc = trend_check(results, decreasing=False)
        assert tc.ok, (tc.values, tc.sigmas)


class TestPacking:
    def test_gamma_one_catches_everything(self):
        config = packing_config()
        wide = SessionConfig(
            config.spec,
            config.policy,
            CodingParams(eps=1.7, delta2=0.2, gamma=1.0, f_eps=1.0, size_cap=256),
        )
        jam = DeterministicJammer((0, 0), config.spec.j_alphabet)
        res = run_packing(wide, jam, n=12, trials=200, seed=7)
        assert res.empirical == 1.0

    def test_gamma_zero_generic_miss(self):
        config = packing_config()
        tight = SessionConfig(
            config.spec,
            config.policy,
            CodingParams(eps=1.7, delta2=0.2, gamma=0.0, f_eps=0.1, size_cap=256),
        )
        jam = DeterministicJammer((0, 0), config.spec.j_alphabet)
        res = run_packing(tight, jam, n=9, trials=300, seed=8)
        assert res.empirical <= 0.02

    def test_reproducible(self):
        config = packing_config()
        jam = DeterministicJammer((0, 0), config.spec.j_alphabet)
        a = run_packing(config, jam, 10, trials=150, seed=14)
        b = run_packing(config, jam, 10, trials=150, seed=14)
        assert a.empirical == b.empirical

    def test_rate_falls_along_ladder(self):
        config = packing_config()
        jam = DeterministicJammer((0, 0), config.spec.j_alphabet)
        results = [
            run_packing(config, jam, n, trials=1500, seed=11) for n in (8, 16, 32)
        ]
        tc = trend_check(results, decreasing=True)
        assert tc.ok, (tc.values, tc.sigmas)


class TestMarkovConclusion:
    def test_deterministic_pipeline_never_violates(self):
        spec = identity_z_spec()
        policy = AuxiliaryPolicy(
            CondDistribution(spec.y_alphabet, Alphabet("U", 1), [[1.0]]),
            np.array([[0, 1]]),
            spec.z_alphabet,
            spec.xhat_alphabet,
        )
        config = SessionConfig(spec, policy, CodingParams(eps=0.3, size_cap=32))
        jam = DeterministicJammer((0, 0), spec.j_alphabet)
        res = run_markov_conclusion(config, jam, n=32, delta4=0.35, trials=200, seed=9)
        assert res.empirical == 0.0

    def test_reproducible(self):
        config = markov_config()
        jam = DeterministicJammer((0, 0), config.spec.j_alphabet)
        a = run_markov_conclusion(config, jam, 16, 0.2, trials=200, seed=10)
        b = run_markov_conclusion(config, jam, 16, 0.2, trials=200, seed=10)
        assert a.empirical == b.empirical

    def test_violations_fall_along_ladder(self):
        config = markov_config()
        jam = DeterministicJammer((0, 0), config.spec.j_alphabet)
        results = [
            run_markov_conclusion(config, jam, n, 0.2, trials=500, seed=12)
            for n in (8, 16, 32)
        ]
        tc = trend_check(results, decreasing=True)
        assert tc.ok, (tc.values, tc.sigmas)


class TestExactCodewordConditional:
    def _config(self, spec, policy, cap, delta2=1.0, eps=0.8):
        return SessionConfig(
            spec, policy, CodingParams(eps=eps, delta2=delta2, gamma=0.3, f_eps=0.2, size_cap=cap)
        )

    def test_single_letter_alphabet(self):
        spec = wz_spec()
        policy = AuxiliaryPolicy(
            CondDistribution(spec.y_alphabet, Alphabet("U", 1), [[1.0], [1.0]]),
            np.array([[0, 0]]),
            spec.z_alphabet,
            spec.xhat_alphabet,
        )
        config = self._config(spec, policy, cap=4)
        t_y = TypeTable(np.array([2, 2]), 4)
        report = exact_codeword_conditional(config, t_y)
        assert report.h_u_given_y == 0.0
        only = report.probabilities[(0, 0, 0, 0)]
        assert only == pytest.approx(1.0)
        assert report.max_ratio == pytest.approx(1.0)

    def test_two_codeword_symmetry(self):
        # uniform sampling pmf, always-satisfying threshold: by symmetry the
        # chosen codeword is uniform over the symbol patterns
        spec = wz_spec()
        policy = noisy_policy(spec, stay=0.5)  # p_u = (0.5, 0.5)
        config = self._config(spec, policy, cap=2)
        single = exact_codeword_conditional(config, TypeTable(np.array([1, 0]), 1))
        assert single.num_codewords == 2
        assert single.probabilities[(0,)] == pytest.approx(0.5, abs=1e-12)
        assert single.probabilities[(1,)] == pytest.approx(0.5, abs=1e-12)
        report = exact_codeword_conditional(config, TypeTable(np.array([1, 1]), 2))
        total = sum(report.probabilities.values())
        assert total == pytest.approx(1.0, abs=1e-12)
        for pattern, prob in report.probabilities.items():
            assert prob == pytest.approx(0.25, abs=1e-12)

    def test_matches_independent_enumeration(self):
        spec = wz_spec()
        policy = noisy_policy(spec, stay=0.8)
        config = self._config(spec, policy, cap=2, delta2=0.5, eps=0.6)
        n = 6
        t_y = TypeTable(np.array([3, 3]), n)
        report = exact_codeword_conditional(config, t_y)

        # independent enumeration with its own probability arithmetic
        family = CodebookFamily(config)
        data = family.type_data(t_y)
        y = type_template(t_y)
        target = data.encoder_target
        patterns = list(itertools.product(range(2), repeat=n))

        def satisfies(u):
            counts = np.zeros((2, 2))
            for a, b in zip(u, y):
                counts[a, b] += 1
            return np.abs(counts / n - target).max() <= 0.5 + 1e-12

        def prob_of(u):
            return float(np.prod([data.p_u[s] for s in u]))

        law = {}
        sat_flags = {u: satisfies(u) for u in patterns}
        for cw0 in patterns:
            for cw1 in patterns:
                p = prob_of(cw0) * prob_of(cw1)
                sats = [u for u in (cw0, cw1) if sat_flags[u]]
                if sats:
                    for u in sats:
                        law[u] = law.get(u, 0.0) + p / len(sats)
                else:
                    law[cw0] = law.get(cw0, 0.0) + p
        for pattern, prob in report.probabilities.items():
            assert prob == pytest.approx(law[pattern], abs=1e-12)

    def test_refuses_oversized_enumeration(self):
        spec = wz_spec()
        policy = noisy_policy(spec, stay=0.8)
        config = self._config(spec, policy, cap=64)
        t_y = TypeTable(np.array([5, 5]), 10)
        with pytest.raises(EnumerationTooLargeError, match="realizations"):
            exact_codeword_conditional(config, t_y, max_enumeration=10_000)


class TestHarnessContract:
    def test_results_carry_uncertainty_fields(self):
        w = CondDistribution(A2, T2, [[0.7, 0.3], [0.3, 0.7]])
        res = run_conditional_typicality(
            Distribution(A2, [0.5, 0.5]), w, n=40, delta0=0.15, trials=100, seed=13
        )
        assert res.trials == 100
        assert res.sigma >= 0.0
        assert res.bound is not None
