import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnnsim.column import ColumnSpec
from tnnsim.errors import ConfigurationError
from tnnsim.plasticity import (BernoulliStream, Reward, StdpParams, column_learn,
                               f_stab_prob, learn_deltas, quantize_prob,
                               reward_index, rstdp_delta, stdp_case, stdp_cases,
                               stdp_delta)
from tnnsim.temporal import INF

ALL_ONES = StdpParams(mu_capture=1, mu_backoff=1, mu_search=1, mu_min=1)
ALL_ZERO = StdpParams(mu_capture=0, mu_backoff=0, mu_search=0, mu_min=0)


def forced(bit: int):
    """A draw source that ignores channels (valid only with mu in {0, 1})."""
    return lambda channel, prob: bit if prob > 0 else 0


def mc_probability(case: int, w: int, params: StdpParams, reward: Reward,
                   sign: int, n: int = 100_000, seed: int = 99) -> float:
    """Empirical P(delta == sign) over n independently keyed trials."""
    stream = BernoulliStream(seed)
    shape = (4, n // 4, 1)
    keys = stream.static_keys(0, 4, n // 4, 1)
    weights = np.full(shape, w, dtype=np.int64)
    cases = np.full(shape, case, dtype=np.int8)
    delta = learn_deltas(weights, cases, reward_index(reward), params, stream,
                         keys, gamma=0)
    return float((delta == sign).mean())


def closed_form(case: int, w: int, params: StdpParams) -> float:
    """Unsupervised update probability, independent of the draw machinery."""
    f = f_stab_prob(w)
    stabilized = params.mu_min + f - f * params.mu_min
    return {
        1: params.mu_capture * stabilized,
        2: params.mu_backoff * stabilized,
        3: params.mu_search,
        4: params.mu_backoff * stabilized,
        5: 0.0,
    }[case]


class TestCaseClassification:
    @pytest.mark.parametrize("x,z,case", [
        (2, 5, 1), (3, 3, 1), (4, 1, 2), (0, INF, 3), (INF, 4, 4), (INF, INF, 5),
    ])
    def test_scalar(self, x, z, case):
        assert stdp_case(x, z) == case

    def test_matrix_matches_scalar(self):
        x = np.array([0, 3, INF, 7])
        z = np.array([2, INF, 0])
        cases = stdp_cases(x, z)
        for i, xi in enumerate(x):
            for j, zj in enumerate(z):
                assert cases[i, j] == stdp_case(int(xi), int(zj))


class TestStabilization:
    def test_sticky_at_both_ends(self):
        assert f_stab_prob(0) == 0.0
        assert f_stab_prob(7) == 0.0

    def test_interior_values(self):
        assert f_stab_prob(1) == pytest.approx(6 / 49)
        assert f_stab_prob(3) == pytest.approx(12 / 49)
        assert f_stab_prob(4) == pytest.approx(12 / 49)  # symmetric

    def test_rejects_out_of_range(self):
        with pytest.raises(ConfigurationError):
            f_stab_prob(8)


class TestDeltaRules:
    def test_case5_never_updates(self):
        for w in range(8):
            assert stdp_delta(5, w, ALL_ONES, forced(1)) == 0

    def test_case1_forced_increments(self):
        assert stdp_delta(1, 3, ALL_ONES, forced(1)) == +1

    def test_case2_case4_forced_decrement(self):
        assert stdp_delta(2, 3, ALL_ONES, forced(1)) == -1
        assert stdp_delta(4, 3, ALL_ONES, forced(1)) == -1

    def test_case3_search_unstabilized(self):
        # search ignores F and mu_min entirely
        params = StdpParams(mu_capture=0, mu_backoff=0, mu_search=1, mu_min=0)
        assert stdp_delta(3, 0, params, forced(1)) == +1

    def test_reward_plus_disables_search(self):
        assert rstdp_delta(3, 3, ALL_ONES, Reward.PLUS, forced(1)) == 0
        assert rstdp_delta(1, 3, ALL_ONES, Reward.PLUS, forced(1)) == +1

    def test_reward_minus_flips_capture_keeps_search(self):
        assert rstdp_delta(1, 3, ALL_ONES, Reward.MINUS, forced(1)) == -1
        assert rstdp_delta(3, 3, ALL_ONES, Reward.MINUS, forced(1)) == +1
        assert rstdp_delta(2, 3, ALL_ONES, Reward.MINUS, forced(1)) == 0
        assert rstdp_delta(4, 3, ALL_ONES, Reward.MINUS, forced(1)) == 0

    def test_reward_zero_keeps_only_search(self):
        assert rstdp_delta(2, 3, ALL_ONES, Reward.ZERO, forced(1)) == 0
        assert rstdp_delta(3, 3, ALL_ONES, Reward.ZERO, forced(1)) == +1
        assert rstdp_delta(1, 3, ALL_ONES, Reward.ZERO, forced(1)) == 0

    def test_unsupervised_wire_code(self):
        assert Reward.UNSUPERVISED.wire == "10"
        assert Reward.from_wire("11") is Reward.MINUS
        assert Reward.from_wire("01") is Reward.PLUS
        assert Reward.from_wire("00") is Reward.ZERO


class TestBernoulliStream:
    def test_scalar_matches_vector(self):
        stream = BernoulliStream(42)
        keys = stream.static_keys(1, 3, 4, 2)
        vec = stream.bits(quantize_prob(0.37), keys, gamma=9, channel=5)
        for c in range(3):
            for i in range(4):
                for j in range(2):
                    bit = stream.bit(0.37, layer=1, column=c, neuron=j,
                                     synapse=i, gamma=9, channel=5)
                    assert bit == int(vec[c, i, j])

    def test_same_key_same_bit(self):
        stream = BernoulliStream(7)
        kw = dict(layer=0, column=5, neuron=2, synapse=11, gamma=123, channel=3)
        assert stream.bit(0.5, **kw) == stream.bit(0.5, **kw)

    def test_different_seed_different_stream(self):
        a = BernoulliStream(1)
        b = BernoulliStream(2)
        bits_a = [a.bit(0.5, gamma=g) for g in range(64)]
        bits_b = [b.bit(0.5, gamma=g) for g in range(64)]
        assert bits_a != bits_b

    @pytest.mark.parametrize("mu", [0.03, 0.2, 0.5, 0.9])
    def test_frequency_converges(self, mu):
        n = 100_000
        stream = BernoulliStream(2024)
        keys = stream.static_keys(0, 4, n // 4, 1)
        freq = stream.bits(quantize_prob(mu), keys, gamma=0, channel=0).mean()
        sigma = np.sqrt(mu * (1 - mu) / n)
        assert abs(freq - mu) <= 3 * sigma

    def test_extreme_probabilities_are_exact(self):
        stream = BernoulliStream(5)
        keys = stream.static_keys(0, 1, 1000, 1)
        assert stream.bits(quantize_prob(1.0), keys, 0, 0).all()
        assert not stream.bits(quantize_prob(0.0), keys, 0, 0).any()

    def test_key_range_validation(self):
        with pytest.raises(ConfigurationError):
            BernoulliStream.pack_static(0, 1 << 16, 0, 0)
        with pytest.raises(ConfigurationError):
            quantize_prob(1.5)


class TestClosedFormProbabilities:
    def test_documented_case1_example(self):
        # mu_cap * (F + (1-F) * mu_min) for w=1: 0.5 * (6/49 + (43/49)*0.25)
        params = StdpParams(mu_capture=0.5, mu_backoff=0, mu_search=0, mu_min=0.25)
        assert closed_form(1, 1, params) == pytest.approx(0.1709, abs=5e-5)
        freq = mc_probability(1, 1, params, Reward.UNSUPERVISED, +1)
        sigma = np.sqrt(0.1709 * (1 - 0.1709) / 100_000)
        assert abs(freq - 0.1709) <= 3 * sigma

    @pytest.mark.parametrize("case,sign", [(1, +1), (2, -1), (3, +1), (4, -1)])
    @pytest.mark.parametrize("w", [0, 2, 5])
    def test_grid_sample(self, case, sign, w):
        params = StdpParams(mu_capture=0.6, mu_backoff=0.3, mu_search=0.05,
                            mu_min=0.2)
        expect = closed_form(case, w, params)
        freq = mc_probability(case, w, params, Reward.UNSUPERVISED, sign,
                              n=40_000, seed=case * 10 + w)
        sigma = np.sqrt(expect * (1 - expect) / 40_000)
        assert abs(freq - expect) <= 3.5 * sigma


class TestColumnLearn:
    def spec(self, p=6, q=4):
        return ColumnSpec(p=p, q=q, theta=4)

    def test_zero_probabilities_identity(self, rng):
        spec = self.spec()
        w = rng.integers(0, 8, (6, 4))
        out = column_learn(spec, w, [0, 1, 2, INF, 4, INF], [2, INF, 0, INF],
                           Reward.UNSUPERVISED, ALL_ZERO, BernoulliStream(3))
        assert (out == w).all()

    def test_all_inf_leaves_weights(self, rng):
        spec = self.spec()
        w = rng.integers(0, 8, (6, 4))
        out = column_learn(spec, w, [INF] * 6, [INF] * 4,
                           Reward.UNSUPERVISED, ALL_ONES, BernoulliStream(3))
        assert (out == w).all()

    def test_winner_capture_with_forced_probs(self):
        spec = self.spec(p=2, q=2)
        w = np.array([[3, 3], [3, 3]])
        # neuron 0 fires at 3; input 0 spikes at 0 (case 1), input 1 silent (case 4)
        out = column_learn(spec, w, [0, INF], [3, INF],
                           Reward.UNSUPERVISED, ALL_ONES, BernoulliStream(3))
        assert out[0, 0] == 4   # capture
        assert out[1, 0] == 2   # backoff on silent input
        assert out[0, 1] == 4   # non-winner, spiking input: search
        assert out[1, 1] == 3   # non-winner, silent input: case 5

    def test_matches_scalar_rule_composition(self, rng):
        spec = self.spec(p=5, q=3)
        stream = BernoulliStream(77)
        params = StdpParams(mu_capture=0.7, mu_backoff=0.4, mu_search=0.2,
                            mu_min=0.3)
        w = rng.integers(0, 8, (5, 3))
        x = np.where(rng.random(5) < 0.3, INF, rng.integers(0, 8, 5))
        z = np.where(rng.random(3) < 0.5, INF, rng.integers(0, 8, 3))
        for reward in Reward:
            got = column_learn(spec, w, x, z, reward, params, stream,
                               layer=1, column=2, gamma=5)
            expect = w.copy()
            for i in range(5):
                for j in range(3):
                    draw = lambda ch, prob: stream.bit(
                        prob, layer=1, column=2, neuron=j, synapse=i,
                        gamma=5, channel=ch)
                    d = rstdp_delta(stdp_case(int(x[i]), int(z[j])), int(w[i, j]),
                                    params, reward, draw)
                    expect[i, j] = min(max(w[i, j] + d, 0), 7)
            assert (got == expect).all(), reward

    @given(st.integers(0, 2 ** 31 - 1), st.integers(1, 30))
    @settings(max_examples=25, deadline=None)
    def test_weights_stay_in_range(self, seed, steps):
        rng = np.random.default_rng(seed)
        spec = self.spec(p=4, q=3)
        stream = BernoulliStream(seed)
        params = StdpParams(mu_capture=0.9, mu_backoff=0.9, mu_search=0.5,
                            mu_min=0.5)
        w = rng.integers(0, 8, (4, 3))
        for g in range(steps):
            x = np.where(rng.random(4) < 0.3, INF, rng.integers(0, 8, 4))
            z = np.where(rng.random(3) < 0.5, INF, rng.integers(0, 8, 3))
            w = column_learn(spec, w, x, z, Reward.UNSUPERVISED, params,
                             stream, gamma=g)
            assert ((0 <= w) & (w <= 7)).all()

    def test_deterministic_across_runs(self, rng):
        spec = self.spec()
        w0 = rng.integers(0, 8, (6, 4))
        def run():
            stream = BernoulliStream(11)
            w = w0
            for g in range(10):
                w = column_learn(spec, w, [0, 1, 2, INF, 4, INF],
                                 [2, INF, 0, INF], Reward.UNSUPERVISED,
                                 StdpParams(), stream, gamma=g)
            return w
        assert (run() == run()).all()
