import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tnnsim.temporal import (DEFAULT_PARAMS, INF, TemporalParams, as_volley,
                             normalize_volley, response_table, rnl_value)

W_MAX = DEFAULT_PARAMS.w_max
T_MAX = DEFAULT_PARAMS.t_max


def rnl_oracle(w, x, t):
    """Hand-stepped ramp: one unit per tick from the arrival tick, capped at w."""
    if x >= INF:
        return 0
    value = 0
    for tick in range(t + 1):
        if tick >= x and value < w:
            value += 1
    return value


class TestTemporalParams:
    def test_defaults(self):
        p = TemporalParams()
        assert (p.t_max, p.w_max, p.gamma_len) == (7, 7, 15)
        assert p.precision_bits == 3
        assert p.pulse_len == 8

    def test_gamma_len_is_derived(self):
        assert TemporalParams(t_max=3, w_max=5).gamma_len == 9

    @pytest.mark.parametrize("t_max", [0, 4, 6])
    def test_rejects_non_power_window(self, t_max):
        with pytest.raises(ValueError):
            TemporalParams(t_max=t_max)


class TestRnlValue:
    def test_full_weight_saturates_before_window_end(self):
        # w=7 spike at 0: peak value 7 is reached at t=6 and held.
        assert rnl_value(7, 0, 7) == 7
        assert rnl_value(7, 0, 6) == 7
        assert rnl_value(7, 0, 5) == 6

    def test_silent_input_contributes_nothing(self):
        assert rnl_value(3, INF, 5) == 0

    def test_three_units_after_three_ticks(self):
        # Value 3 at t=2, so three such synapses reach 9 >= theta=8.
        assert rnl_value(7, 0, 2) == 3
        assert 3 * rnl_value(7, 0, 2) >= 8

    def test_first_unit_on_arrival_tick(self):
        assert rnl_value(5, 4, 4) == 1
        assert rnl_value(5, 4, 3) == 0

    @pytest.mark.parametrize("w", range(W_MAX + 1))
    @pytest.mark.parametrize("x", list(range(T_MAX + 1)) + [INF])
    def test_matches_hand_stepped_ramp(self, w, x):
        for t in range(DEFAULT_PARAMS.gamma_len):
            assert rnl_value(w, x, t) == rnl_oracle(w, x, t)

    @given(w=st.integers(0, W_MAX), x=st.integers(0, T_MAX))
    def test_saturation_from_x_plus_w_minus_1(self, w, x):
        for t in range(max(x + w - 1, 0), DEFAULT_PARAMS.gamma_len):
            if w > 0:
                assert rnl_value(w, x, t) == w

    @given(w=st.integers(0, W_MAX),
           x=st.sampled_from(list(range(T_MAX + 1)) + [INF]),
           t=st.integers(0, DEFAULT_PARAMS.gamma_len - 1))
    def test_never_exceeds_w_max(self, w, x, t):
        assert 0 <= rnl_value(w, x, t) <= W_MAX

    def test_rejects_out_of_range_inputs(self):
        with pytest.raises(ValueError):
            rnl_value(8, 0, 0)
        with pytest.raises(ValueError):
            rnl_value(1, 0, 15)


class TestNormalizeVolley:
    def test_shifts_to_first_spike(self):
        assert normalize_volley([2, 5, INF]).tolist() == [0, 3, INF]

    def test_all_inf_unchanged(self):
        assert normalize_volley([INF, INF]).tolist() == [INF, INF]

    def test_times_past_window_become_inf(self):
        assert normalize_volley([0, 9]).tolist() == [0, INF]

    @given(st.lists(st.sampled_from(list(range(12)) + [INF]), min_size=1, max_size=16))
    def test_idempotent(self, times):
        once = normalize_volley(times)
        assert normalize_volley(once).tolist() == once.tolist()

    @given(st.lists(st.sampled_from(list(range(12)) + [INF]), min_size=1, max_size=16))
    def test_min_finite_is_zero_or_empty(self, times):
        v = normalize_volley(times)
        finite = v[v < INF]
        if finite.size:
            assert finite.min() == 0
            assert finite.max() <= T_MAX


class TestResponseTable:
    def test_agrees_with_scalar(self):
        table = response_table()
        for w in range(W_MAX + 1):
            for xi, x in enumerate(list(range(T_MAX + 1)) + [INF]):
                for t in range(DEFAULT_PARAMS.gamma_len):
                    assert table[w, xi, t] == rnl_value(w, x, t)


def test_as_volley_validates_shape():
    with pytest.raises(ValueError):
        as_volley([[0, 1]])
    with pytest.raises(ValueError):
        as_volley([0, 1], n=3)
