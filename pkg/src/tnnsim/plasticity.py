"""STDP / R-STDP update rules driven by a deterministic Bernoulli bit source.

Update rules (per synapse, once per gamma cycle), with x the input spike
time, z the post-WTA output spike time, B(mu) a Bernoulli bit and
F(w) = (w/w_max)(1 - w/w_max) the stabilizing probability:

    Case 1  x, z finite, x <= z :  dw = +B(mu_capture) * (B(F(w)) OR B(mu_min))
    Case 2  x, z finite, x >  z :  dw = -B(mu_backoff) * (B(F(w)) OR B(mu_min))
    Case 3  x finite,  z absent :  dw = +B(mu_search)
    Case 4  x absent,  z finite :  dw = -B(mu_backoff) * (B(F(w)) OR B(mu_min))
    Case 5  both absent         :  dw = 0

The max() of the stabilization term is realized as the OR of two independent
Bernoulli bits, mirroring the inc/dec logic of the hardware. A 2-bit reward
signal modulates the rules: reward '+' disables Case 3, reward '-' keeps only
Cases 1 (sign-flipped) and 3, reward '0' keeps only Case 3, and the
"unsupervised" code applies the table untouched.

The hardware's LFSR network is replaced by a counter-based keyed generator:
every bit is a pure function of (seed, layer, column, neuron, synapse,
gamma_index, channel), so results are independent of evaluation order and
thread count.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .temporal import DEFAULT_PARAMS, INF, TemporalParams, as_volley
from .column import ColumnSpec, validate_weights

_M64 = (1 << 64) - 1
_Q_ONE = 1 << 16  # probabilities quantized to 16-bit fractions


def quantize_prob(prob: float) -> int:
    """Round a probability to a 16-bit fraction numerator (0..65536)."""
    if not 0.0 <= prob <= 1.0:
        raise ConfigurationError(f"probability {prob} outside [0, 1]")
    return round(prob * _Q_ONE)


@dataclass(frozen=True)
class StdpParams:
    """Learning probabilities. Defaults are documented tunables, not claims."""

    mu_capture: float = 0.6
    mu_backoff: float = 0.3
    mu_search: float = 0.03
    mu_min: float = 0.2

    def __post_init__(self):
        for name in ("mu_capture", "mu_backoff", "mu_search", "mu_min"):
            quantize_prob(getattr(self, name))

    def case_mu_q16(self) -> np.ndarray:
        """Quantized update probability per case (index 0 and 5 unused)."""
        return np.array(
            [0,
             quantize_prob(self.mu_capture),
             quantize_prob(self.mu_backoff),
             quantize_prob(self.mu_search),
             quantize_prob(self.mu_backoff),
             0],
            dtype=np.uint32,
        )


class Reward(enum.Enum):
    """2-bit reward wire: drives which STDP cases act and with which sign."""

    UNSUPERVISED = "10"
    PLUS = "01"
    ZERO = "00"
    MINUS = "11"

    @property
    def wire(self) -> str:
        return self.value

    @classmethod
    def from_wire(cls, bits: str) -> "Reward":
        return cls(bits)


_REWARD_INDEX = {Reward.UNSUPERVISED: 0, Reward.PLUS: 1, Reward.ZERO: 2, Reward.MINUS: 3}

# Signed enable per (reward, case): 0 = rule disabled for that reward.
_SIGN_TABLE = np.array(
    [
        [0, +1, -1, +1, -1, 0],  # unsupervised: full table
        [0, +1, -1, 0, -1, 0],   # reward +: search (case 3) suppressed
        [0, 0, 0, +1, 0, 0],     # reward 0: only search
        [0, -1, 0, +1, 0, 0],    # reward -: capture flips sign, backoff off
    ],
    dtype=np.int8,
)

# Cases whose magnitude is gated by the stabilization OR-term.
_STABILIZED = np.array([False, True, True, False, True, False])

# Independent draw channels per (case, role); 15 is a dummy for unused draws.
_CH_MU = np.array([15, 0, 3, 6, 7, 15], dtype=np.intp)
_CH_F = np.array([15, 1, 4, 15, 8, 15], dtype=np.intp)
_CH_MIN = np.array([15, 2, 5, 15, 9, 15], dtype=np.intp)


def stdp_case(x: int, z: int) -> int:
    """Classify one (input spike time, output spike time) pair into cases 1..5."""
    if x < INF and z < INF:
        return 1 if x <= z else 2
    if x < INF:
        return 3
    if z < INF:
        return 4
    return 5


def stdp_cases(x_volley, z_volley) -> np.ndarray:
    """Vectorized case matrix: entry (i, j) classifies input i against neuron j."""
    x = np.asarray(x_volley, dtype=np.int32)[..., :, None]
    z = np.asarray(z_volley, dtype=np.int32)[..., None, :]
    xf, zf = x < INF, z < INF
    cases = np.full(np.broadcast_shapes(x.shape, z.shape), 5, dtype=np.int8)
    both = xf & zf
    cases[both & (x <= z)] = 1
    cases[both & (x > z)] = 2
    cases[xf & ~zf] = 3
    cases[~xf & zf] = 4
    return cases


def f_stab_prob(w: int, params: TemporalParams = DEFAULT_PARAMS) -> float:
    """Stabilization probability (w/w_max)(1 - w/w_max); sticky at 0 and w_max."""
    if not 0 <= w <= params.w_max:
        raise ConfigurationError(f"weight {w} outside [0, {params.w_max}]")
    frac = w / params.w_max
    return frac * (1.0 - frac)


def f_stab_q16(params: TemporalParams = DEFAULT_PARAMS) -> np.ndarray:
    """Quantized F(w) for every representable weight."""
    return np.array(
        [quantize_prob(f_stab_prob(w, params)) for w in range(params.w_max + 1)],
        dtype=np.uint32,
    )


def _sm64_int(x: int) -> int:
    """SplitMix64 finalizer on Python ints (reference path)."""
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def _sm64_arr(x: np.ndarray) -> np.ndarray:
    # uint64 wraparound is the point here; hush numpy's scalar-overflow warning
    with np.errstate(over="ignore"):
        x = np.array(x, dtype=np.uint64)  # fresh buffer; mutated in place below
        x += np.uint64(0x9E3779B97F4A7C15)
        x ^= x >> np.uint64(30)
        x *= np.uint64(0xBF58476D1CE4E5B9)
        x ^= x >> np.uint64(27)
        x *= np.uint64(0x94D049BB133111EB)
        x ^= x >> np.uint64(31)
        return x


# Field widths for key packing; keys outside these ranges are rejected.
_MAX_LAYER = 1 << 4
_MAX_COLUMN = 1 << 16
_MAX_NEURON = 1 << 8
_MAX_SYNAPSE = 1 << 16
_MAX_CHANNEL = 1 << 4


class BernoulliStream:
    """Deterministic keyed Bernoulli source standing in for the LFSR network.

    A draw is a pure function of (seed, key): the packed static part of the
    key (layer, column, neuron, synapse) and the dynamic part (gamma index,
    channel) are mixed through SplitMix64 and the low 16 bits are compared
    against the quantized probability. Identical keys give identical bits in
    any evaluation order; distinct keys give independent-quality bits.
    """

    def __init__(self, seed: int):
        self.seed = seed & _M64
        self._rot_seed = ((self.seed << 32) | (self.seed >> 32)) & _M64

    @staticmethod
    def pack_static(layer: int, column: int, neuron: int, synapse: int) -> int:
        if not (0 <= layer < _MAX_LAYER and 0 <= column < _MAX_COLUMN
                and 0 <= neuron < _MAX_NEURON and 0 <= synapse < _MAX_SYNAPSE):
            raise ConfigurationError(
                f"draw key out of range: layer={layer} column={column} "
                f"neuron={neuron} synapse={synapse}"
            )
        return (((layer << 16 | column) << 8 | neuron) << 16) | synapse

    def static_keys(self, layer: int, columns, p: int, q: int) -> np.ndarray:
        """Pre-mixed static keys, shape (len(columns), p, q).

        ``columns`` is a column-index array, or an int n meaning range(n).
        """
        if isinstance(columns, int):
            columns = np.arange(columns)
        cols = np.asarray(columns, dtype=np.uint64)[:, None, None]
        syn = np.arange(p, dtype=np.uint64)[None, :, None]
        neu = np.arange(q, dtype=np.uint64)[None, None, :]
        self.pack_static(layer, int(cols.max()), q - 1, p - 1)  # range check once
        packed = (((np.uint64(layer) << np.uint64(16) | cols) << np.uint64(8) | neu)
                  << np.uint64(16)) | syn
        return _sm64_arr(packed ^ np.uint64(self.seed))

    def draw16(self, static_mixed: np.ndarray, gamma: int, channel) -> np.ndarray:
        """16-bit uniform values for every pre-mixed static key.

        ``channel`` may be a scalar or a per-key array; channels live in
        0..15, so array channels go through a 16-entry mixed-LUT gather
        rather than a full hash pass.
        """
        channel = np.asarray(channel)
        if channel.ndim:
            lut = _sm64_arr(
                ((np.uint64(gamma) << np.uint64(4))
                 | np.arange(_MAX_CHANNEL, dtype=np.uint64))
                ^ np.uint64(self._rot_seed))
            dyn_mixed = lut[channel]
        else:
            dyn = (np.uint64(gamma) << np.uint64(4)) | np.uint64(channel)
            dyn_mixed = _sm64_arr(dyn ^ np.uint64(self._rot_seed))
        h = _sm64_arr(static_mixed ^ dyn_mixed)
        h &= np.uint64(0xFFFF)
        return h

    def bits(self, prob_q16, static_mixed: np.ndarray, gamma: int, channel) -> np.ndarray:
        return self.draw16(static_mixed, gamma, channel) < prob_q16

    def bit(self, prob: float, *, layer: int = 0, column: int = 0, neuron: int = 0,
            synapse: int = 0, gamma: int = 0, channel: int = 0) -> int:
        """Scalar draw; bit-identical to the vectorized path for equal keys."""
        if not 0 <= channel < _MAX_CHANNEL:
            raise ConfigurationError(f"channel {channel} out of range")
        static_mixed = _sm64_int(self.pack_static(layer, column, neuron, synapse) ^ self.seed)
        dyn_mixed = _sm64_int((gamma << 4 | channel) ^ self._rot_seed)
        h = _sm64_int(static_mixed ^ dyn_mixed)
        return int((h & 0xFFFF) < quantize_prob(prob))


DrawFn = Callable[[int, float], int]  # (channel, probability) -> bit


def stdp_delta(case: int, w: int, params: StdpParams, draw: DrawFn,
               tparams: TemporalParams = DEFAULT_PARAMS) -> int:
    """Unsupervised weight delta in {-1, 0, +1} for one synapse."""
    return rstdp_delta(case, w, params, Reward.UNSUPERVISED, draw, tparams)


def rstdp_delta(case: int, w: int, params: StdpParams, reward: Reward, draw: DrawFn,
                tparams: TemporalParams = DEFAULT_PARAMS) -> int:
    """Reward-modulated weight delta for one synapse.

    ``draw`` supplies one Bernoulli bit per (channel, probability) request;
    channels keep the capture/backoff/search/min/F draws independent.
    """
    if case not in (1, 2, 3, 4, 5):
        raise ConfigurationError(f"unknown STDP case {case}")
    sign = int(_SIGN_TABLE[_REWARD_INDEX[reward], case])
    if sign == 0:
        return 0
    mu = (0.0, params.mu_capture, params.mu_backoff,
          params.mu_search, params.mu_backoff, 0.0)[case]
    mu_bit = draw(int(_CH_MU[case]), mu)
    if not _STABILIZED[case]:
        return sign * mu_bit
    f_bit = draw(int(_CH_F[case]), f_stab_prob(w, tparams))
    min_bit = draw(int(_CH_MIN[case]), params.mu_min)
    return sign * (mu_bit & (f_bit | min_bit))


def learn_deltas(
    weights: np.ndarray,
    cases: np.ndarray,
    reward_idx,
    params: StdpParams,
    stream: BernoulliStream,
    static_keys: np.ndarray,
    gamma: int,
    tparams: TemporalParams = DEFAULT_PARAMS,
) -> np.ndarray:
    """Vectorized delta kernel over an arbitrary (..., p, q) weight block.

    ``reward_idx`` is a scalar or broadcastable array of reward row indices
    (see ``Reward``/_REWARD_INDEX); ``static_keys`` must be the pre-mixed
    keys for exactly these synapses.
    """
    mu_q = params.case_mu_q16()[cases]
    sign = _SIGN_TABLE[reward_idx, cases]
    mu_bit = stream.bits(mu_q, static_keys, gamma, _CH_MU[cases])
    f_bit = stream.bits(f_stab_q16(tparams)[weights], static_keys, gamma, _CH_F[cases])
    min_bit = stream.bits(np.uint32(quantize_prob(params.mu_min)),
                          static_keys, gamma, _CH_MIN[cases])
    gate = np.where(_STABILIZED[cases], f_bit | min_bit, True)
    return (sign * (mu_bit & gate)).astype(np.int8)


def reward_index(reward: Reward) -> int:
    return _REWARD_INDEX[reward]


def column_learn(
    spec: ColumnSpec,
    weights,
    in_volley,
    z_out,
    reward: Reward,
    params: StdpParams,
    stream: BernoulliStream,
    *,
    layer: int = 0,
    column: int = 0,
    gamma: int = 0,
) -> np.ndarray:
    """One gamma cycle of (R-)STDP for a whole column; returns the new matrix."""
    w = validate_weights(weights, spec)
    x = as_volley(in_volley, n=spec.p)
    z = as_volley(z_out, n=spec.q)
    cases = stdp_cases(x, z)
    keys = stream.static_keys(layer, np.array([column]), spec.p, spec.q)[0]
    delta = learn_deltas(w, cases, _REWARD_INDEX[reward], params, stream,
                         keys, gamma, spec.params)
    return np.clip(w + delta, 0, spec.params.w_max)
