"""SRM0 neuron at two fidelities: closed-form behavioral and cycle-accurate.

The behavioral model evaluates the membrane potential directly as a sum of
ramp-no-leak responses. The cycle-accurate model steps the actual hardware
structure tick by tick: one countdown FSM per synapse emitting a serial
thermometer code, and an accumulating register initialized to -theta whose
sign bit is the spike detector. Both must produce identical spike times;
the test suite enforces this on random instances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ProtocolError
from .temporal import DEFAULT_PARAMS, INF, TemporalParams, as_volley, response_table


@dataclass(frozen=True)
class NeuronConfig:
    p: int
    theta: int
    params: TemporalParams = DEFAULT_PARAMS

    def __post_init__(self):
        if self.p < 1:
            raise ConfigurationError(f"synapse count must be >= 1, got {self.p}")
        if self.theta < 1:
            raise ConfigurationError(f"threshold must be >= 1, got {self.theta}")
        if not self.can_ever_fire:
            warnings.warn(
                f"theta={self.theta} exceeds p*w_max={self.p * self.params.w_max}; "
                "this neuron can never fire",
                stacklevel=2,
            )

    @property
    def can_ever_fire(self) -> bool:
        return self.theta <= self.p * self.params.w_max

    @property
    def register_bits(self) -> int:
        """Accumulator width: ceil(log2 p) + 1, with p rounded up to a power of two."""
        return max(1, int(np.ceil(np.log2(self.p)))) + 1


def _check_lengths(weights: np.ndarray, volley: np.ndarray):
    if weights.shape != volley.shape:
        raise ConfigurationError(
            f"weights length {weights.shape[0]} != volley length {volley.shape[0]}"
        )


def neuron_spike_time(
    weights,
    volley,
    theta: int,
    params: TemporalParams = DEFAULT_PARAMS,
) -> int:
    """First tick at which the summed RNL responses reach ``theta``, else INF.

    The search window stops at gamma_len - 2: the last two ticks of the
    cycle are reserved for weight restore and the plasticity update.
    """
    w = np.asarray(weights, dtype=np.int64)
    x = as_volley(volley)
    _check_lengths(w, x)
    last_tick = params.gamma_len - 2
    t = np.arange(last_tick + 1)[None, :]
    ramps = np.clip(t - x[:, None] + 1, 0, w[:, None])
    ramps[x >= INF, :] = 0
    potential = ramps.sum(axis=0)
    crossed = potential >= theta
    if not crossed.any():
        return INF
    return int(crossed.argmax())


class SynapseFsm:
    """3-bit counter that stores a weight and reads it out as thermometer code.

    A readout is driven by the w_max+1-tick input pulse: the counter emits 1
    each tick until it first reaches zero, latches its output at 0, wraps to
    w_max and keeps counting down, so that after the full pulse the stored
    weight is back to its original value. Weight updates (inc/dec, saturating)
    are only legal while no readout is in flight.
    """

    def __init__(self, weight: int, params: TemporalParams = DEFAULT_PARAMS):
        if not 0 <= weight <= params.w_max:
            raise ConfigurationError(f"weight {weight} outside [0, {params.w_max}]")
        self.params = params
        self.weight = weight          # logical stored weight
        self.shadow = weight          # live countdown value
        self.output_latched_zero = False
        self.in_readout = False
        self._ticks_seen = 0

    def readout_tick(self, pulse_active: bool) -> int:
        """Advance one unit clock; return the thermometer bit for this tick."""
        if not pulse_active:
            if self.in_readout:
                raise ProtocolError(
                    f"input pulse deasserted after {self._ticks_seen} ticks; "
                    f"expected {self.params.pulse_len}"
                )
            return 0
        if not self.in_readout:
            self.in_readout = True
            self._ticks_seen = 0
        if self._ticks_seen >= self.params.pulse_len:
            raise ProtocolError(
                f"input pulse longer than {self.params.pulse_len} ticks"
            )
        if self.shadow == 0:
            self.output_latched_zero = True
        bit = 0 if self.output_latched_zero else 1
        self.shadow = (self.shadow - 1) % (self.params.w_max + 1)
        self._ticks_seen += 1
        if self._ticks_seen == self.params.pulse_len:
            # Full pulse consumed: counter has wrapped back to the weight.
            assert self.shadow == self.weight
            self.in_readout = False
            self.output_latched_zero = False
        return bit

    def update(self, inc: bool, dec: bool):
        """Saturating weight update at the gamma boundary."""
        if inc and dec:
            raise ProtocolError("inc and dec asserted together")
        if self.in_readout:
            raise ProtocolError("weight update during readout")
        if inc:
            self.weight = min(self.weight + 1, self.params.w_max)
        elif dec:
            self.weight = max(self.weight - 1, 0)
        self.shadow = self.weight


@dataclass
class TickTrace:
    """Per-tick record of one cycle-accurate gamma cycle."""

    bits_summed: np.ndarray   # thermometer bits entering the accumulator, per tick
    register: np.ndarray      # accumulator value after each tick
    output_pulse: np.ndarray  # neuron output bit per tick


@dataclass
class AccumulatorState:
    """Neuron-body accumulator: signed register starting at -theta each cycle."""

    theta: int
    params: TemporalParams = DEFAULT_PARAMS
    register: int = field(init=False)
    fired: bool = field(init=False, default=False)
    pulse_counter: int = field(init=False, default=0)

    def __post_init__(self):
        self.register = -self.theta

    def tick(self, bit_sum: int) -> bool:
        """Accumulate one tick's thermometer bits; True while the output pulse is high."""
        self.register += bit_sum
        if self.register >= 0 and not self.fired:
            self.fired = True
            self.pulse_counter = self.params.pulse_len
        out = self.pulse_counter > 0
        if self.pulse_counter:
            self.pulse_counter -= 1
        return out


def run_neuron_gamma(
    weights,
    volley,
    theta: int,
    params: TemporalParams = DEFAULT_PARAMS,
    record_trace: bool = False,
) -> tuple[int, TickTrace | None]:
    """Cycle-accurate gamma cycle: synapse FSM countdowns into the accumulator.

    Each input spike at tick x drives its synapse FSM with a pulse_len-tick
    pulse starting at x; the per-tick thermometer bits are summed into the
    register (initialized to -theta). The spike time is the first tick the
    register becomes non-negative, within the same window as
    :func:`neuron_spike_time`. Weights are restored by construction (each
    pulse wraps the counter fully); this is asserted, not assumed.
    """
    w = np.asarray(weights, dtype=np.int64)
    x = as_volley(volley)
    _check_lengths(w, x)
    if ((w < 0) | (w > params.w_max)).any():
        raise ConfigurationError("weight outside [0, w_max]")
    finite_x = x < INF
    if ((x[finite_x] < 0) | (x[finite_x] > params.t_max)).any():
        raise ConfigurationError(
            f"finite spike times must lie in [0, {params.t_max}]; "
            "later pulses cannot complete within the gamma cycle"
        )

    glen = params.gamma_len
    plen = params.pulse_len
    shadow = w.copy()
    latched = np.zeros(w.shape, dtype=bool)
    spike_time = INF
    acc = AccumulatorState(theta=theta, params=params)
    bits_summed = np.zeros(glen, dtype=np.int64) if record_trace else None
    register = np.zeros(glen, dtype=np.int64) if record_trace else None
    out_pulse = np.zeros(glen, dtype=np.int64) if record_trace else None

    for t in range(glen):
        active = (x <= t) & (t < x + plen)
        latched[active & (shadow == 0)] = True
        bit_sum = int((active & ~latched).sum())
        shadow[active] = (shadow[active] - 1) % (params.w_max + 1)
        # A completed pulse releases the latch for the (reset) next cycle.
        done = active & (t == x + plen - 1)
        latched[done] = False
        out = acc.tick(bit_sum)
        if acc.fired and spike_time == INF and t <= glen - 2:
            spike_time = t
        if record_trace:
            bits_summed[t] = bit_sum
            register[t] = acc.register
            out_pulse[t] = int(out)

    restored = shadow == w
    finite = x < INF
    if not restored[finite].all():
        raise ProtocolError("synapse weight not restored after readout")

    trace = TickTrace(bits_summed, register, out_pulse) if record_trace else None
    return spike_time, trace
