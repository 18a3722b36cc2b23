"""Spike-time semantics, volleys, and the ramp-no-leak response function.

Everything downstream works on *relative spike times* measured in unit-clock
ticks. A line that carries no spike in the current computation wave holds the
absorbing value :data:`INF`. Times are plain Python ints (or int64 arrays),
so ``min`` and comparisons behave as expected with the sentinel.

Ramp-no-leak (rise one unit per tick from arrival, hold at the weight until
the cycle reset) is the only response function implemented; step-no-leak,
biexponential, and piecewise-linear variants exist in the literature but are
deliberately out of scope here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

# Absorbing "no spike" value. Large enough that x <= INF for every finite
# tick, small enough that int64 arithmetic like (t - x) can never wrap.
INF: int = 1 << 30


def is_spike(t: int) -> bool:
    """True for a finite spike time, False for the no-spike sentinel."""
    return t < INF


@dataclass(frozen=True)
class TemporalParams:
    """Encoding window and weight range for one simulator instance.

    ``t_max`` is the largest transmissible spike time (2**b - 1 for b bits of
    temporal precision), ``w_max`` the largest synaptic weight. The gamma
    cycle, one full computation wave including weight restore and the
    plasticity step, spans ``t_max + w_max + 1`` unit clocks.
    """

    t_max: int = 7
    w_max: int = 7

    def __post_init__(self):
        if self.t_max < 1 or self.w_max < 1:
            raise ValueError("t_max and w_max must both be >= 1")
        if self.t_max & (self.t_max + 1):
            raise ValueError(f"t_max must be 2**b - 1 for integer b, got {self.t_max}")

    @property
    def gamma_len(self) -> int:
        return self.t_max + self.w_max + 1

    @property
    def precision_bits(self) -> int:
        return (self.t_max + 1).bit_length() - 1

    @property
    def pulse_len(self) -> int:
        """Width of the unary spike pulse (and of the FSM readout window)."""
        return self.w_max + 1


DEFAULT_PARAMS = TemporalParams()


def rnl_value(w: int, x: int, t: int, params: TemporalParams = DEFAULT_PARAMS) -> int:
    """Ramp-no-leak response of a weight-``w`` synapse at tick ``t``.

    The response rises one potential unit per tick starting on the arrival
    tick itself (value 1 at t == x) and saturates at ``w``. A silent input
    (x == INF) contributes nothing.
    """
    if not 0 <= w <= params.w_max:
        raise ValueError(f"weight {w} outside [0, {params.w_max}]")
    if not 0 <= t < params.gamma_len:
        raise ValueError(f"tick {t} outside [0, {params.gamma_len})")
    if x >= INF or t < x:
        return 0
    return min(t - x + 1, w)


def response_table(params: TemporalParams = DEFAULT_PARAMS) -> np.ndarray:
    """Lookup table R[w, x_idx, t] of RNL responses over a gamma cycle.

    ``x_idx`` runs over 0..t_max for finite arrival ticks, with index
    t_max + 1 standing for INF (all-zero row). Used by the vectorized
    neuron/layer evaluators.
    """
    w = np.arange(params.w_max + 1)[:, None, None]
    x = np.arange(params.t_max + 2)[None, :, None]
    t = np.arange(params.gamma_len)[None, None, :]
    ramp = np.clip(t - x + 1, 0, w)
    ramp[:, params.t_max + 1, :] = 0
    return ramp.astype(np.int64)


def as_volley(times, n: int | None = None) -> np.ndarray:
    """Coerce a sequence of spike times into an int64 volley array."""
    v = np.asarray(times, dtype=np.int64)
    if v.ndim != 1:
        raise ConfigurationError(f"volley must be 1-D, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ConfigurationError(f"volley length {v.shape[0]} != expected {n}")
    return v


def normalize_volley(times, params: TemporalParams = DEFAULT_PARAMS) -> np.ndarray:
    """Re-reference a volley to its earliest spike.

    The minimum finite time is subtracted from every finite entry; an
    all-INF volley is returned unchanged. Shifted times that still exceed
    ``t_max`` fall outside the encoding window and are mapped to INF.
    """
    v = as_volley(times).copy()
    finite = v < INF
    if not finite.any():
        return v
    v[finite] -= v[finite].min()
    v[finite & (v > params.t_max)] = INF
    return v


def format_volley(times) -> str:
    """Human-readable rendering, e.g. ``[0, 3, inf]``."""
    return "[" + ", ".join("inf" if t >= INF else str(int(t)) for t in np.asarray(times)) + "]"
