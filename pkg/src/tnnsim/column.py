"""Columns: q parallel neurons over a shared input volley, plus WTA inhibition.

Lateral inhibition passes the k earliest output spikes (ties broken toward
the lowest neuron index) and nullifies the rest. The hardware realizes this
with latch-based temporal comparators; here only the pass/inhibit outcome is
modeled, which is the architectural contract.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .temporal import DEFAULT_PARAMS, INF, TemporalParams, as_volley
from .neuron import neuron_spike_time, run_neuron_gamma


class LearningMode(enum.Enum):
    STDP = "stdp"
    R_STDP = "rstdp"
    FROZEN = "frozen"


@dataclass(frozen=True)
class ColumnSpec:
    p: int
    q: int
    theta: int
    k: int = 1
    learning_mode: LearningMode = LearningMode.STDP
    params: TemporalParams = field(default=DEFAULT_PARAMS)

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ConfigurationError(f"p and q must be >= 1, got p={self.p} q={self.q}")
        if not 1 <= self.k <= self.q:
            raise ConfigurationError(f"k must lie in [1, q]={self.q}, got {self.k}")


def validate_weights(weights, spec: ColumnSpec) -> np.ndarray:
    """Coerce to a (p, q) int64 matrix and range-check against w_max."""
    w = np.asarray(weights, dtype=np.int64)
    if w.shape != (spec.p, spec.q):
        raise ConfigurationError(
            f"weight matrix shape {w.shape} != (p, q) = {(spec.p, spec.q)}"
        )
    if ((w < 0) | (w > spec.params.w_max)).any():
        raise ConfigurationError(f"weights outside [0, {spec.params.w_max}]")
    return w


def random_weights(rng: np.random.Generator, p: int, q: int,
                   w_max: int = DEFAULT_PARAMS.w_max) -> np.ndarray:
    return rng.integers(0, w_max + 1, size=(p, q), dtype=np.int64)


def wta_inhibit(z_raw, k: int = 1) -> np.ndarray:
    """Keep the k earliest finite spikes (lowest index wins ties); INF the rest."""
    z = as_volley(z_raw)
    out = np.full_like(z, INF)
    finite = np.flatnonzero(z < INF)
    if finite.size == 0:
        return out
    # Lexicographic (time, index): stable sort on time preserves index order.
    order = finite[np.argsort(z[finite], kind="stable")][:k]
    out[order] = z[order]
    return out


def column_forward(
    spec: ColumnSpec,
    weights,
    volley,
    fidelity: str = "behavioral",
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate all q neurons on one volley and apply WTA.

    Returns (z_out, z_raw). ``fidelity`` selects the closed-form neuron
    ("behavioral") or the tick-by-tick FSM/accumulator model ("cycle");
    results are identical by construction and by test.
    """
    w = validate_weights(weights, spec)
    x = as_volley(volley, n=spec.p)
    if fidelity == "behavioral":
        z_raw = _forward_behavioral(w, x, spec.theta, spec.params)
    elif fidelity == "cycle":
        z_raw = np.array(
            [run_neuron_gamma(w[:, j], x, spec.theta, spec.params)[0] for j in range(spec.q)],
            dtype=np.int64,
        )
    else:
        raise ConfigurationError(f"unknown fidelity {fidelity!r}")
    return wta_inhibit(z_raw, spec.k), z_raw


def _forward_behavioral(w: np.ndarray, x: np.ndarray, theta: int,
                        params: TemporalParams) -> np.ndarray:
    """Vectorized :func:`neuron_spike_time` over the q columns of ``w``."""
    last_tick = params.gamma_len - 2
    t = np.arange(last_tick + 1)
    ramps = np.clip(t[None, None, :] - x[:, None, None] + 1, 0, w[:, :, None])
    ramps[x >= INF, :, :] = 0
    potential = ramps.sum(axis=0)            # (q, ticks)
    crossed = potential >= theta
    z = crossed.argmax(axis=1).astype(np.int64)
    z[~crossed.any(axis=1)] = INF
    return z


def column_forward_reference(spec: ColumnSpec, weights, volley) -> np.ndarray:
    """Plain per-neuron loop used as an oracle in tests."""
    w = validate_weights(weights, spec)
    x = as_volley(volley, n=spec.p)
    return np.array(
        [neuron_spike_time(w[:, j], x, spec.theta, spec.params) for j in range(spec.q)],
        dtype=np.int64,
    )
