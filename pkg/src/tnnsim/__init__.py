"""tnnsim: temporal neural network simulator and hardware cost model.

Neurons encode values as relative spike times inside a 15-tick gamma cycle,
integrate ramp-no-leak synaptic responses against a threshold, compete
through winner-take-all inhibition, and learn online with probabilistic
STDP / R-STDP updates. A companion hardware model reproduces gate counts,
area/delay/power figures, and technology scaling for the same designs.
"""

from .column import ColumnSpec, LearningMode, column_forward, wta_inhibit
from .errors import ConfigurationError, IngestionError, ProtocolError, TnnError
from .neuron import NeuronConfig, SynapseFsm, neuron_spike_time, run_neuron_gamma
from .plasticity import (BernoulliStream, Reward, StdpParams, column_learn,
                         f_stab_prob, rstdp_delta, stdp_case, stdp_delta)
from .temporal import INF, TemporalParams, normalize_volley, rnl_value

__version__ = "0.1.0"

__all__ = [
    "BernoulliStream",
    "ColumnSpec",
    "ConfigurationError",
    "INF",
    "IngestionError",
    "LearningMode",
    "NeuronConfig",
    "ProtocolError",
    "Reward",
    "StdpParams",
    "SynapseFsm",
    "TemporalParams",
    "TnnError",
    "column_forward",
    "column_learn",
    "f_stab_prob",
    "neuron_spike_time",
    "normalize_volley",
    "rnl_value",
    "rstdp_delta",
    "run_neuron_gamma",
    "stdp_case",
    "stdp_delta",
    "wta_inhibit",
]
