"""Gate counts, area/delay/power modeling, and technology scaling.

Two kinds of numbers coexist here and reports label them explicitly:

* "analytical" values come from the parameterized gate-count and
  transition-count equations (exact integer arithmetic, 4-input-AND
  equivalents, ceil(log2 p) for non-power-of-two fan-ins);
* "post-synthesis" values are calibration constants measured on a 45 nm
  standard-cell reference implementation, bundled as tables below.

Analytical and post-synthesis gate counts agree within a few percent; per-gate
delay and power densities derived from the calibration tables extrapolate the
measured ADP numbers to unmeasured configurations (treat extrapolations as
+/-10% estimates).

Technology scaling multiplies area and power by the transistor-density ratio
between source and target nodes and delay by its square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigurationError

GATE_COMPUTE_CYCLES = 15        # gamma cycle length: compute_time = 15 * delay
TRANSISTORS_PER_GATE = 4        # NAND2 equivalent


def _log2_ceil(p: int) -> int:
    if p < 1:
        raise ConfigurationError(f"fan-in must be >= 1, got {p}")
    return (p - 1).bit_length()


@dataclass(frozen=True)
class GateCounts:
    """Component breakdown in 4-input-AND equivalents; total is the sum."""

    synapses: int
    neuron_body: int
    stdp: int
    wta: int

    @property
    def total(self) -> int:
        return self.synapses + self.neuron_body + self.stdp + self.wta

    @property
    def transistors(self) -> int:
        return self.total * TRANSISTORS_PER_GATE


_MODES = ("stdp", "rstdp")


def _check_mode(mode: str):
    if mode not in _MODES:
        raise ConfigurationError(f"learning mode must be one of {_MODES}, got {mode!r}")


def gates_neuron(p: int, mode: str = "stdp") -> GateCounts:
    """Gate count for one neuron with p synapses and (R-)STDP learning.

    Synapse FSMs cost 61 gates each; the body (Parhami accumulator, register,
    mux, pulse counter) costs 5p + 8*ceil(log2 p) + 31; STDP logic costs
    36p + 5 (case generation 17p+5, stabilization 12p, inc/dec 7p), and the
    reward modulation of R-STDP adds 4 gates per synapse.
    """
    _check_mode(mode)
    log2p = _log2_ceil(p)
    stdp = (40 if mode == "rstdp" else 36) * p + 5
    return GateCounts(
        synapses=61 * p,
        neuron_body=5 * p + 8 * log2p + 31,
        stdp=stdp,
        wta=0,
    )


def gates_column(p: int, q: int, mode: str = "stdp") -> GateCounts:
    """Gate count for a pxq column: q neurons plus 8q + q**2 WTA inhibition.

    (An earlier design revision used 7q + 4 for the WTA block; the 8q + q**2
    upper bound is what the column totals here are built on.)
    """
    if q < 1:
        raise ConfigurationError(f"neuron count must be >= 1, got {q}")
    n = gates_neuron(p, mode)
    return GateCounts(
        synapses=n.synapses * q,
        neuron_body=n.neuron_body * q,
        stdp=n.stdp * q,
        wta=8 * q + q * q,
    )


def tally_gates(num_trees: int = 10, inputs_per_tree: int = 625) -> int:
    """Adder-tree voting stage: a Parhami accumulative counter (5n - 3) per tree."""
    return num_trees * (5 * inputs_per_tree - 3)


def delay_and_time(p: int) -> tuple[int, int]:
    """(critical path D, gamma compute time T) in gate-delay units.

    D = 6*ceil(log2 p) + 4 (FSM output through the accumulator);
    T = 15 * D.
    """
    d = 6 * _log2_ceil(p) + 4
    return d, GATE_COMPUTE_CYCLES * d


def power_model(p: int, q: int | None = None) -> tuple[int, int]:
    """(static, dynamic) power figures in gate / transition units.

    Static power tracks the gate count. Dynamic power counts worst-case
    signal transitions over one gamma cycle: 204p + 185*ceil(log2 p) + 241
    per neuron; a column adds 2 transitions per WTA gate, giving
    204pq + 185q*ceil(log2 p) + 257q + 2q**2.
    """
    log2p = _log2_ceil(p)
    if q is None:
        static = gates_neuron(p).total
        dynamic = 204 * p + 185 * log2p + 241
    else:
        static = gates_column(p, q).total
        dynamic = 204 * p * q + 185 * q * log2p + 257 * q + 2 * q * q
    return static, dynamic


# --------------------------------------------------------------------------
# Process nodes and 45 nm calibration tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessNode:
    """A named CMOS node with its transistor density in MT/mm^2."""

    name: str
    density: float  # million transistors per mm^2


NODES = {
    "45nm": ProcessNode("45nm", 4.0),
    "28nm": ProcessNode("28nm", 10.0),
    "16nm": ProcessNode("16nm", 22.0),
    "10nm": ProcessNode("10nm", 46.0),
    "7nm": ProcessNode("7nm", 85.0),
}


def parse_node(name: str | ProcessNode) -> ProcessNode:
    if isinstance(name, ProcessNode):
        return name
    key = name.strip().lower().replace(" ", "")
    if not key.endswith("nm"):
        key += "nm"
    if key not in NODES:
        raise ConfigurationError(f"unknown process node {name!r}; known: {sorted(NODES)}")
    return NODES[key]


# Post-synthesis 45 nm measurements for a neuron with STDP:
# p -> (gate count, area mm^2, critical path delay ns, power mW)
NEURON_SYNTH_45NM = {
    64: (6_471, 0.0065, 1.93, 0.031),
    128: (12_859, 0.0129, 2.16, 0.062),
    256: (25_673, 0.0258, 2.41, 0.124),
    512: (51_258, 0.0515, 2.64, 0.249),
    1024: (102_432, 0.1030, 2.82, 0.497),
}

# Post-synthesis 45 nm measurements for columns:
# (mode, p, q) -> (gate count, area mm^2, compute time ns, power mW)
COLUMN_SYNTH_45NM = {
    ("stdp", 64, 8): (51_824, 0.05, 28.95, 0.25),
    ("stdp", 128, 10): (128_658, 0.13, 32.40, 0.62),
    ("stdp", 1024, 16): (1_639_020, 1.65, 42.30, 7.96),
    ("rstdp", 64, 8): (54_384, 0.05, 28.95, 0.26),
    ("rstdp", 128, 10): (135_058, 0.14, 32.40, 0.65),
    ("rstdp", 1024, 16): (1_720_940, 1.75, 42.30, 8.36),
}

# Published 45 nm figures for the two-layer prototype network
# (gate breakdown U1 + S1 + tally, then area/compute-time/power).
PROTOTYPE_SYNTH_GATES = {"layer1": 24_120_000, "layer2": 7_910_000, "tally": 31_250}
PROTOTYPE_SYNTH_45NM = (32.61, 43.05, 154.36)  # mm^2, ns, mW


def power_density_45nm() -> float:
    """Calibrated mW per gate at 45 nm (mean over the measured column rows)."""
    vals = [p / g for g, _a, _t, p in COLUMN_SYNTH_45NM.values()]
    return sum(vals) / len(vals)


def delay_per_gate_45nm() -> float:
    """Calibrated ns per gate-delay at 45 nm (mean over the measured neuron rows)."""
    vals = [d_ns / delay_and_time(p)[0] for p, (_g, _a, d_ns, _p) in NEURON_SYNTH_45NM.items()]
    return sum(vals) / len(vals)


def area_at_node(gates: int, node: str | ProcessNode) -> float:
    """Die area in mm^2: 4 transistors per gate over the node's density."""
    n = parse_node(node)
    return gates * TRANSISTORS_PER_GATE / (n.density * 1e6)


@dataclass(frozen=True)
class AdpReport:
    """Area/delay/power of one design at one process node."""

    area_mm2: float
    delay_ns: float
    power_mw: float
    node: ProcessNode

    def __post_init__(self):
        if self.delay_ns < 0 or self.area_mm2 < 0 or self.power_mw < 0:
            raise ConfigurationError("ADP values must be non-negative")

    @property
    def compute_time_ns(self) -> float:
        return GATE_COMPUTE_CYCLES * self.delay_ns

    @property
    def throughput_fps(self) -> float:
        """Computation waves (images) per second."""
        return 1e9 / self.compute_time_ns

    @classmethod
    def from_compute_time(cls, area_mm2: float, compute_time_ns: float,
                          power_mw: float, node: str | ProcessNode) -> "AdpReport":
        return cls(area_mm2, compute_time_ns / GATE_COMPUTE_CYCLES, power_mw,
                   parse_node(node))


def scale_adp(report: AdpReport, target: str | ProcessNode) -> AdpReport:
    """Rescale a report to another node.

    Area and power scale with the density ratio d_src/d_tgt; delay (and thus
    compute time) with its square root.
    """
    tgt = parse_node(target)
    ratio = report.node.density / tgt.density
    return AdpReport(
        area_mm2=report.area_mm2 * ratio,
        delay_ns=report.delay_ns * math.sqrt(ratio),
        power_mw=report.power_mw * ratio,
        node=tgt,
    )


# --------------------------------------------------------------------------
# Convolutional-layer conversion
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvAsColumns:
    """A convolution layer re-expressed in column organization.

    The column organization is the structural transpose of a feature-map
    organization: inputs = in_maps * kernel^2 synapses per neuron, outputs =
    out_maps neurons per column, one column per output pixel. Total synapse
    count is preserved by construction.
    """

    inputs: int
    outputs: int
    columns: int

    @property
    def synapses(self) -> int:
        return self.inputs * self.outputs * self.columns


def conv_to_column(in_maps: int, kernel: int, out_maps: int,
                   out_h: int, out_w: int) -> ConvAsColumns:
    if min(in_maps, kernel, out_maps, out_h, out_w) < 1:
        raise ConfigurationError("all conv dimensions must be >= 1")
    return ConvAsColumns(
        inputs=in_maps * kernel * kernel,
        outputs=out_maps,
        columns=out_h * out_w,
    )


# The three-layer reference convolutional model used for the complexity
# comparison, as (in_maps, kernel, out_maps, out_h, out_w) per layer.
BASELINE_CONV_LAYERS = [
    (6, 5, 30, 28, 28),
    (30, 3, 250, 14, 14),
    (250, 5, 200, 4, 4),
]


# --------------------------------------------------------------------------
# Whole-network reports
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LayerHwSpec:
    columns: int
    p: int
    q: int
    mode: str = "stdp"

    def __post_init__(self):
        _check_mode(self.mode)
        if self.columns < 1:
            raise ConfigurationError("layer must contain at least one column")

    @property
    def synapses(self) -> int:
        return self.columns * self.p * self.q


@dataclass(frozen=True)
class NetworkHwSpec:
    name: str
    layers: tuple[LayerHwSpec, ...]
    tally_trees: int = 0
    tally_inputs: int = 0

    @property
    def synapses(self) -> int:
        return sum(l.synapses for l in self.layers)


def prototype_spec() -> NetworkHwSpec:
    """The two-layer 625-column network: 625x(32x12) STDP + 625x(12x10) R-STDP
    with a 10-tree, 625-input tally stage."""
    return NetworkHwSpec(
        name="prototype",
        layers=(
            LayerHwSpec(columns=625, p=32, q=12, mode="stdp"),
            LayerHwSpec(columns=625, p=12, q=10, mode="rstdp"),
        ),
        tally_trees=10,
        tally_inputs=625,
    )


@dataclass(frozen=True)
class NetworkReport:
    spec: NetworkHwSpec
    node: ProcessNode
    layer_gates: tuple[GateCounts, ...]
    tally: int
    analytical: AdpReport
    calibrated: AdpReport | None = None   # only when a measured row exists

    @property
    def total_gates(self) -> int:
        return sum(g.total for g in self.layer_gates) + self.tally

    @property
    def best(self) -> AdpReport:
        """Calibrated numbers when available, else analytical."""
        return self.calibrated if self.calibrated is not None else self.analytical

    def to_dict(self) -> dict:
        rep = self.best
        out = {
            "network": self.spec.name,
            "node": self.node.name,
            "gates": self.total_gates,
            "transistors": self.total_gates * TRANSISTORS_PER_GATE,
            "synapses": self.spec.synapses,
            "area_mm2": rep.area_mm2,
            "delay_ns": rep.delay_ns,
            "compute_time_ns": rep.compute_time_ns,
            "power_mW": rep.power_mw,
            "throughput_fps": rep.throughput_fps,
            "per_layer_gates": [g.total for g in self.layer_gates],
            "tally_gates": self.tally,
            "analytical": {
                "area_mm2": self.analytical.area_mm2,
                "compute_time_ns": self.analytical.compute_time_ns,
                "power_mW": self.analytical.power_mw,
            },
        }
        if self.calibrated is not None:
            out["calibrated"] = {
                "area_mm2": self.calibrated.area_mm2,
                "compute_time_ns": self.calibrated.compute_time_ns,
                "power_mW": self.calibrated.power_mw,
            }
            out["analytical_vs_calibrated_pct"] = {
                "area": 100.0 * (self.analytical.area_mm2 / self.calibrated.area_mm2 - 1.0),
                "power": 100.0 * (self.analytical.power_mw / self.calibrated.power_mw - 1.0),
            }
        return out


def network_report(spec: NetworkHwSpec, node: str | ProcessNode) -> NetworkReport:
    """Gate totals plus ADP at the requested node for a whole network.

    Analytical ADP: area from the gate total, critical path from the largest
    per-neuron fan-in across layers, power from the calibrated 45 nm per-gate
    density; everything then scaled from 45 nm to the target node. For the
    prototype network the measured 45 nm row is also scaled and reported.
    """
    tgt = parse_node(node)
    layer_gates = []
    for l in spec.layers:
        g = gates_column(l.p, l.q, l.mode)
        layer_gates.append(GateCounts(
            synapses=g.synapses * l.columns,
            neuron_body=g.neuron_body * l.columns,
            stdp=g.stdp * l.columns,
            wta=g.wta * l.columns,
        ))
    layer_gates = tuple(layer_gates)
    tally = tally_gates(spec.tally_trees, spec.tally_inputs) if spec.tally_trees else 0
    total = sum(g.total for g in layer_gates) + tally

    max_p = max(l.p for l in spec.layers)
    delay_45 = delay_and_time(max_p)[0] * delay_per_gate_45nm()
    analytical_45 = AdpReport(
        area_mm2=area_at_node(total, "45nm"),
        delay_ns=delay_45,
        power_mw=total * power_density_45nm(),
        node=NODES["45nm"],
    )
    analytical = scale_adp(analytical_45, tgt)

    calibrated = None
    if spec.name == "prototype":
        area, time_ns, power = PROTOTYPE_SYNTH_45NM
        calibrated = scale_adp(
            AdpReport.from_compute_time(area, time_ns, power, "45nm"), tgt
        )

    return NetworkReport(
        spec=spec,
        node=tgt,
        layer_gates=layer_gates,
        tally=tally,
        analytical=analytical,
        calibrated=calibrated,
    )
