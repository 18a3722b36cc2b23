"""Multi-column layers, the two-layer prototype network, and experiments.

The prototype classifies 28x28 images: a 4x4/stride-1 On-Off receptive-field
encoder produces 625 volleys of 32 lines; layer 1 (625 columns of 32x12,
unsupervised STDP) extracts local features; layer 2 (625 columns of 12x10,
reward-modulated STDP) votes one label per column; a tally stage picks the
label with the most votes.

Layer evaluation is vectorized with a counting trick: weights and spike
times live in tiny alphabets (w in 0..w_max, x in 0..t_max or absent), so
each neuron's potential curve is a matrix product between its (w, x)
occupancy histogram and a precomputed response table. Learning uses the
keyed Bernoulli stream, which makes results independent of the order in
which columns are processed; the optional thread parallelism relies on that.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .column import wta_inhibit
from .errors import ConfigurationError, IngestionError
from .plasticity import BernoulliStream, Reward, StdpParams, learn_deltas, reward_index, stdp_cases
from .temporal import DEFAULT_PARAMS, INF, TemporalParams, response_table


@lru_cache(maxsize=8)
def _response_matrix(params: TemporalParams) -> np.ndarray:
    """(w*x combo, tick) response table over the spike-detection window.

    float32 so the potential matmul takes the BLAS path; all values are small
    integers, exactly representable.
    """
    table = response_table(params)  # (w_max+1, t_max+2, gamma_len)
    mat = (table[:, :, : params.gamma_len - 1]
           .reshape(-1, params.gamma_len - 1).astype(np.float32))
    mat.setflags(write=False)
    return mat


# --------------------------------------------------------------------------
# Encoding
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RfEncoderConfig:
    """On/Off receptive-field encoder: rf_size x rf_size patches, stride 1.

    Each pixel yields two lines: the On channel spikes early for bright
    pixels, the Off channel early for dark ones; a channel stays silent when
    its intensity fraction is below ``cutoff``. Every patch volley is then
    normalized to its earliest spike.
    """

    rf_size: int = 4
    stride: int = 1
    image_size: int = 28
    cutoff: float = 1.0 / 8.0

    def __post_init__(self):
        if self.stride != 1:
            raise ConfigurationError("only stride 1 is supported")
        if self.rf_size > self.image_size:
            raise ConfigurationError("receptive field larger than image")

    @property
    def grid(self) -> int:
        return self.image_size - self.rf_size + 1

    @property
    def num_fields(self) -> int:
        return self.grid * self.grid

    @property
    def lines_per_field(self) -> int:
        return self.rf_size * self.rf_size * 2


def _normalize_rows(volleys: np.ndarray, t_max: int) -> np.ndarray:
    """Row-wise volley normalization (min finite time -> 0, overflow -> INF)."""
    finite = volleys < INF
    mins = np.where(finite, volleys, INF).min(axis=-1, keepdims=True)
    shifted = volleys - np.where(mins < INF, mins, 0)
    return np.where(finite & (shifted <= t_max), shifted, INF)


def encode_image(pixels: np.ndarray, cfg: RfEncoderConfig = RfEncoderConfig(),
                 params: TemporalParams = DEFAULT_PARAMS) -> np.ndarray:
    """Encode one grayscale image into (num_fields, lines_per_field) volleys.

    Line order within a patch is row-major over pixels with the On channel
    before the Off channel: line (r*rf + c)*2 + ch.
    """
    img = np.asarray(pixels)
    if img.shape != (cfg.image_size, cfg.image_size):
        raise IngestionError(
            f"expected {cfg.image_size}x{cfg.image_size} image, got {img.shape}"
        )
    frac = img.astype(np.float64) / 255.0
    on = np.where(frac >= cfg.cutoff,
                  np.rint(params.t_max * (1.0 - frac)).astype(np.int64), INF)
    off = np.where((1.0 - frac) >= cfg.cutoff,
                   np.rint(params.t_max * frac).astype(np.int64), INF)
    rf = cfg.rf_size
    on_w = sliding_window_view(on, (rf, rf)).reshape(cfg.num_fields, rf * rf)
    off_w = sliding_window_view(off, (rf, rf)).reshape(cfg.num_fields, rf * rf)
    volleys = np.stack([on_w, off_w], axis=-1).reshape(cfg.num_fields, -1)
    return _normalize_rows(volleys, params.t_max)


def direct_latency_encode(pixels: np.ndarray,
                          params: TemporalParams = DEFAULT_PARAMS) -> np.ndarray:
    """Flat per-pixel latency code: bright pixels spike first, every line spikes."""
    frac = np.asarray(pixels).astype(np.float64).ravel() / 255.0
    return np.rint(params.t_max * (1.0 - frac)).astype(np.int64)


# --------------------------------------------------------------------------
# Vectorized layer forward / learn
# --------------------------------------------------------------------------

def _forward_block(weights: np.ndarray, volleys: np.ndarray, theta: int,
                   params: TemporalParams) -> np.ndarray:
    """Raw spike times for a block of columns: (s, p, q) x (s, p) -> (s, q).

    Weights and times have tiny alphabets, so each neuron's potential curve
    is the product of its (w, x)-combo histogram with the response table.
    """
    s, p, q = weights.shape
    n_x = params.t_max + 2
    n_combo = (params.w_max + 1) * n_x
    xi = np.where(volleys < INF, volleys, params.t_max + 1).astype(np.int32)
    flat = np.multiply(weights, n_x, dtype=np.int32)
    flat += xi[:, :, None]
    flat += (np.arange(s * q, dtype=np.int32) * n_combo).reshape(s, 1, q)
    counts = np.bincount(flat.ravel(), minlength=s * q * n_combo)
    potential = counts.reshape(s * q, n_combo).astype(np.float32) \
        @ _response_matrix(params)                       # (s*q, gamma_len-1)
    crossed = potential >= theta
    z = crossed.argmax(axis=1).astype(np.int64)
    z[~crossed.any(axis=1)] = INF
    return z.reshape(s, q)


def _wta_block(z_raw: np.ndarray, k: int = 1) -> np.ndarray:
    """Row-wise WTA. k == 1 is vectorized; larger k falls back to the scalar op."""
    if k == 1:
        t_min = z_raw.min(axis=1)
        winner = (z_raw == t_min[:, None]).argmax(axis=1)
        out = np.full_like(z_raw, INF)
        rows = np.flatnonzero(t_min < INF)
        out[rows, winner[rows]] = t_min[rows]
        return out
    return np.stack([wta_inhibit(row, k) for row in z_raw])


@dataclass
class LayerSpec:
    """One multi-column layer: s columns of p inputs x q neurons."""

    num_columns: int
    p: int
    q: int
    theta: int
    learning: Reward | None  # None = frozen; UNSUPERVISED = STDP; else R-STDP
    stdp: StdpParams = field(default_factory=StdpParams)
    k: int = 1


class Layer:
    """Weights plus evaluation/learning kernels for one layer."""

    def __init__(self, spec: LayerSpec, layer_index: int, stream: BernoulliStream,
                 rng: np.random.Generator, params: TemporalParams = DEFAULT_PARAMS,
                 init: str = "uniform"):
        self.spec = spec
        self.index = layer_index
        self.params = params
        self.stream = stream
        if init == "uniform":
            self.weights = rng.integers(0, params.w_max + 1,
                                        size=(spec.num_columns, spec.p, spec.q),
                                        dtype=np.int32)
        elif init == "zero":
            self.weights = np.zeros((spec.num_columns, spec.p, spec.q), dtype=np.int32)
        else:
            raise ConfigurationError(f"unknown weight init {init!r}")
        self._keys = stream.static_keys(layer_index, spec.num_columns, spec.p, spec.q)

    def forward(self, volleys: np.ndarray, chunks: list[slice] | None = None,
                pool: ThreadPoolExecutor | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(z_out, z_raw) for one volley per column; optionally chunk-parallel."""
        if volleys.shape != (self.spec.num_columns, self.spec.p):
            raise ConfigurationError(
                f"layer {self.index}: expected volleys {(self.spec.num_columns, self.spec.p)}, "
                f"got {volleys.shape}"
            )
        if chunks is None or pool is None:
            z_raw = _forward_block(self.weights, volleys, self.spec.theta, self.params)
        else:
            z_raw = np.empty((self.spec.num_columns, self.spec.q), dtype=np.int64)
            def run(sl: slice):
                z_raw[sl] = _forward_block(self.weights[sl], volleys[sl],
                                           self.spec.theta, self.params)
            list(pool.map(run, chunks))
        return _wta_block(z_raw, self.spec.k), z_raw

    def learn(self, volleys: np.ndarray, z_out: np.ndarray, rewards, gamma: int,
              chunks: list[slice] | None = None,
              pool: ThreadPoolExecutor | None = None):
        """Apply one gamma cycle of plasticity in place.

        ``rewards`` is a single Reward or an (s,) array of reward row indices.
        """
        if isinstance(rewards, Reward):
            r_idx = reward_index(rewards)
        else:
            r_idx = np.asarray(rewards, dtype=np.int64)[:, None, None]

        def run(sl: slice):
            cases = stdp_cases(volleys[sl], z_out[sl])
            r = r_idx if isinstance(r_idx, int) else r_idx[sl]
            delta = learn_deltas(self.weights[sl], cases, r, self.spec.stdp,
                                 self.stream, self._keys[sl], gamma, self.params)
            np.clip(self.weights[sl] + delta, 0, self.params.w_max,
                    out=self.weights[sl])

        if chunks is None or pool is None:
            run(slice(None))
        else:
            list(pool.map(run, chunks))


# --------------------------------------------------------------------------
# Tally / voting
# --------------------------------------------------------------------------

@dataclass
class TallyState:
    """Vote counters for the output stage: one per label, fed by column votes."""

    vote_counts: np.ndarray  # (num_labels,) int64

    @property
    def predicted(self) -> int:
        """argmax with ties broken toward the lowest label."""
        return int(self.vote_counts.argmax())


def vote_and_tally(layer2_out: np.ndarray, num_labels: int = 10) -> TallyState:
    """Each column votes its winner-neuron index; silent columns abstain."""
    if layer2_out.ndim != 2 or layer2_out.shape[1] != num_labels:
        raise ConfigurationError(
            f"expected (columns, {num_labels}) output volleys, got {layer2_out.shape}"
        )
    t_min = layer2_out.min(axis=1)
    voting = t_min < INF
    winners = layer2_out.argmin(axis=1)[voting]
    counts = np.bincount(winners, minlength=num_labels).astype(np.int64)
    return TallyState(vote_counts=counts)


# --------------------------------------------------------------------------
# The two-layer prototype
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PrototypeConfig:
    seed: int = 0
    rf: RfEncoderConfig = field(default_factory=RfEncoderConfig)
    l1_neurons: int = 12
    num_labels: int = 10
    theta1: int = 16
    theta2: int = 1
    l1_stdp: StdpParams = field(default_factory=StdpParams)
    l2_stdp: StdpParams = field(default_factory=StdpParams)
    params: TemporalParams = field(default_factory=TemporalParams)
    parallel: bool = False
    n_jobs: int = 4


class PrototypeNetwork:
    """625x(32x12) STDP layer + 625x(12x10) R-STDP voting layer + tally."""

    def __init__(self, config: PrototypeConfig):
        self.config = config
        self.params = config.params
        self.stream = BernoulliStream(config.seed)
        rng = np.random.default_rng(config.seed)
        s = config.rf.num_fields
        self.layer1 = Layer(
            LayerSpec(s, config.rf.lines_per_field, config.l1_neurons,
                      config.theta1, Reward.UNSUPERVISED, config.l1_stdp),
            layer_index=0, stream=self.stream, rng=rng, params=self.params,
        )
        self.layer2 = Layer(
            LayerSpec(s, config.l1_neurons, config.num_labels,
                      config.theta2, Reward.PLUS, config.l2_stdp),
            layer_index=1, stream=self.stream, rng=rng, params=self.params,
        )
        self.gamma = 0
        self._pool = None
        self._chunks = None
        if config.parallel:
            self._pool = ThreadPoolExecutor(max_workers=config.n_jobs)
            step = -(-s // config.n_jobs)
            self._chunks = [slice(i, min(i + step, s)) for i in range(0, s, step)]

    # -- forward / predict ------------------------------------------------

    def forward(self, image: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns (input volleys, layer-1 output, layer-2 output)."""
        volleys = encode_image(image, self.config.rf, self.params)
        l1_out, _ = self.layer1.forward(volleys, self._chunks, self._pool)
        l2_out, _ = self.layer2.forward(l1_out, self._chunks, self._pool)
        return volleys, l1_out, l2_out

    def predict(self, image: np.ndarray) -> int:
        return vote_and_tally(self.forward(image)[2], self.config.num_labels).predicted

    # -- online learning ---------------------------------------------------

    def learn_step(self, image: np.ndarray, label: int) -> int:
        """One online step: forward, then STDP/R-STDP. Returns the prediction
        made before the weight update (predict-then-learn)."""
        if not 0 <= label < self.config.num_labels:
            raise IngestionError(f"label {label} outside 0-{self.config.num_labels - 1}")
        volleys, l1_out, l2_out = self.forward(image)
        prediction = vote_and_tally(l2_out, self.config.num_labels).predicted

        self.layer1.learn(volleys, l1_out, Reward.UNSUPERVISED, self.gamma,
                          self._chunks, self._pool)
        t_min = l2_out.min(axis=1)
        winners = l2_out.argmin(axis=1)
        rewards = np.where(
            t_min >= INF, reward_index(Reward.ZERO),
            np.where(winners == label, reward_index(Reward.PLUS),
                     reward_index(Reward.MINUS)),
        )
        self.layer2.learn(l1_out, l2_out, rewards, self.gamma,
                          self._chunks, self._pool)
        self.gamma += 1
        return prediction

    def evaluate(self, images: np.ndarray, labels: np.ndarray) -> float:
        """Frozen accuracy; never mutates weights."""
        correct = sum(self.predict(img) == int(lab)
                      for img, lab in zip(images, labels))
        return correct / len(labels)

    # -- persistence --------------------------------------------------------

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {"w1": self.layer1.weights, "w2": self.layer2.weights,
                "gamma": np.array([self.gamma])}

    def load_state(self, arrays: dict[str, np.ndarray]):
        w1, w2 = arrays["w1"], arrays["w2"]
        if w1.shape != self.layer1.weights.shape or w2.shape != self.layer2.weights.shape:
            raise ConfigurationError("checkpoint shape mismatch")
        self.layer1.weights = w1.astype(np.int32)
        self.layer2.weights = w2.astype(np.int32)
        self.gamma = int(arrays.get("gamma", [0])[0])

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()


def train_online(
    network: PrototypeNetwork,
    stream: Iterable[tuple[np.ndarray, int]],
    metrics_interval: int = 1000,
    metrics_sink: Callable[[dict], None] | None = None,
) -> PrototypeNetwork:
    """Single-pass online training: inference and learning are concurrent.

    Emits one metrics record per interval: running accuracy over the interval
    plus per-class correct/total counts.
    """
    n_labels = network.config.num_labels
    correct = np.zeros(n_labels, dtype=np.int64)
    total = np.zeros(n_labels, dtype=np.int64)
    for i, (image, label) in enumerate(stream, start=1):
        prediction = network.learn_step(image, label)
        total[label] += 1
        if prediction == label:
            correct[label] += 1
        if metrics_sink is not None and i % metrics_interval == 0:
            seen = int(total.sum())
            metrics_sink({
                "sample_index": i,
                "accuracy": float(correct.sum() / seen) if seen else 0.0,
                "class_correct": correct.tolist(),
                "class_total": total.tolist(),
            })
            correct[:] = 0
            total[:] = 0
    return network


# --------------------------------------------------------------------------
# Single-column models (clustering and supervised single-column experiments)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SingleColumnConfig:
    seed: int = 0
    inputs: int = 784
    neurons: int = 10
    theta: int = 600
    supervised: bool = False      # False: plain STDP; True: R-STDP with labels
    stdp: StdpParams = field(default_factory=StdpParams)
    params: TemporalParams = field(default_factory=TemporalParams)
    image_size: int = 28


class SingleColumnModel:
    """One pxq column fed by a direct per-pixel latency code.

    In unsupervised mode the winner index is a cluster id; in supervised mode
    neuron index == label and a reward signal gates the updates.
    """

    def __init__(self, config: SingleColumnConfig):
        self.config = config
        self.params = config.params
        self.stream = BernoulliStream(config.seed)
        rng = np.random.default_rng(config.seed)
        self.weights = rng.integers(0, self.params.w_max + 1,
                                    size=(1, config.inputs, config.neurons),
                                    dtype=np.int64)
        self._keys = self.stream.static_keys(0, 1, config.inputs, config.neurons)
        self.gamma = 0

    def encode(self, image: np.ndarray) -> np.ndarray:
        x = direct_latency_encode(image, self.params)
        if x.shape[0] != self.config.inputs:
            raise ConfigurationError(
                f"image has {x.shape[0]} pixels, column expects {self.config.inputs}"
            )
        return x

    def winner(self, image: np.ndarray) -> int:
        """Frozen forward pass; -1 when the column stays silent."""
        z_out = self._forward(self.encode(image))
        t_min = z_out.min()
        return int(z_out.argmin()) if t_min < INF else -1

    def _forward(self, volley: np.ndarray) -> np.ndarray:
        z_raw = _forward_block(self.weights, volley[None], self.config.theta,
                               self.params)
        return _wta_block(z_raw)[0]

    def step(self, image: np.ndarray, label: int | None = None) -> int:
        """One online sample: forward, plasticity, returns the winner index."""
        volley = self.encode(image)
        z_out = self._forward(volley)
        silent = z_out.min() >= INF
        win = -1 if silent else int(z_out.argmin())
        if self.config.supervised:
            if label is None:
                raise ConfigurationError("supervised column needs a label")
            if silent:
                reward = Reward.ZERO
            elif win == label:
                reward = Reward.PLUS
            else:
                reward = Reward.MINUS
        else:
            reward = Reward.UNSUPERVISED
        cases = stdp_cases(volley[None], z_out[None])
        delta = learn_deltas(self.weights, cases, reward_index(reward),
                             self.config.stdp, self.stream, self._keys,
                             self.gamma, self.params)
        np.clip(self.weights + delta, 0, self.params.w_max, out=self.weights)
        self.gamma += 1
        return win

    def assign(self, images: np.ndarray) -> np.ndarray:
        """Frozen cluster/label assignment for a batch; silent -> -1."""
        return np.array([self.winner(img) for img in images], dtype=np.int64)

    def weight_maps(self) -> np.ndarray:
        """Per-neuron weight images, shape (q, image_size, image_size)."""
        size = self.config.image_size
        return (self.weights[0].T.reshape(self.config.neurons, size, size)
                .astype(np.int64))


# --------------------------------------------------------------------------
# Incremental-learning experiment
# --------------------------------------------------------------------------

@dataclass
class IncrementalReport:
    converged: bool
    samples_to_convergence: int | None
    winner: int | None
    window: int
    threshold: float

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "samples_to_convergence": self.samples_to_convergence,
            "stable_winner": self.winner,
            "window": self.window,
            "threshold": self.threshold,
        }


def run_incremental_experiment(
    model: SingleColumnModel,
    novel_stream: Iterator[tuple[np.ndarray, int]],
    window: int = 100,
    threshold: float = 0.9,
    max_samples: int | None = None,
) -> IncrementalReport:
    """Stream novel-class samples with learning enabled and watch the winner.

    Convergence is declared at the first sample after which one output neuron
    has won at least ``threshold`` of the trailing ``window`` samples.
    """
    recent: list[int] = []
    for n, (image, label) in enumerate(novel_stream, start=1):
        if max_samples is not None and n > max_samples:
            break
        win = model.step(image, label)
        recent.append(win)
        if len(recent) > window:
            recent.pop(0)
        if len(recent) == window:
            counts = np.bincount([w for w in recent if w >= 0] or [0],
                                 minlength=model.config.neurons)
            top = int(counts.argmax())
            if counts[top] >= threshold * window:
                return IncrementalReport(True, n, top, window, threshold)
    return IncrementalReport(False, None, None, window, threshold)


def metrics_jsonl_sink(fh) -> Callable[[dict], None]:
    """Write one compact JSON object per metrics record to ``fh``."""
    def sink(record: dict):
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    return sink
