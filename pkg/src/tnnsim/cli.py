"""Command-line front end.

Subcommands: train, eval, cluster, incremental, hw-report, convert-baseline,
export-weights. Configuration is a flat INI file (sections documented in the
README) overridden by command-line flags; every run writes the resolved
config next to its outputs so it can be replayed bit-for-bit.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import hwmodel
from .clustering import kmeans, purity
from .datasets import resolve_dataset, stream_samples
from .errors import TnnError
from .export import (export_csv, export_weight_maps, load_checkpoint,
                     save_checkpoint)
from .network import (PrototypeConfig, PrototypeNetwork, SingleColumnConfig,
                      SingleColumnModel, run_incremental_experiment)
from .plasticity import StdpParams

ERROR_PREFIX = "tnnsim: error:"


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; serializable to INI and back."""

    seed: int = 0
    dataset: str = "auto"
    data_dir: str = "data"
    samples: int = 20000
    metrics_interval: int = 1000
    out: str = "runs/out"
    parallel: bool = False
    n_jobs: int = 4
    theta1: int = 16
    theta2: int = 1
    column_theta: int = 600
    l1_stdp: StdpParams = field(default_factory=StdpParams)
    l2_stdp: StdpParams = field(default_factory=StdpParams)
    column_stdp: StdpParams = field(default_factory=StdpParams)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["run"] = {
            "seed": str(self.seed),
            "dataset": self.dataset,
            "data_dir": self.data_dir,
            "samples": str(self.samples),
            "metrics_interval": str(self.metrics_interval),
            "out": self.out,
            "parallel": str(self.parallel).lower(),
            "n_jobs": str(self.n_jobs),
        }
        cp["network"] = {"theta1": str(self.theta1), "theta2": str(self.theta2)}
        cp["column"] = {"theta": str(self.column_theta)}
        for section, sp in (("stdp.layer1", self.l1_stdp),
                            ("stdp.layer2", self.l2_stdp),
                            ("stdp.column", self.column_stdp)):
            cp[section] = {f.name: repr(getattr(sp, f.name)) for f in fields(sp)}
        import io
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, path: str | Path) -> "RunConfig":
        cp = configparser.ConfigParser()
        read = cp.read(path)
        if not read:
            raise TnnError(f"config file not found: {path}")
        def stdp_from(section: str) -> StdpParams:
            if section not in cp:
                return StdpParams()
            return StdpParams(**{k: cp.getfloat(section, k) for k in cp[section]})
        run = cp["run"] if "run" in cp else {}
        net = cp["network"] if "network" in cp else {}
        col = cp["column"] if "column" in cp else {}
        return cls(
            seed=int(run.get("seed", 0)),
            dataset=run.get("dataset", "auto"),
            data_dir=run.get("data_dir", "data"),
            samples=int(run.get("samples", 20000)),
            metrics_interval=int(run.get("metrics_interval", 1000)),
            out=run.get("out", "runs/out"),
            parallel=str(run.get("parallel", "false")).lower() == "true",
            n_jobs=int(run.get("n_jobs", 4)),
            theta1=int(net.get("theta1", 16)),
            theta2=int(net.get("theta2", 1)),
            column_theta=int(col.get("theta", 600)),
            l1_stdp=stdp_from("stdp.layer1"),
            l2_stdp=stdp_from("stdp.layer2"),
            column_stdp=stdp_from("stdp.column"),
        )


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_ini(args.config) if args.config else RunConfig()
    overrides = {}
    for name in ("seed", "dataset", "data_dir", "samples", "metrics_interval", "out"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "parallel", None) is not None:
        overrides["parallel"] = args.parallel
    return replace(cfg, **overrides)


def _prototype(cfg: RunConfig) -> PrototypeNetwork:
    return PrototypeNetwork(PrototypeConfig(
        seed=cfg.seed, theta1=cfg.theta1, theta2=cfg.theta2,
        l1_stdp=cfg.l1_stdp, l2_stdp=cfg.l2_stdp,
        parallel=cfg.parallel, n_jobs=cfg.n_jobs,
    ))


def _dataset(cfg: RunConfig):
    ds = resolve_dataset(cfg.dataset, cfg.data_dir, seed=cfg.seed)
    if ds.name != "mnist":
        print(f"tnnsim: note: using fallback dataset '{ds.name}' "
              "(MNIST IDX files not found)", file=sys.stderr)
    return ds


def _write_run_outputs(cfg: RunConfig, net: PrototypeNetwork, metrics_lines: list[str]):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.to_ini())
    (out / "metrics.jsonl").write_text("".join(metrics_lines))
    save_checkpoint(out / "weights.npz", net.state_arrays())
    export_csv(out / "weights_l1.csv", net.layer1.weights)
    export_csv(out / "weights_l2.csv", net.layer2.weights)


def cmd_train(args) -> int:
    cfg = _load_config(args)
    ds = _dataset(cfg)
    net = _prototype(cfg)
    lines: list[str] = []
    correct = total = 0
    class_correct = np.zeros(10, dtype=np.int64)
    class_total = np.zeros(10, dtype=np.int64)
    for img, lab in stream_samples(ds.train_images, ds.train_labels,
                                   cfg.samples, cfg.seed):
        pred = net.learn_step(img, lab)
        total += 1
        class_total[lab] += 1
        if pred == lab:
            correct += 1
            class_correct[lab] += 1
        if total % cfg.metrics_interval == 0:
            lines.append(json.dumps({
                "sample_index": total,
                "accuracy": correct / total,
                "class_correct": class_correct.tolist(),
                "class_total": class_total.tolist(),
            }, sort_keys=True) + "\n")
    _write_run_outputs(cfg, net, lines)
    if cfg.samples > 0:
        print(f"online_accuracy {correct / max(total, 1):.4f}")
    net.close()
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    ds = _dataset(cfg)
    net = _prototype(cfg)
    net.load_state(load_checkpoint(args.weights))
    n = min(cfg.samples, len(ds.test_labels)) if cfg.samples else len(ds.test_labels)
    acc = net.evaluate(ds.test_images[:n], ds.test_labels[:n])
    print(f"accuracy {acc:.4f}")
    net.close()
    return 0


def cmd_cluster(args) -> int:
    cfg = _load_config(args)
    ds = _dataset(cfg)
    model = SingleColumnModel(SingleColumnConfig(
        seed=cfg.seed, theta=cfg.column_theta, stdp=cfg.column_stdp,
        supervised=False,
    ))
    images, labels = [], []
    for img, lab in stream_samples(ds.train_images, ds.train_labels,
                                   cfg.samples, cfg.seed):
        model.step(img)
        images.append(img)
        labels.append(lab)
    images = np.stack(images)
    labels = np.array(labels)
    tnn_assign = model.assign(images)
    tnn_purity = purity(np.where(tnn_assign < 0, model.config.neurons, tnn_assign),
                        labels)
    km_assign, _ = kmeans(images.reshape(len(images), -1).astype(np.float64),
                          k=10, iters=20, seed=cfg.seed)
    km_purity = purity(km_assign, labels)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    export_weight_maps(out, model.weight_maps(), "cluster")
    export_csv(out / "cluster_weights.csv", model.weights[0])
    save_checkpoint(out / "cluster_weights.npz", {"w": model.weights})
    report = {
        "dataset": ds.name,
        "samples": int(cfg.samples),
        "tnn_purity": float(tnn_purity),
        "kmeans_purity": float(km_purity),
        "purity_gap_pp": float((km_purity - tnn_purity) * 100.0),
    }
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_incremental(args) -> int:
    cfg = _load_config(args)
    ds = _dataset(cfg)
    model = SingleColumnModel(SingleColumnConfig(
        seed=cfg.seed, theta=cfg.column_theta, stdp=cfg.column_stdp,
        supervised=True,
    ))
    known = ds.train_labels != 9
    for img, lab in stream_samples(ds.train_images[known], ds.train_labels[known],
                                   cfg.samples, cfg.seed):
        model.step(img, lab)
    novel = ds.train_labels == 9
    stream = stream_samples(ds.train_images[novel], ds.train_labels[novel],
                            args.novel_samples, cfg.seed + 1)
    report = run_incremental_experiment(model, stream,
                                        max_samples=args.novel_samples)
    payload = report.to_dict()
    payload["dataset"] = ds.name
    print(json.dumps(payload, sort_keys=True))
    return 0


def _parse_hw_layers(spec: str) -> hwmodel.NetworkHwSpec:
    layers = []
    for part in spec.split(","):
        dims, _, mode = part.partition(":")
        s, p, q = (int(v) for v in dims.split("x"))
        layers.append(hwmodel.LayerHwSpec(columns=s, p=p, q=q, mode=mode or "stdp"))
    return hwmodel.NetworkHwSpec(name="custom", layers=tuple(layers))


def cmd_hw_report(args) -> int:
    if args.spec == "prototype":
        spec = hwmodel.prototype_spec()
    else:
        spec = _parse_hw_layers(args.spec)
    report = hwmodel.network_report(spec, args.node)
    payload = report.to_dict()
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    best = report.best
    print(f"network {spec.name} @ {report.node.name}")
    print(f"  gates        {report.total_gates:>14,}")
    print(f"  transistors  {report.total_gates * hwmodel.TRANSISTORS_PER_GATE:>14,}")
    print(f"  synapses     {spec.synapses:>14,}")
    print(f"  area         {best.area_mm2:>14.4g} mm^2")
    print(f"  compute time {best.compute_time_ns:>14.4g} ns")
    print(f"  power        {best.power_mw:>14.4g} mW")
    print(f"  throughput   {best.throughput_fps:>14.4g} images/s")
    if report.calibrated is not None:
        a = report.analytical
        print(f"  [analytical: {a.area_mm2:.4g} mm^2, {a.compute_time_ns:.4g} ns, "
              f"{a.power_mw:.4g} mW; table values above are post-synthesis-calibrated]")
    return 0


def cmd_convert_baseline(args) -> int:
    layers = (hwmodel.BASELINE_CONV_LAYERS if not args.layer
              else [tuple(int(v) for v in spec.split(",")) for spec in args.layer])
    total = 0
    print(f"{'layer':>6} {'#inputs':>8} {'#outputs':>9} {'#columns':>9} {'#synapses':>12}")
    for i, dims in enumerate(layers, start=1):
        conv = hwmodel.conv_to_column(*dims)
        total += conv.synapses
        print(f"{i:>6} {conv.inputs:>8} {conv.outputs:>9} {conv.columns:>9} "
              f"{conv.synapses:>12,}")
    print(f"{'total':>6} {'':>8} {'':>9} {'':>9} {total:>12,}")
    return 0


def cmd_export_weights(args) -> int:
    arrays = load_checkpoint(args.weights)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    formats = set(args.format.split(","))
    for name, arr in arrays.items():
        if arr.ndim < 2:
            continue
        if "csv" in formats:
            export_csv(out / f"{name}.csv", arr)
        if "pgm" in formats:
            block = arr[0] if arr.ndim == 3 and arr.shape[0] == 1 else arr
            if block.ndim == 2:
                side = int(round(block.shape[0] ** 0.5))
                if side * side == block.shape[0]:
                    maps = block.T.reshape(block.shape[1], side, side)
                    export_weight_maps(out, maps, name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnnsim",
        description="Temporal neural network simulator and hardware cost model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, samples_default=None):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--dataset", choices=["auto", "mnist", "digits"])
        p.add_argument("--data-dir", dest="data_dir")
        p.add_argument("--samples", type=int, default=samples_default)
        p.add_argument("--out")
        p.add_argument("--parallel", action=argparse.BooleanOptionalAction,
                       default=None)

    p = sub.add_parser("train", help="online-train the two-layer network")
    common(p)
    p.add_argument("--metrics-interval", dest="metrics_interval", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="frozen accuracy of a checkpoint")
    common(p)
    p.add_argument("--weights", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cluster", help="single-column unsupervised clustering vs k-means")
    common(p, samples_default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("incremental", help="learn a held-out class online")
    common(p)
    p.add_argument("--novel-samples", type=int, default=2000)
    p.set_defaults(func=cmd_incremental)

    p = sub.add_parser("hw-report", help="gate counts and ADP at a process node")
    p.add_argument("--spec", default="prototype",
                   help='"prototype" or layer list like "625x32x12:stdp,625x12x10:rstdp"')
    p.add_argument("--node", default="45nm")
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_hw_report)

    p = sub.add_parser("convert-baseline",
                       help="convolution-to-column conversion arithmetic")
    p.add_argument("--layer", action="append",
                   help="in_maps,kernel,out_maps,out_h,out_w (repeatable)")
    p.set_defaults(func=cmd_convert_baseline)

    p = sub.add_parser("export-weights", help="emit PGM/CSV from a checkpoint")
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="pgm,csv")
    p.set_defaults(func=cmd_export_weights)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TnnError, OSError) as e:
        print(f"{ERROR_PREFIX} {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
