import json
import re
from pathlib import Path

import numpy as np
import pytest

from tnnsim.cli import RunConfig, main
from tnnsim.export import load_checkpoint
from tnnsim.network import PrototypeConfig, PrototypeNetwork
from tnnsim.plasticity import StdpParams


def run_cli(*argv) -> int:
    return main(list(argv))


class TestHwReport:
    def test_prototype_7nm_calibrated_values(self, capsys):
        assert run_cli("hw-report", "--spec", "prototype", "--node", "7nm") == 0
        out = capsys.readouterr().out
        area = float(re.search(r"area\s+([\d.]+) mm", out).group(1))
        time_ns = float(re.search(r"compute time\s+([\d.]+) ns", out).group(1))
        power = float(re.search(r"power\s+([\d.]+) mW", out).group(1))
        assert area == pytest.approx(1.54, rel=0.01)
        assert time_ns == pytest.approx(9.34, rel=0.01)
        assert power == pytest.approx(7.26, rel=0.01)

    def test_json_export(self, tmp_path, capsys):
        path = tmp_path / "report.json"
        assert run_cli("hw-report", "--node", "7nm", "--json", str(path)) == 0
        payload = json.loads(path.read_text())
        assert payload["synapses"] == 315_000
        assert payload["throughput_fps"] == pytest.approx(1.07e8, rel=0.01)

    def test_custom_spec(self, capsys):
        assert run_cli("hw-report", "--spec", "1x784x10:stdp", "--node", "45nm") == 0
        out = capsys.readouterr().out
        assert "synapses" in out and "7,840" in out

    def test_unknown_node_fails(self, capsys):
        assert run_cli("hw-report", "--node", "3nm") == 1
        assert "tnnsim: error:" in capsys.readouterr().err


class TestConvertBaseline:
    def test_builtin_totals(self, capsys):
        assert run_cli("convert-baseline") == 0
        out = capsys.readouterr().out
        assert "3,528,000" in out
        assert "13,230,000" in out
        assert "20,000,000" in out
        assert "36,758,000" in out

    def test_custom_layer(self, capsys):
        assert run_cli("convert-baseline", "--layer", "1,1,1,1,1") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[-1].split()[-1] == "1"


class TestTrainEval:
    def test_zero_samples_writes_untouched_weights(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert run_cli("train", "--dataset", "digits", "--samples", "0",
                       "--seed", "11", "--out", str(out)) == 0
        stdout = capsys.readouterr().out
        assert "accuracy" not in stdout
        saved = load_checkpoint(out / "weights.npz")
        fresh = PrototypeNetwork(PrototypeConfig(seed=11))
        assert (saved["w1"] == fresh.layer1.weights).all()
        assert (saved["w2"] == fresh.layer2.weights).all()
        assert (out / "config.ini").exists()
        assert (out / "metrics.jsonl").exists()

    def test_train_then_eval(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert run_cli("train", "--dataset", "digits", "--samples", "40",
                       "--seed", "3", "--out", str(out),
                       "--metrics-interval", "20") == 0
        stdout = capsys.readouterr().out
        assert "online_accuracy" in stdout
        metrics = [json.loads(line)
                   for line in (out / "metrics.jsonl").read_text().splitlines()]
        assert metrics[0]["sample_index"] == 20
        assert run_cli("eval", "--dataset", "digits", "--samples", "25",
                       "--seed", "3", "--weights", str(out / "weights.npz")) == 0
        assert re.search(r"accuracy 0\.\d+", capsys.readouterr().out)

    def test_byte_identical_reruns(self, tmp_path, capsys):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli("train", "--dataset", "digits", "--samples", "30",
                           "--seed", "7", "--out", str(out)) == 0
            outs.append(out)
        for fname in ("weights.npz", "metrics.jsonl", "weights_l1.csv",
                      "weights_l2.csv"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()

    def test_eval_missing_weights(self, tmp_path, capsys):
        assert run_cli("eval", "--dataset", "digits",
                       "--weights", str(tmp_path / "nope.npz")) == 1
        assert "tnnsim: error:" in capsys.readouterr().err


class TestExportWeights:
    def test_pgm_and_csv(self, tmp_path, capsys):
        run = tmp_path / "run"
        assert run_cli("cluster", "--dataset", "digits", "--samples", "5",
                       "--seed", "1", "--out", str(run)) == 0
        capsys.readouterr()
        export = tmp_path / "export"
        assert run_cli("export-weights", "--weights",
                       str(run / "cluster_weights.npz"),
                       "--out", str(export)) == 0
        pgms = sorted(export.glob("w_*.pgm"))
        assert len(pgms) == 10
        header = pgms[0].read_bytes()[:15]
        assert header.startswith(b"P5\n28 28\n255\n")
        csv = np.loadtxt(export / "w.csv", delimiter=",", dtype=np.int64)
        assert csv.shape == (784, 10)
        assert csv.max() <= 7

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("export-weights")  # missing required flags
        assert exc.value.code == 2


class TestClusterAndIncremental:
    def test_cluster_reports_purities(self, tmp_path, capsys):
        assert run_cli("cluster", "--dataset", "digits", "--samples", "60",
                       "--seed", "2", "--out", str(tmp_path / "c")) == 0
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert 0.0 <= report["tnn_purity"] <= 1.0
        assert 0.0 <= report["kmeans_purity"] <= 1.0

    def test_incremental_runs(self, tmp_path, capsys):
        assert run_cli("incremental", "--dataset", "digits", "--samples", "30",
                       "--seed", "2", "--novel-samples", "120") == 0
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert "converged" in report and "window" in report


class TestRunConfig:
    def test_ini_round_trip(self, tmp_path):
        cfg = RunConfig(seed=42, dataset="digits", samples=123, theta1=20,
                        l1_stdp=StdpParams(mu_capture=0.9),
                        column_theta=500, parallel=True)
        path = tmp_path / "cfg.ini"
        path.write_text(cfg.to_ini())
        again = RunConfig.from_ini(path)
        assert again == cfg

    def test_missing_config_file(self, tmp_path, capsys):
        assert run_cli("train", "--config", str(tmp_path / "none.ini")) == 1
        assert "config file not found" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli("frobnicate")
    assert exc.value.code == 2
