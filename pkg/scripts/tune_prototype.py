"""Hyperparameter sweep for the two-layer prototype network.

Trains the 625-column network online for each configuration and reports
online accuracy (overall and over the last 2000 samples) plus frozen test
accuracy. Use --grid small for a quick sanity pass.

Usage: python scripts/tune_prototype.py [--samples N] [--dataset auto]
"""

import argparse
import itertools
import json

import numpy as np

from tnnsim.datasets import resolve_dataset, stream_samples
from tnnsim.network import PrototypeConfig, PrototypeNetwork
from tnnsim.plasticity import StdpParams


def run(ds, theta1, l1, l2, n, seed, test_n):
    net = PrototypeNetwork(PrototypeConfig(seed=seed, theta1=theta1,
                                           l1_stdp=l1, l2_stdp=l2))
    correct = total = 0
    recent = []
    for img, lab in stream_samples(ds.train_images, ds.train_labels, n, seed=seed):
        pred = net.learn_step(img, int(lab))
        total += 1
        correct += int(pred == lab)
        recent.append(int(pred == lab))
        if len(recent) > 2000:
            recent.pop(0)
    test_acc = net.evaluate(ds.test_images[:test_n], ds.test_labels[:test_n])
    return correct / max(total, 1), float(np.mean(recent or [0])), test_acc


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=12000)
    ap.add_argument("--test-samples", type=int, default=500)
    ap.add_argument("--dataset", default="auto")
    ap.add_argument("--data-dir", default="data")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", choices=["small", "full"], default="small")
    args = ap.parse_args()

    ds = resolve_dataset(args.dataset, args.data_dir, seed=0)
    print(f"dataset: {ds.name}")

    if args.grid == "small":
        thetas = (8, 12, 16)
        l1s = [StdpParams(0.15, 0.9, 0.001, 0.1)]
        l2s = [StdpParams(0.6, 0.3, 0.03, 0.2), StdpParams(0.8, 0.5, 0.01, 0.1)]
    else:
        thetas = (6, 8, 10, 12, 16, 20)
        l1s = [StdpParams(c, b, s, 0.1)
               for c, b, s in itertools.product((0.1, 0.15, 0.25), (0.7, 0.9),
                                                (0.0005, 0.001, 0.003))]
        l2s = [StdpParams(c, b, s, m)
               for c, b, s, m in itertools.product((0.6, 0.8), (0.3, 0.5),
                                                   (0.005, 0.01, 0.03), (0.1, 0.2))]

    for theta1, l1, l2 in itertools.product(thetas, l1s, l2s):
        online, late, test = run(ds, theta1, l1, l2, args.samples, args.seed,
                                 args.test_samples)
        print(json.dumps({
            "theta1": theta1,
            "l1": [l1.mu_capture, l1.mu_backoff, l1.mu_search, l1.mu_min],
            "l2": [l2.mu_capture, l2.mu_backoff, l2.mu_search, l2.mu_min],
            "online": round(online, 4), "late2k": round(late, 4),
            "test": round(test, 4),
        }), flush=True)


if __name__ == "__main__":
    main()
