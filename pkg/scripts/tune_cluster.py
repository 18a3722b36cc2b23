"""Grid sweep for the single-column clustering experiment.

Streams the fallback digits (or MNIST when present) through a 784x10 STDP
column for each (theta, mu) combination and reports frozen-assignment purity
against the in-repo k-means baseline on the same stream.

Usage: python scripts/tune_cluster.py [--samples N] [--dataset auto] [--top K]
"""

import argparse
import itertools
import json

import numpy as np

from tnnsim.clustering import kmeans, purity
from tnnsim.datasets import resolve_dataset, stream_samples
from tnnsim.network import SingleColumnConfig, SingleColumnModel
from tnnsim.plasticity import StdpParams


def run_once(ds, theta, mu, n, seed):
    model = SingleColumnModel(SingleColumnConfig(seed=seed, theta=theta, stdp=mu))
    imgs, labs = [], []
    for img, lab in stream_samples(ds.train_images, ds.train_labels, n, seed=seed):
        model.step(img)
        imgs.append(img)
        labs.append(lab)
    imgs, labs = np.stack(imgs), np.array(labs)
    assign = model.assign(imgs)
    pur = purity(np.where(assign < 0, model.config.neurons, assign), labs)
    return pur, imgs, labs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=10000)
    ap.add_argument("--dataset", default="auto")
    ap.add_argument("--data-dir", default="data")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    ds = resolve_dataset(args.dataset, args.data_dir, seed=0)
    print(f"dataset: {ds.name}")

    km_imgs, km_labs = [], []
    for img, lab in stream_samples(ds.train_images, ds.train_labels,
                                   args.samples, seed=args.seeds[0]):
        km_imgs.append(img)
        km_labs.append(lab)
    km_assign, _ = kmeans(np.stack(km_imgs).reshape(len(km_imgs), -1).astype(float),
                          k=10, iters=20, seed=args.seeds[0])
    km_pur = purity(km_assign, np.array(km_labs))
    print(f"k-means purity: {km_pur:.4f}")

    grid = list(itertools.product(
        (200, 250, 300, 400),        # theta
        (0.15, 0.25, 0.35),          # mu_capture
        (0.5, 0.7, 0.9),             # mu_backoff
        (0.001, 0.003),              # mu_search
        (0.1, 0.2),                  # mu_min
    ))
    results = []
    for theta, cap, bo, se, mn in grid:
        mu = StdpParams(mu_capture=cap, mu_backoff=bo, mu_search=se, mu_min=mn)
        purities = [run_once(ds, theta, mu, args.samples, seed)[0]
                    for seed in args.seeds]
        rec = {"theta": theta, "mu_capture": cap, "mu_backoff": bo,
               "mu_search": se, "mu_min": mn,
               "purity_mean": float(np.mean(purities)),
               "purity_min": float(np.min(purities)),
               "kmeans": float(km_pur)}
        results.append(rec)
        print(json.dumps(rec, sort_keys=True), flush=True)

    results.sort(key=lambda r: -r["purity_mean"])
    print("\ntop 5:")
    for rec in results[:5]:
        print(json.dumps(rec, sort_keys=True))
    if args.out:
        with open(args.out, "w") as f:
            json.dump(results, f, indent=2)


if __name__ == "__main__":
    main()
