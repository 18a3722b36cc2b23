"""Weight export (PGM / CSV) and checkpoint save/load.

PGM output is binary P5, 8-bit, with weights rescaled 0..255, one file per
neuron map. CSV output is exact integer weights, one row per input line.
Checkpoints use .npz (numpy writes fixed zip timestamps, so identical arrays
produce byte-identical files).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .temporal import DEFAULT_PARAMS, TemporalParams


def write_pgm(path: str | Path, image: np.ndarray):
    """Write one 8-bit grayscale image as binary PGM (P5)."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError(f"PGM needs a 2-D image, got shape {img.shape}")
    img = np.clip(img, 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        f.write(img.tobytes())


def weights_to_gray(weights: np.ndarray,
                    params: TemporalParams = DEFAULT_PARAMS) -> np.ndarray:
    """Rescale integer weights 0..w_max to 0..255."""
    return np.rint(np.asarray(weights) * (255.0 / params.w_max)).astype(np.uint8)


def export_weight_maps(out_dir: str | Path, maps: np.ndarray, prefix: str,
                       params: TemporalParams = DEFAULT_PARAMS) -> list[Path]:
    """Write one PGM per (q, h, w) weight map; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for j, m in enumerate(maps):
        path = out_dir / f"{prefix}_{j:02d}.pgm"
        write_pgm(path, weights_to_gray(m, params))
        paths.append(path)
    return paths


def export_csv(path: str | Path, weights: np.ndarray):
    """Exact weights as CSV; 2-D written directly, 3-D flattened to (s*p, q)."""
    w = np.asarray(weights)
    if w.ndim == 3:
        w = w.reshape(-1, w.shape[-1])
    np.savetxt(path, w, fmt="%d", delimiter=",")


def save_checkpoint(path: str | Path, arrays: dict[str, np.ndarray]):
    np.savez(path, **arrays)


def load_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    with np.load(path) as data:
        return {k: data[k] for k in data.files}
