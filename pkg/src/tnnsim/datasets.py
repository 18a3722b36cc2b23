"""Dataset ingestion: IDX files, plus a bundled fallback digit set.

The canonical input is the MNIST IDX pair (big-endian magic 0x00000803 for
images, 0x00000801 for labels, 28x28 uint8 grids). Files may be plain or
gzip-compressed. When no IDX files are available, a fallback source derived
from scikit-learn's bundled 8x8 handwritten digits (bilinearly resampled to
28x28) keeps every experiment runnable; results on the fallback are labeled
as such and are not comparable to MNIST numbers.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import IngestionError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

# Standard file names searched (with optional .gz) inside a data directory.
MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def _open_maybe_gzip(path: Path):
    with open(path, "rb") as f:
        magic = f.read(2)
    if magic == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(f, n: int, path: Path, offset: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise IngestionError(
            f"{path}: truncated at byte offset {offset + len(data)} "
            f"(wanted {n} more bytes)"
        )
    return data


def read_idx_images(path: str | Path) -> np.ndarray:
    """Load an IDX image file into a (count, rows, cols) uint8 array."""
    path = Path(path)
    with _open_maybe_gzip(path) as f:
        header = _read_exact(f, 16, path, 0)
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGE_MAGIC:
            raise IngestionError(
                f"{path}: unexpected magic 0x{magic:08x} at byte offset 0 "
                f"(expected 0x{IDX_IMAGE_MAGIC:08x})"
            )
        payload = _read_exact(f, count * rows * cols, path, 16)
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path: str | Path) -> np.ndarray:
    """Load an IDX label file into a (count,) uint8 array."""
    path = Path(path)
    with _open_maybe_gzip(path) as f:
        header = _read_exact(f, 8, path, 0)
        magic, count = struct.unpack(">II", header)
        if magic != IDX_LABEL_MAGIC:
            raise IngestionError(
                f"{path}: unexpected magic 0x{magic:08x} at byte offset 0 "
                f"(expected 0x{IDX_LABEL_MAGIC:08x})"
            )
        payload = _read_exact(f, count, path, 8)
    return np.frombuffer(payload, dtype=np.uint8)


def ingest_mnist(images_path: str | Path,
                 labels_path: str | Path) -> Iterator[tuple[np.ndarray, int]]:
    """Yield (28x28 uint8 grid, label) pairs in file order.

    Raises IngestionError on bad magic numbers, truncation, dimension or
    image/label count mismatches.
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[1:] != (28, 28):
        raise IngestionError(
            f"{images_path}: expected 28x28 images, got {images.shape[1:]}"
        )
    if images.shape[0] != labels.shape[0]:
        raise IngestionError(
            f"image count {images.shape[0]} != label count {labels.shape[0]} "
            f"({images_path} vs {labels_path})"
        )
    if (labels > 9).any():
        bad = int(np.argmax(labels > 9))
        raise IngestionError(f"{labels_path}: label {labels[bad]} at index {bad} outside 0-9")
    for img, lab in zip(images, labels):
        yield img, int(lab)


@dataclass(frozen=True)
class DataSplits:
    """In-memory train/test split of a 28x28 digit dataset."""

    name: str
    train_images: np.ndarray  # (N, 28, 28) uint8
    train_labels: np.ndarray  # (N,) int64
    test_images: np.ndarray
    test_labels: np.ndarray


def _find_pair(data_dir: Path, names: tuple[str, str]) -> tuple[Path, Path] | None:
    found = []
    for name in names:
        for candidate in (data_dir / name, data_dir / (name + ".gz")):
            if candidate.is_file():
                found.append(candidate)
                break
        else:
            return None
    return found[0], found[1]


def load_mnist(data_dir: str | Path) -> DataSplits | None:
    """Load the standard MNIST IDX pairs from ``data_dir``, if all four exist."""
    data_dir = Path(data_dir)
    train = _find_pair(data_dir, MNIST_FILES["train"])
    test = _find_pair(data_dir, MNIST_FILES["test"])
    if train is None or test is None:
        return None
    tr = list(ingest_mnist(*train))
    te = list(ingest_mnist(*test))
    return DataSplits(
        name="mnist",
        train_images=np.stack([i for i, _ in tr]),
        train_labels=np.array([l for _, l in tr], dtype=np.int64),
        test_images=np.stack([i for i, _ in te]),
        test_labels=np.array([l for _, l in te], dtype=np.int64),
    )


def load_digits_fallback(seed: int = 0, test_fraction: float = 0.2) -> DataSplits:
    """28x28 fallback built from scikit-learn's bundled handwritten digits.

    The 8x8 images (1797 samples) are bilinearly resampled to 28x28 and
    rescaled to 0..255. The split is a seeded permutation, stratification-free.
    """
    from scipy.ndimage import zoom
    from sklearn.datasets import load_digits

    raw = load_digits()
    imgs = raw.images / 16.0  # native range 0..16
    up = np.stack([zoom(img, 28 / 8, order=1, grid_mode=True, mode="grid-constant")
                   for img in imgs])
    up = np.clip(np.rint(up * 255.0), 0, 255).astype(np.uint8)
    labels = raw.target.astype(np.int64)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(labels))
    n_test = int(len(labels) * test_fraction)
    test_idx, train_idx = order[:n_test], order[n_test:]
    return DataSplits(
        name="digits-fallback",
        train_images=up[train_idx],
        train_labels=labels[train_idx],
        test_images=up[test_idx],
        test_labels=labels[test_idx],
    )


def resolve_dataset(name: str = "auto", data_dir: str | Path = "data",
                    seed: int = 0) -> DataSplits:
    """Pick a dataset: "mnist", "digits", or "auto" (MNIST if present)."""
    if name == "mnist":
        ds = load_mnist(data_dir)
        if ds is None:
            raise IngestionError(
                f"MNIST IDX files not found under {data_dir!s} "
                f"(expected {MNIST_FILES['train']} and {MNIST_FILES['test']}, "
                "optionally .gz)"
            )
        return ds
    if name == "digits":
        return load_digits_fallback(seed=seed)
    if name == "auto":
        ds = load_mnist(data_dir)
        return ds if ds is not None else load_digits_fallback(seed=seed)
    raise IngestionError(f"unknown dataset {name!r}; use mnist, digits, or auto")


def stream_samples(images: np.ndarray, labels: np.ndarray, n: int,
                   seed: int) -> Iterator[tuple[np.ndarray, int]]:
    """A deterministic online stream of n samples, drawn with replacement
    when n exceeds the dataset size, else a seeded shuffle without replacement."""
    rng = np.random.default_rng(seed)
    if n <= len(labels):
        idx = rng.permutation(len(labels))[:n]
    else:
        idx = rng.integers(0, len(labels), size=n)
    for i in idx:
        yield images[i], int(labels[i])
