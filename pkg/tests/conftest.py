import gzip
import struct
from pathlib import Path

import numpy as np
import pytest

from tnnsim.datasets import load_digits_fallback

# Filled by tests/test_acceptance.py; printed after the run so the
# per-criterion verdict lines survive pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_idx_images(path: Path, images: np.ndarray, magic: int = 0x00000803,
                     compress: bool = False, truncate: int | None = None):
    """Build an IDX image file byte-by-byte (independent of the loader)."""
    images = np.asarray(images, dtype=np.uint8)
    blob = struct.pack(">IIII", magic, images.shape[0], images.shape[1],
                       images.shape[2]) + images.tobytes()
    if truncate is not None:
        blob = blob[:truncate]
    if compress:
        path.write_bytes(gzip.compress(blob))
    else:
        path.write_bytes(blob)
    return path


def write_idx_labels(path: Path, labels, magic: int = 0x00000801,
                     truncate: int | None = None):
    labels = np.asarray(labels, dtype=np.uint8)
    blob = struct.pack(">II", magic, labels.shape[0]) + labels.tobytes()
    if truncate is not None:
        blob = blob[:truncate]
    path.write_bytes(blob)
    return path


@pytest.fixture(scope="session")
def digits():
    """Small in-memory 28x28 dataset used by the learning tests."""
    return load_digits_fallback(seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
