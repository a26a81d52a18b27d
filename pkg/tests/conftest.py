import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def reflect_ref(p, n):
    """Independent reimplementation of repeated-sample reflection used by
    the naive oracles."""
    period = 2 * n
    p = p % period
    if p < 0:
        p += period
    return p if p < n else period - 1 - p


def make_cifar10_files(d, records_per_file=30, seed=0):
    """Tiny files in the exact CIFAR-10 binary layout."""
    rng = np.random.default_rng(seed)
    d.mkdir(parents=True, exist_ok=True)
    all_labels = []
    for name in [f"data_batch_{i}.bin" for i in range(1, 6)] + ["test_batch.bin"]:
        labels = rng.integers(0, 10, records_per_file, dtype=np.uint8)
        pixels = rng.integers(0, 256, (records_per_file, 3072), dtype=np.uint8)
        rec = np.concatenate([labels[:, None], pixels], axis=1)
        (d / name).write_bytes(rec.tobytes())
        all_labels.append(labels)
    return all_labels


def make_cifar100_files(d, records_per_file=60, seed=0):
    rng = np.random.default_rng(seed)
    d.mkdir(parents=True, exist_ok=True)
    for name in ["train.bin", "test.bin"]:
        coarse = rng.integers(0, 20, records_per_file, dtype=np.uint8)
        fine = rng.integers(0, 100, records_per_file, dtype=np.uint8)
        pixels = rng.integers(0, 256, (records_per_file, 3072), dtype=np.uint8)
        rec = np.concatenate([coarse[:, None], fine[:, None], pixels], axis=1)
        (d / name).write_bytes(rec.tobytes())
