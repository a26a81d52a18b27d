"""CIFAR-10/100 binary ingestion, per-class subsampling, batching.

Reads the standard binary distributions: CIFAR-10 as 3073-byte records
(1 label byte + 3072 RGB bytes) in data_batch_{1..5}.bin / test_batch.bin,
CIFAR-100 as 3074-byte records (coarse + fine label bytes; fine labels are
used) in train.bin / test.bin.  Pixels are scaled to [0, 1] and then
standardized per channel with statistics from the train split in use, so
subsampled runs never leak full-set statistics.  Nothing here touches the
network; files must already be on disk.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import ConfigError, DataError

_CIFAR10_TRAIN = [f"data_batch_{i}.bin" for i in range(1, 6)]
_CIFAR10_TEST = ["test_batch.bin"]
_CIFAR100_TRAIN = ["train.bin"]
_CIFAR100_TEST = ["test.bin"]

_RECORD = {"cifar10": 3073, "cifar100": 3074}
_CLASSES = {"cifar10": 10, "cifar100": 100}

# byte sizes of the canonical distribution files, for --download-check
EXPECTED_SIZES = {
    "cifar10": {name: 30730000 for name in _CIFAR10_TRAIN + _CIFAR10_TEST},
    "cifar100": {"train.bin": 153700000, "test.bin": 30740000},
}


@dataclass
class Dataset:
    images: np.ndarray          # (N, 3, 32, 32) float32, standardized
    labels: np.ndarray          # (N,) int64
    class_count: int
    split: str
    mean: np.ndarray | None = None   # per-channel stats used to standardize
    std: np.ndarray | None = None

    def __post_init__(self):
        if self.images.shape[0] != self.labels.shape[0]:
            raise DataError("image/label count mismatch")
        if self.labels.size and (self.labels.min() < 0
                                 or self.labels.max() >= self.class_count):
            raise DataError("label out of range")

    def __len__(self):
        return self.images.shape[0]


def _resolve_dir(dirpath, variant: str) -> Path:
    d = Path(dirpath)
    nested = {"cifar10": "cifar-10-batches-bin",
              "cifar100": "cifar-100-binary"}[variant]
    if (d / nested).is_dir():
        return d / nested
    return d


def _read_records(path: Path, variant: str):
    rec = _RECORD[variant]
    if not path.exists():
        raise DataError(f"missing CIFAR file: {path}")
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0 or raw.size % rec:
        raise DataError(
            f"corrupt CIFAR file {path}: {raw.size} bytes is not a multiple "
            f"of the {rec}-byte record")
    raw = raw.reshape(-1, rec)
    if variant == "cifar10":
        labels = raw[:, 0].astype(np.int64)
        pixels = raw[:, 1:]
    else:
        labels = raw[:, 1].astype(np.int64)   # fine labels
        pixels = raw[:, 2:]
    images = pixels.reshape(-1, 3, 32, 32).astype(np.float32) / 255.0
    return images, labels


def _load_split(d: Path, names, variant: str, split: str) -> Dataset:
    parts = [_read_records(d / name, variant) for name in names]
    images = np.concatenate([p[0] for p in parts])
    labels = np.concatenate([p[1] for p in parts])
    return Dataset(images=images, labels=labels,
                   class_count=_CLASSES[variant], split=split)


def _standardize(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset]:
    mean = train.images.mean(axis=(0, 2, 3), dtype=np.float64)
    std = train.images.std(axis=(0, 2, 3), dtype=np.float64)
    std = np.where(std == 0.0, 1.0, std)
    m32 = mean.astype(np.float32)[:, None, None]
    s32 = std.astype(np.float32)[:, None, None]

    def apply(ds, split):
        return Dataset(images=(ds.images - m32) / s32, labels=ds.labels,
                       class_count=ds.class_count, split=split,
                       mean=mean, std=std)

    return apply(train, train.split), apply(test, test.split)


def load_cifar(dirpath, variant: str) -> tuple[Dataset, Dataset]:
    """Load (train, test), standardized with full-train-split statistics."""
    if variant not in _RECORD:
        raise ConfigError(f"unknown CIFAR variant {variant!r}")
    d = _resolve_dir(dirpath, variant)
    train_names = _CIFAR10_TRAIN if variant == "cifar10" else _CIFAR100_TRAIN
    test_names = _CIFAR10_TEST if variant == "cifar10" else _CIFAR100_TEST
    train = _load_split(d, train_names, variant, "train")
    test = _load_split(d, test_names, variant, "test")
    return _standardize(train, test)


def check_cifar_files(dirpath, variant: str) -> list[str]:
    """Verify presence and byte sizes of the canonical files; returns a list
    of problems (empty when everything checks out)."""
    d = _resolve_dir(dirpath, variant)
    problems = []
    for name, size in EXPECTED_SIZES[variant].items():
        p = d / name
        if not p.exists():
            problems.append(f"missing {p}")
        elif p.stat().st_size != size:
            problems.append(f"{p}: {p.stat().st_size} bytes, expected {size}")
    return problems


def subsample_per_class(ds: Dataset, total: int, seed: int,
                        companion: Dataset | None = None):
    """Class-balanced subset of exactly total/class_count per class, drawn
    without replacement from a seeded shuffle.  Standardization is redone
    with the subset's own statistics; pass the test split as ``companion``
    to re-standardize it consistently."""
    if total % ds.class_count:
        raise ConfigError(
            f"total {total} not divisible by {ds.class_count} classes")
    if total > len(ds):
        raise ConfigError("requested more samples than the dataset holds")
    per = total // ds.class_count
    rng = np.random.default_rng(seed)
    picks = []
    for cls in range(ds.class_count):
        idx = np.flatnonzero(ds.labels == cls)
        if idx.size < per:
            raise ConfigError(f"class {cls} has only {idx.size} samples")
        picks.append(rng.permutation(idx)[:per])
    order = rng.permutation(np.concatenate(picks))
    subset = Dataset(images=ds.images[order], labels=ds.labels[order],
                     class_count=ds.class_count, split=ds.split,
                     mean=ds.mean, std=ds.std)
    if ds.mean is None:
        if companion is None:
            return subset
        return subset, companion
    # undo the parent standardization exactly, then redo with subset stats
    m32 = ds.mean.astype(np.float32)[:, None, None]
    s32 = ds.std.astype(np.float32)[:, None, None]
    raw_subset = replace(subset, images=subset.images * s32 + m32,
                         mean=None, std=None)
    if companion is None:
        out, _ = _standardize(raw_subset, raw_subset)
        return out
    raw_comp = replace(companion, images=companion.images * s32 + m32,
                       mean=None, std=None)
    return _standardize(raw_subset, raw_comp)


def batches(ds: Dataset, batch_size: int, seed: int, epoch: int):
    """Seeded per-epoch reshuffle; yields (images, labels), keeping the
    final partial batch."""
    if batch_size < 1:
        raise ConfigError("batch_size must be >= 1")
    rng = np.random.default_rng((seed, epoch))
    order = rng.permutation(len(ds))
    for start in range(0, len(ds), batch_size):
        sel = order[start:start + batch_size]
        yield ds.images[sel], ds.labels[sel]


def synthetic_dataset(n: int, class_count: int, seed: int,
                      image_size: int = 32) -> Dataset:
    """Small learnable stand-in dataset (class-dependent oriented patterns
    plus noise) for smoke tests and demos without real CIFAR files."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, class_count, size=n)
    yy, xx = np.meshgrid(np.arange(image_size), np.arange(image_size),
                         indexing="ij")
    images = np.empty((n, 3, image_size, image_size), dtype=np.float32)
    for i, cls in enumerate(labels):
        angle = np.pi * cls / class_count
        wave = np.cos(0.6 * (np.cos(angle) * yy + np.sin(angle) * xx)
                      + 0.5 * cls)
        images[i] = wave + 0.3 * rng.standard_normal((3,) + wave.shape)
    return Dataset(images=images, labels=labels.astype(np.int64),
                   class_count=class_count, split="synthetic")
