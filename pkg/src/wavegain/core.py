"""Dense tensor arithmetic shared by every other module.

Tensors are plain ``numpy.ndarray`` objects in row-major order, float64 by
default (float32 is allowed in training hot loops, selected by config).
Complex data is carried as separate real/imaginary planes, never interleaved,
because every complex operation in this package reduces to explicit plane
arithmetic.  All operations are pure: they never mutate their inputs, and
reductions use a fixed (row-major pairwise) order so results are
deterministic for a given input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_DTYPE = np.float64


class DimensionError(ValueError):
    """Shapes of the operands are incompatible."""


class ConfigError(ValueError):
    """A name, flag or configuration value is invalid."""


class VerificationError(RuntimeError):
    """A self-check (PR, adjoint, gradient) exceeded its tolerance."""


class DataError(IOError):
    """An input file is missing, truncated or malformed."""


def as_tensor(x, dtype=DEFAULT_DTYPE) -> np.ndarray:
    """Coerce to a dense array of the requested float dtype."""
    out = np.asarray(x, dtype=dtype)
    return out


def check_finite(x: np.ndarray, what: str = "tensor") -> np.ndarray:
    """NaN/Inf is an error surface, never a silent state."""
    if not np.all(np.isfinite(x)):
        raise VerificationError(f"non-finite values in {what}")
    return x


@dataclass(frozen=True)
class ComplexPair:
    """A complex tensor stored as two same-shape real planes."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        if self.re.shape != self.im.shape:
            raise DimensionError(
                f"re/im shape mismatch: {self.re.shape} vs {self.im.shape}")

    @property
    def shape(self):
        return self.re.shape

    @property
    def dtype(self):
        return self.re.dtype

    def conj(self) -> "ComplexPair":
        return ComplexPair(self.re, -self.im)

    def astype(self, dtype) -> "ComplexPair":
        return ComplexPair(self.re.astype(dtype), self.im.astype(dtype))

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.re, self.im)


def complex_pair(re, im, dtype=None) -> ComplexPair:
    re = np.asarray(re)
    im = np.asarray(im)
    if dtype is not None:
        re = re.astype(dtype)
        im = im.astype(dtype)
    return ComplexPair(re, im)


def complex_zeros(shape, dtype=DEFAULT_DTYPE) -> ComplexPair:
    return ComplexPair(np.zeros(shape, dtype), np.zeros(shape, dtype))


def complex_mul(a: ComplexPair, b: ComplexPair) -> ComplexPair:
    """Elementwise (a.re + j a.im)(b.re + j b.im); broadcasting allowed."""
    try:
        re = a.re * b.re - a.im * b.im
        im = a.re * b.im + a.im * b.re
    except ValueError as exc:
        raise DimensionError(
            f"complex_mul: shapes {a.shape} and {b.shape} do not broadcast"
        ) from exc
    return ComplexPair(re, im)


def inner_product(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of elementwise products, row-major pairwise summation.

    The reduction order is numpy's pairwise scheme over the flattened
    row-major buffer; it is deterministic for a fixed shape, and symmetric
    in (a, b) bit-exactly because the elementwise products commute.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(
            f"inner_product: shapes {a.shape} and {b.shape} differ")
    return float(np.sum(np.ravel(a) * np.ravel(b)))


def pyramid_inner(xs, ys) -> float:
    """Real inner product over a flat list of plane pairs."""
    return float(sum(inner_product(x, y) for x, y in zip(xs, ys, strict=True)))


# ---------------------------------------------------------------------------
# NPY (v1.0) interchange.  ComplexPair is serialized as two files with
# `.re.npy` / `.im.npy` suffixes.
# ---------------------------------------------------------------------------

def save_tensor(path, x: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.lib.format.write_array(fh, np.ascontiguousarray(x), version=(1, 0))


def load_tensor(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing tensor file: {path}")
    with open(path, "rb") as fh:
        return np.lib.format.read_array(fh)


def save_complex(path_stem, z: ComplexPair) -> None:
    stem = str(path_stem)
    save_tensor(stem + ".re.npy", z.re)
    save_tensor(stem + ".im.npy", z.im)


def load_complex(path_stem) -> ComplexPair:
    stem = str(path_stem)
    return ComplexPair(load_tensor(stem + ".re.npy"),
                       load_tensor(stem + ".im.npy"))


def save_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_json(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing manifest: {path}")
    return json.loads(path.read_text())
