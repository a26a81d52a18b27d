"""2-D dual-tree complex wavelet transform with exact adjoints.

The forward transform takes ``(..., H, W)`` real arrays to a pyramid of one
real lowpass plane plus, per scale, six complex subbands oriented at
{15, 45, 75, 105, 135, 165} degrees.  Level 1 uses the odd-length
biorthogonal pair without decimation; levels >= 2 run the orthogonal
composite q-shift stages from :mod:`wavegain.multirate` along both axes.

Four linear maps are exposed: ``dtcwt_forward``, ``dtcwt_inverse`` (a true
inverse: unmodified coefficients reconstruct the input to machine
precision), and their exact transposes ``dtcwt_forward_adjoint`` /
``dtcwt_inverse_adjoint``.  The transposes are what backpropagation through
the transform needs; for the q-shift stages they coincide with the
inverse/forward stages (orthogonality), while level 1 is biorthogonal and
gets dedicated transposed code paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (ComplexPair, DimensionError, load_json, load_tensor,
                   save_json, save_tensor)
from .filters import FilterSet, load_filter_set
from .multirate import (filt_same_adjoint_sum, filt_same_pair,
                        filt_same_sum, filt_same_sum_adjoint, qshift_down,
                        qshift_up)

ORIENTATIONS = (15, 45, 75, 105, 135, 165)

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass
class Pyramid:
    """Dual-tree coefficients: real lowpass + per-scale complex subbands.

    ``highpass[j-1]`` has shape ``(..., 6, H/2^j, W/2^j)`` with the subband
    axis ordered by orientation (15..165 degrees ascending).  The lowpass
    plane interleaves the four tree phases, so its extent is
    ``H/2^(J-1) x W/2^(J-1)``; per scale the implied decimation factor is
    2^j per tree.
    """

    lowpass: np.ndarray
    highpass: list[ComplexPair]
    levels: int
    source_shape: tuple[int, int]
    filter_set: str = "near_sym_a"

    def planes(self) -> list[np.ndarray]:
        """All real planes in a fixed order (for inner products etc.)."""
        out = [self.lowpass]
        for band in self.highpass:
            out.extend((band.re, band.im))
        return out

    def map(self, fn) -> "Pyramid":
        return Pyramid(
            lowpass=fn(self.lowpass),
            highpass=[ComplexPair(fn(b.re), fn(b.im)) for b in self.highpass],
            levels=self.levels, source_shape=self.source_shape,
            filter_set=self.filter_set)


def zeros_like_pyramid(p: Pyramid) -> Pyramid:
    return p.map(np.zeros_like)


def _check_even(n: int, what: str) -> None:
    if n % 2:
        raise DimensionError(f"{what} must be even, got {n}")


# ---------------------------------------------------------------------------
# Quad <-> complex packing.  The 2x2 quads of an undecimated (or composite)
# subband field carry the four tree phases; q2c combines them into the two
# conjugate-orientation complex subbands.  As a real-linear 4x4 map per quad
# it is orthogonal, so c2q is both its inverse and its transpose.
# ---------------------------------------------------------------------------

def q2c(y: np.ndarray) -> tuple[ComplexPair, ComplexPair]:
    a = y[..., 0::2, 0::2]
    b = y[..., 0::2, 1::2]
    c = y[..., 1::2, 0::2]
    d = y[..., 1::2, 1::2]
    s = _INV_SQRT2
    sub1 = ComplexPair((a - d) * s, (b + c) * s)
    sub2 = ComplexPair((a + d) * s, (b - c) * s)
    return sub1, sub2


def c2q(sub1: ComplexPair, sub2: ComplexPair) -> np.ndarray:
    s = _INV_SQRT2
    r1, i1, r2, i2 = sub1.re, sub1.im, sub2.re, sub2.im
    h2, w2 = r1.shape[-2:]
    out = np.zeros(r1.shape[:-2] + (2 * h2, 2 * w2),
                   dtype=np.result_type(r1, i1))
    out[..., 0::2, 0::2] = (r1 + r2) * s
    out[..., 0::2, 1::2] = (i1 + i2) * s
    out[..., 1::2, 0::2] = (i1 - i2) * s
    out[..., 1::2, 1::2] = (r2 - r1) * s
    return out


def _stack_bands(lohi, hihi, hilo) -> ComplexPair:
    """Pack the three oriented pairs into the canonical 6-band order."""
    s15, s165 = q2c(lohi)
    s45, s135 = q2c(hihi)
    s75, s105 = q2c(hilo)
    re = np.stack([s15.re, s45.re, s75.re, s105.re, s135.re, s165.re], axis=-3)
    im = np.stack([s15.im, s45.im, s75.im, s105.im, s135.im, s165.im], axis=-3)
    return ComplexPair(re, im)


def _unstack_bands(band: ComplexPair):
    def pick(i):
        return ComplexPair(band.re[..., i, :, :], band.im[..., i, :, :])
    lohi = c2q(pick(0), pick(5))
    hihi = c2q(pick(1), pick(4))
    hilo = c2q(pick(2), pick(3))
    return lohi, hihi, hilo


# ---------------------------------------------------------------------------
# Forward / inverse / adjoints.
# ---------------------------------------------------------------------------

def _level1_analysis(x, f):
    h0 = f.h0 * _INV_SQRT2
    h1 = f.h1 * _INV_SQRT2
    lo, hi = filt_same_pair(x, h0, h1, axis=-1)
    ll, lohi = filt_same_pair(lo, h0, h1, axis=-2)
    hilo, hihi = filt_same_pair(hi, h0, h1, axis=-2)
    return ll, _stack_bands(lohi, hihi, hilo)


def _level1_synthesis(ll, band, f):
    g0 = f.g0 * _INV_SQRT2
    g1 = f.g1 * _INV_SQRT2
    lohi, hihi, hilo = _unstack_bands(band)
    lo = filt_same_sum(ll, g0, lohi, g1, axis=-2)
    hi = filt_same_sum(hilo, g0, hihi, g1, axis=-2)
    return filt_same_sum(lo, g0, hi, g1, axis=-1)


def _level1_analysis_adjoint(ll_bar, band_bar, f):
    h0 = f.h0 * _INV_SQRT2
    h1 = f.h1 * _INV_SQRT2
    lohi, hihi, hilo = _unstack_bands(band_bar)  # c2q == q2c transpose
    lo = filt_same_adjoint_sum(ll_bar, h0, lohi, h1, axis=-2)
    hi = filt_same_adjoint_sum(hilo, h0, hihi, h1, axis=-2)
    return filt_same_adjoint_sum(lo, h0, hi, h1, axis=-1)


def _level1_synthesis_adjoint(x_bar, f):
    g0 = f.g0 * _INV_SQRT2
    g1 = f.g1 * _INV_SQRT2
    lo, hi = filt_same_sum_adjoint(x_bar, g0, g1, axis=-1)
    ll, lohi = filt_same_sum_adjoint(lo, g0, g1, axis=-2)
    hilo, hihi = filt_same_sum_adjoint(hi, g0, g1, axis=-2)
    return ll, _stack_bands(lohi, hihi, hilo)


def _qshift_analysis(v, q):
    lo = qshift_down(v, q.h0a, q.h0b, axis=-1)
    hi = qshift_down(v, q.h1a, q.h1b, axis=-1)
    ll = qshift_down(lo, q.h0a, q.h0b, axis=-2)
    lohi = qshift_down(lo, q.h1a, q.h1b, axis=-2)
    hilo = qshift_down(hi, q.h0a, q.h0b, axis=-2)
    hihi = qshift_down(hi, q.h1a, q.h1b, axis=-2)
    return ll, _stack_bands(lohi, hihi, hilo)


def _qshift_synthesis(ll, band, q):
    # exact transpose of _qshift_analysis == perfect-reconstruction stage
    lohi, hihi, hilo = _unstack_bands(band)
    lo = qshift_up(ll, q.h0a, q.h0b, axis=-2) + \
        qshift_up(lohi, q.h1a, q.h1b, axis=-2)
    hi = qshift_up(hilo, q.h0a, q.h0b, axis=-2) + \
        qshift_up(hihi, q.h1a, q.h1b, axis=-2)
    return qshift_up(lo, q.h0a, q.h0b, axis=-1) + \
        qshift_up(hi, q.h1a, q.h1b, axis=-1)


def dtcwt_forward(x: np.ndarray, levels: int,
                  fs: FilterSet | str = "near_sym_a") -> Pyramid:
    """J-level forward transform of ``(..., H, W)``; H, W divisible by 2^J."""
    if isinstance(fs, str):
        fs = load_filter_set(fs)
    if levels < 1:
        raise DimensionError("levels must be >= 1")
    h, w = x.shape[-2:]
    div = 1 << levels
    if h % div or w % div:
        raise DimensionError(
            f"input extent {h}x{w} not divisible by 2^{levels}")
    ll, band1 = _level1_analysis(x, fs.level1)
    bands = [band1]
    for _ in range(1, levels):
        ll, band = _qshift_analysis(ll, fs.qshift)
        bands.append(band)
    return Pyramid(lowpass=ll, highpass=bands, levels=levels,
                   source_shape=(h, w), filter_set=fs.name)


def dtcwt_inverse(p: Pyramid, fs: FilterSet | str | None = None) -> np.ndarray:
    """Reconstruct the source array from a pyramid (perfect reconstruction
    for untouched coefficients)."""
    if fs is None:
        fs = p.filter_set
    if isinstance(fs, str):
        fs = load_filter_set(fs)
    _check_pyramid(p)
    ll = p.lowpass
    for band in p.highpass[:0:-1]:
        ll = _qshift_synthesis(ll, band, fs.qshift)
    return _level1_synthesis(ll, p.highpass[0], fs.level1)


def dtcwt_forward_adjoint(p_bar: Pyramid,
                          fs: FilterSet | str | None = None) -> np.ndarray:
    """Exact transpose of :func:`dtcwt_forward` as a linear map
    (pyramid-shaped gradient in, image-shaped gradient out)."""
    if fs is None:
        fs = p_bar.filter_set
    if isinstance(fs, str):
        fs = load_filter_set(fs)
    _check_pyramid(p_bar)
    ll = p_bar.lowpass
    for band in p_bar.highpass[:0:-1]:
        # transpose of the orthogonal analysis stage == synthesis stage
        ll = _qshift_synthesis(ll, band, fs.qshift)
    return _level1_analysis_adjoint(ll, p_bar.highpass[0], fs.level1)


def dtcwt_inverse_adjoint(x_bar: np.ndarray, levels: int,
                          fs: FilterSet | str = "near_sym_a") -> Pyramid:
    """Exact transpose of :func:`dtcwt_inverse`: image-shaped gradient in,
    pyramid-shaped gradient out (the backward pass of the synthesis side)."""
    if isinstance(fs, str):
        fs = load_filter_set(fs)
    h, w = x_bar.shape[-2:]
    div = 1 << levels
    if h % div or w % div:
        raise DimensionError(
            f"gradient extent {h}x{w} not divisible by 2^{levels}")
    ll, band1 = _level1_synthesis_adjoint(x_bar, fs.level1)
    bands = [band1]
    for _ in range(1, levels):
        # transpose of the synthesis stage == analysis stage
        ll, band = _qshift_analysis(ll, fs.qshift)
        bands.append(band)
    return Pyramid(lowpass=ll, highpass=bands, levels=levels,
                   source_shape=(h, w), filter_set=fs.name)


def _check_pyramid(p: Pyramid) -> None:
    if p.levels != len(p.highpass):
        raise DimensionError("pyramid level count does not match band list")
    h, w = p.source_shape
    for j, band in enumerate(p.highpass, start=1):
        want = (6, h >> j, w >> j)
        if band.re.shape[-3:] != want:
            raise DimensionError(
                f"scale-{j} band shape {band.re.shape[-3:]} != {want}")
    j = p.levels
    want_lo = (h >> (j - 1), w >> (j - 1))
    if p.lowpass.shape[-2:] != want_lo:
        raise DimensionError(
            f"lowpass shape {p.lowpass.shape[-2:]} != {want_lo}")


# ---------------------------------------------------------------------------
# Boundary padding for sizes not divisible by 2^J (the gain layer pads with
# symmetric reflection and crops after the inverse; both directions have
# exact adjoints).
# ---------------------------------------------------------------------------

def padded_size(n: int, levels: int) -> int:
    div = 1 << levels
    return ((n + div - 1) // div) * div


def sym_pad_2d(x: np.ndarray, hpad: int, wpad: int) -> np.ndarray:
    """Extend bottom/right by symmetric reflection (repeated edge)."""
    from .multirate import sym_extend
    if wpad:
        x = sym_extend(x, 0, wpad)
    if hpad:
        x = np.moveaxis(sym_extend(np.moveaxis(x, -2, -1), 0, hpad), -1, -2)
    return x


def sym_pad_2d_adjoint(z: np.ndarray, hpad: int, wpad: int) -> np.ndarray:
    from .multirate import sym_extend_adjoint
    if hpad:
        zt = np.moveaxis(z, -2, -1)
        zt = sym_extend_adjoint(zt, 0, hpad, zt.shape[-1] - hpad)
        z = np.moveaxis(zt, -1, -2)
    if wpad:
        z = sym_extend_adjoint(z, 0, wpad, z.shape[-1] - wpad)
    return z


# ---------------------------------------------------------------------------
# Pyramid serialization: a directory of NPY planes plus a JSON manifest.
# ---------------------------------------------------------------------------

def save_pyramid(dirpath, p: Pyramid) -> None:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    save_tensor(d / "lowpass.npy", p.lowpass)
    for j, band in enumerate(p.highpass, start=1):
        save_tensor(d / f"scale{j}.re.npy", band.re)
        save_tensor(d / f"scale{j}.im.npy", band.im)
    save_json(d / "manifest.json", {
        "kind": "dtcwt-pyramid",
        "levels": p.levels,
        "source_shape": list(p.source_shape),
        "filter_set": p.filter_set,
        "lowpass_shape": list(p.lowpass.shape),
        "band_shapes": [list(b.re.shape) for b in p.highpass],
    })


def load_pyramid(dirpath) -> Pyramid:
    d = Path(dirpath)
    man = load_json(d / "manifest.json")
    low = load_tensor(d / "lowpass.npy")
    bands = []
    for j in range(1, man["levels"] + 1):
        bands.append(ComplexPair(load_tensor(d / f"scale{j}.re.npy"),
                                 load_tensor(d / f"scale{j}.im.npy")))
    p = Pyramid(lowpass=low, highpass=bands, levels=man["levels"],
                source_shape=tuple(man["source_shape"]),
                filter_set=man["filter_set"])
    _check_pyramid(p)
    return p


# ---------------------------------------------------------------------------
# Analytic multiply counts.
# ---------------------------------------------------------------------------

@dataclass
class LayerCostSpec:
    in_channels: int
    out_channels: int
    levels: int = 2
    gain_sizes: tuple = ()          # (kh, kw) per scale; default 1x1
    lowpass_size: int = 3
    conv_kernel: int = 5
    filter_set: str = "near_sym_a"


def _unique_multiplies(h: np.ndarray) -> int:
    """Multiplies per output sample: zero taps are free, symmetric taps
    pair up into one multiply."""
    h = np.asarray(h)
    nz = h != 0.0
    if np.allclose(h, h[::-1]):
        m = h.size
        half = int(np.sum(nz[: (m + 1) // 2]))
        return half
    return int(np.sum(nz))


def mac_count(spec: LayerCostSpec) -> dict:
    """Analytic multiply counts per input pixel.

    Returns overhead (one forward + one inverse transform, per channel --
    independent of the channel counts), the gain-mixing cost, and the
    equivalent dense-convolution cost K^2 * F.
    """
    fs = load_filter_set(spec.filter_set)
    f1 = fs.level1
    m0 = _unique_multiplies(f1.h0)
    m1 = _unique_multiplies(f1.h1)
    # level 1, undecimated: 2 column filterings at full rate + 4 row
    # filterings at full rate
    level1 = (m0 + m1) + 2 * (m0 + m1)
    qm = _unique_multiplies(fs.qshift.h0a)
    per_level = []
    rate = 1.0
    for j in range(2, spec.levels + 1):
        # composite stage at the current lowpass rate: 2 filters on one axis
        # (half-rate outputs) + 4 on the other (quarter-rate outputs)
        per_level.append(rate * (2 * qm * 0.5 + 4 * qm * 0.25))
        rate /= 4.0
    forward = level1 + sum(per_level)
    inverse = forward  # synthesis mirrors analysis cost
    overhead = forward + inverse

    mixing = 0.0
    rate = 1.0
    for j in range(1, spec.levels + 1):
        rate /= 4.0
        kh, kw = (spec.gain_sizes[j - 1] if j - 1 < len(spec.gain_sizes)
                  else (1, 1))
        # 6 subbands, complex multiply = 4 real multiplies
        mixing += 6 * 4 * kh * kw * rate
    lowrate = 1.0 / (4.0 ** max(spec.levels - 1, 0))
    mixing += spec.lowpass_size ** 2 * lowrate
    mixing *= spec.out_channels  # per input pixel, i.e. per input channel
    conv_equivalent = spec.conv_kernel ** 2 * spec.out_channels
    return {
        "overhead_macs_per_pixel": float(overhead),
        "mixing_macs_per_pixel": float(mixing),
        "conv_equivalent_macs": float(conv_equivalent),
    }
