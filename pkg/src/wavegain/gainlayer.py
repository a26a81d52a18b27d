"""The wavelet gain layer: y = IDTCWT( G x DTCWT(x) ).

Activations go into the dual-tree wavelet domain, every oriented subband is
mixed across channels by a learnable complex gain (a 1x1 -- or kh x kw --
complex convolution over the subband grid), the real lowpass is mixed by a
small real kernel, and the result returns to the pixel domain.  The layer is
linear in its input, so the backward pass is the exact transpose: subband
gradients come from the transpose of the synthesis side, gain gradients are
correlations of those subband gradients with the cached analysis
coefficients, and the input gradient applies the conjugated,
channel-transposed gains followed by the transpose of the analysis side.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (ComplexPair, ConfigError, DimensionError, VerificationError,
                   load_json, load_tensor, save_json, save_tensor)
from .filters import FilterSet, load_filter_set
from .transform import (Pyramid, dtcwt_forward, dtcwt_forward_adjoint,
                        dtcwt_inverse, dtcwt_inverse_adjoint, padded_size,
                        sym_pad_2d, sym_pad_2d_adjoint, zeros_like_pyramid)

INIT_SCHEMES = ("zeros", "unit-normal", "glorot")


@dataclass
class GainParams:
    """Learnable weights: complex subband gains per scale + real lowpass gain.

    ``g_hp[j-1]`` has planes of shape (F, C, 6, kh_j, kw_j); ``g_lp`` is
    (F, C, klp, klp) and purely real.
    """

    g_hp: list[ComplexPair]
    g_lp: np.ndarray
    levels: int
    filter_set: str = "near_sym_a"

    @property
    def out_channels(self) -> int:
        return self.g_lp.shape[0]

    @property
    def in_channels(self) -> int:
        return self.g_lp.shape[1]

    def count_scalars(self) -> int:
        n = self.g_lp.size
        for g in self.g_hp:
            n += g.re.size + g.im.size
        return n

    def planes(self) -> list[np.ndarray]:
        """Parameter planes in a fixed order (optimizer state mirrors it)."""
        out = []
        for g in self.g_hp:
            out.extend((g.re, g.im))
        out.append(self.g_lp)
        return out

    def replace_planes(self, planes) -> "GainParams":
        planes = list(planes)
        g_hp = []
        for j in range(self.levels):
            g_hp.append(ComplexPair(planes[2 * j], planes[2 * j + 1]))
        return GainParams(g_hp=g_hp, g_lp=planes[-1], levels=self.levels,
                          filter_set=self.filter_set)

    def map(self, fn) -> "GainParams":
        return self.replace_planes(fn(p) for p in self.planes())


def gain_init(out_channels: int, in_channels: int, levels: int,
              lowpass_size: int = 3, seed: int = 0, scheme: str = "glorot",
              spatial_sizes=None, filter_set: str = "near_sym_a") -> GainParams:
    """Draw gain parameters; reproducible from the seed.

    ``scheme``: ``zeros``; ``unit-normal`` (every real component N(0,1));
    ``glorot`` (variance 2/((C+F)*fan) per real component, fan = 6*kh*kw for
    subband gains and klp^2 for the lowpass, so the layer output variance at
    init is comparable to an equivalently shaped convolution).
    """
    if out_channels < 1 or in_channels < 1:
        raise ConfigError("channel counts must be >= 1")
    if scheme not in INIT_SCHEMES:
        raise ConfigError(f"unknown init scheme {scheme!r}; use {INIT_SCHEMES}")
    if spatial_sizes is None:
        spatial_sizes = [(1, 1)] * levels
    if len(spatial_sizes) != levels:
        raise ConfigError("spatial_sizes must give (kh, kw) per scale")
    rng = np.random.default_rng(seed)
    g_hp = []
    for kh, kw in spatial_sizes:
        if kh % 2 == 0 or kw % 2 == 0:
            raise ConfigError("subband gain sizes must be odd (zero-phase)")
        shape = (out_channels, in_channels, 6, kh, kw)
        if scheme == "zeros":
            re = np.zeros(shape)
            im = np.zeros(shape)
        else:
            std = 1.0 if scheme == "unit-normal" else np.sqrt(
                2.0 / ((in_channels + out_channels) * 6 * kh * kw))
            re = std * rng.standard_normal(shape)
            im = std * rng.standard_normal(shape)
        g_hp.append(ComplexPair(re, im))
    lshape = (out_channels, in_channels, lowpass_size, lowpass_size)
    if scheme == "zeros":
        g_lp = np.zeros(lshape)
    else:
        std = 1.0 if scheme == "unit-normal" else np.sqrt(
            2.0 / ((in_channels + out_channels) * lowpass_size ** 2))
        g_lp = std * rng.standard_normal(lshape)
    return GainParams(g_hp=g_hp, g_lp=g_lp, levels=levels,
                      filter_set=filter_set)


def identity_gains(channels: int, levels: int, lowpass_size: int = 3,
                   filter_set: str = "near_sym_a") -> GainParams:
    """Unit gains on the channel diagonal + centered-delta lowpass kernel:
    the configuration under which the layer reduces to the identity."""
    p = gain_init(channels, channels, levels, lowpass_size, scheme="zeros",
                  filter_set=filter_set)
    eye = np.eye(channels)
    for g in p.g_hp:
        g.re[..., 0, 0] = eye[:, :, None]
    c = lowpass_size // 2
    p.g_lp[..., c, c] = eye
    return p


@dataclass
class GainLayerCache:
    """Saved analysis coefficients from the forward pass plus the padding
    bookkeeping needed to transpose it."""

    coeffs: Pyramid
    input_shape: tuple[int, int]
    padded_shape: tuple[int, int]


def _shifted(x: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """out[..., y, x] = x[..., y+dy, x+dx], zero outside."""
    if dy == 0 and dx == 0:
        return x
    h, w = x.shape[-2:]
    out = np.zeros_like(x)
    ys = slice(max(dy, 0), h + min(dy, 0))
    yd = slice(max(-dy, 0), h + min(-dy, 0))
    xs = slice(max(dx, 0), w + min(dx, 0))
    xd = slice(max(-dx, 0), w + min(-dx, 0))
    out[..., yd, xd] = x[..., ys, xs]
    return out


def _channel_mix(mat: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(F,C,6) x (N,C,6,h,w) -> (N,F,6,h,w) as batched matmuls over the
    subband axis (BLAS path; faster than the equivalent einsum)."""
    xm = x.transpose(2, 0, 3, 4, 1)                 # (s, n, h, w, c)
    z = np.matmul(xm, mat.transpose(2, 1, 0)[:, None, None].astype(x.dtype))
    return z.transpose(1, 4, 0, 2, 3)               # (n, f, s, h, w)


def _channel_mix_accum(dw: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(N,F,6,h,w) x (N,C,6,h,w) -> (F,C,6) contraction over batch and
    space (the gain-gradient kernel)."""
    s = dw.shape[2]
    a = dw.transpose(2, 1, 0, 3, 4).reshape(s, dw.shape[1], -1)
    b = v.transpose(2, 0, 3, 4, 1).reshape(s, -1, v.shape[1])
    return np.matmul(a, b).transpose(1, 2, 0)       # (f, c, s)


def _hp_apply(g: ComplexPair, v: ComplexPair) -> ComplexPair:
    """Complex channel mixing of one scale: (N,C,6,h,w) -> (N,F,6,h,w)."""
    kh, kw = g.re.shape[-2:]
    wr = None
    wi = None
    for u in range(kh):
        for t in range(kw):
            vs = v if (kh, kw) == (1, 1) else ComplexPair(
                _shifted(v.re, u - kh // 2, t - kw // 2),
                _shifted(v.im, u - kh // 2, t - kw // 2))
            gr = g.re[..., u, t]
            gi = g.im[..., u, t]
            re = _channel_mix(gr, vs.re) - _channel_mix(gi, vs.im)
            im = _channel_mix(gr, vs.im) + _channel_mix(gi, vs.re)
            wr = re if wr is None else wr + re
            wi = im if wi is None else wi + im
    return ComplexPair(wr, wi)


def _hp_input_grad(g: ComplexPair, dw: ComplexPair) -> ComplexPair:
    """Transpose of :func:`_hp_apply` in the input: conjugate gains,
    channels transposed, taps flipped."""
    kh, kw = g.re.shape[-2:]
    dr = None
    di = None
    for u in range(kh):
        for t in range(kw):
            ds = dw if (kh, kw) == (1, 1) else ComplexPair(
                _shifted(dw.re, -(u - kh // 2), -(t - kw // 2)),
                _shifted(dw.im, -(u - kh // 2), -(t - kw // 2)))
            grt = g.re[..., u, t].transpose(1, 0, 2)    # (c, f, s)
            git = g.im[..., u, t].transpose(1, 0, 2)
            re = _channel_mix(grt, ds.re) + _channel_mix(git, ds.im)
            im = _channel_mix(grt, ds.im) - _channel_mix(git, ds.re)
            dr = re if dr is None else dr + re
            di = im if di is None else di + im
    return ComplexPair(dr, di)


def _hp_gain_grad(dw: ComplexPair, v: ComplexPair, kh: int, kw: int) -> ComplexPair:
    """Gain gradient of one scale: correlate the subband gradient with the
    conjugated saved coefficients over the gain support, summed over batch."""
    gr = np.zeros(dw.re.shape[1:2] + v.re.shape[1:3] + (kh, kw))
    gi = np.zeros_like(gr)
    for u in range(kh):
        for t in range(kw):
            vs = v if (kh, kw) == (1, 1) else ComplexPair(
                _shifted(v.re, u - kh // 2, t - kw // 2),
                _shifted(v.im, u - kh // 2, t - kw // 2))
            gr[..., u, t] = (_channel_mix_accum(dw.re, vs.re)
                             + _channel_mix_accum(dw.im, vs.im))
            gi[..., u, t] = (_channel_mix_accum(dw.im, vs.re)
                             - _channel_mix_accum(dw.re, vs.im))
    return ComplexPair(gr, gi)


def _lp_windows(v: np.ndarray, kh: int, kw: int) -> np.ndarray:
    from numpy.lib.stride_tricks import sliding_window_view
    vp = np.pad(v, ((0, 0), (0, 0), (kh // 2, kh // 2), (kw // 2, kw // 2)))
    return sliding_window_view(vp, (kh, kw), axis=(2, 3))


def _lp_apply(g: np.ndarray, v: np.ndarray) -> np.ndarray:
    kh, kw = g.shape[-2:]
    if (kh, kw) == (1, 1):
        return np.einsum("fc,nchw->nfhw", g[..., 0, 0].astype(v.dtype), v)
    win = _lp_windows(v, kh, kw)
    return np.einsum("nchwkl,fckl->nfhw", win, g.astype(v.dtype),
                     optimize=True)


def _lp_input_grad(g: np.ndarray, dw: np.ndarray) -> np.ndarray:
    kh, kw = g.shape[-2:]
    if (kh, kw) == (1, 1):
        return np.einsum("fc,nfhw->nchw", g[..., 0, 0].astype(dw.dtype), dw)
    win = _lp_windows(dw, kh, kw)
    gf = g[:, :, ::-1, ::-1].astype(dw.dtype)
    return np.einsum("nfhwkl,fckl->nchw", win, gf, optimize=True)


def _lp_gain_grad(dw: np.ndarray, v: np.ndarray, kh: int, kw: int) -> np.ndarray:
    if (kh, kw) == (1, 1):
        return np.einsum("nfhw,nchw->fc", dw, v)[..., None, None]
    win = _lp_windows(v, kh, kw)
    return np.einsum("nchwkl,nfhw->fckl", win, dw, optimize=True)


def _check_input(x: np.ndarray, p: GainParams) -> None:
    if x.ndim != 4:
        raise DimensionError("expected input of shape (N, C, H, W)")
    if x.shape[1] != p.in_channels:
        raise DimensionError(
            f"input has {x.shape[1]} channels, gains expect {p.in_channels}")


def gain_forward(x: np.ndarray, p: GainParams,
                 fs: FilterSet | str | None = None
                 ) -> tuple[np.ndarray, GainLayerCache]:
    """Apply the layer to a (N, C, H, W) batch; returns (y, cache) with y of
    shape (N, F, H, W).  Inputs whose extents are not divisible by 2^J are
    padded by symmetric reflection and cropped after the inverse."""
    _check_input(x, p)
    if fs is None:
        fs = p.filter_set
    if isinstance(fs, str):
        fs = load_filter_set(fs)
    n, c, h, w = x.shape
    hp, wp = padded_size(h, p.levels), padded_size(w, p.levels)
    xp = sym_pad_2d(x, hp - h, wp - w)
    v = dtcwt_forward(xp, p.levels, fs)
    mixed = Pyramid(
        lowpass=_lp_apply(p.g_lp, v.lowpass),
        highpass=[_hp_apply(g, band)
                  for g, band in zip(p.g_hp, v.highpass, strict=True)],
        levels=p.levels, source_shape=(hp, wp), filter_set=fs.name)
    y = dtcwt_inverse(mixed, fs)[..., :h, :w]
    return y, GainLayerCache(coeffs=v, input_shape=(h, w),
                             padded_shape=(hp, wp))


def gain_backward(dy: np.ndarray, cache: GainLayerCache, p: GainParams,
                  fs: FilterSet | str | None = None
                  ) -> tuple[np.ndarray, GainParams]:
    """Backward pass: returns (dx, gain gradients summed over the batch)."""
    if fs is None:
        fs = p.filter_set
    if isinstance(fs, str):
        fs = load_filter_set(fs)
    h, w = cache.input_shape
    hp, wp = cache.padded_shape
    if dy.shape[-2:] != (h, w):
        raise DimensionError(
            f"dy extent {dy.shape[-2:]} does not match forward {h, w}")
    if dy.shape[1] != p.out_channels:
        raise DimensionError("dy channel count does not match the gains")
    if dy.shape[0] != cache.coeffs.lowpass.shape[0]:
        raise DimensionError("dy batch size does not match the cache")
    dyp = np.zeros(dy.shape[:-2] + (hp, wp), dtype=dy.dtype)
    dyp[..., :h, :w] = dy
    dmixed = dtcwt_inverse_adjoint(dyp, p.levels, fs)
    v = cache.coeffs
    grads = GainParams(
        g_hp=[_hp_gain_grad(dwb, vb, *g.re.shape[-2:])
              for dwb, vb, g in zip(dmixed.highpass, v.highpass, p.g_hp,
                                    strict=True)],
        g_lp=_lp_gain_grad(dmixed.lowpass, v.lowpass, *p.g_lp.shape[-2:]),
        levels=p.levels, filter_set=p.filter_set)
    dv = Pyramid(
        lowpass=_lp_input_grad(p.g_lp, dmixed.lowpass),
        highpass=[_hp_input_grad(g, dwb)
                  for g, dwb in zip(p.g_hp, dmixed.highpass, strict=True)],
        levels=p.levels, source_shape=(hp, wp), filter_set=fs.name)
    dxp = dtcwt_forward_adjoint(dv, fs)
    dx = sym_pad_2d_adjoint(dxp, hp - h, wp - w)
    return dx, grads


# ---------------------------------------------------------------------------
# Oracles and instruments.
# ---------------------------------------------------------------------------

def build_dense_operator(p: GainParams, h: int, w: int,
                         fs: FilterSet | str | None = None) -> np.ndarray:
    """Materialize the layer as a (F*h*w) x (C*h*w) matrix by pushing basis
    vectors through the forward pass.  Guarded to small extents."""
    if h * w > 16 * 16:
        raise ConfigError(f"dense operator guard: {h}x{w} exceeds 16x16")
    c = p.in_channels
    f = p.out_channels
    a = np.zeros((f * h * w, c * h * w))
    for k in range(c * h * w):
        e = np.zeros((1, c, h, w))
        e.reshape(-1)[k] = 1.0
        y, _ = gain_forward(e, p, fs)
        a[:, k] = y.reshape(-1)
    return a


def impulse_response(p: GainParams, size: int,
                     fs: FilterSet | str | None = None) -> np.ndarray:
    """Layer response to centered unit impulses, one per (f, c) pair;
    returns (F, C, size, size).  ``size`` must be odd and should cover the
    layer's effective support."""
    if size % 2 == 0:
        raise ConfigError("impulse grid size must be odd")
    c = p.in_channels
    x = np.zeros((c, c, size, size))
    mid = size // 2
    for ch in range(c):
        x[ch, ch, mid, mid] = 1.0
    y, _ = gain_forward(x, p, fs)
    return np.transpose(y, (1, 0, 2, 3))


def scale_atoms(scale: int, size: int = 33, levels: int = 2,
                filter_set: str = "near_sym_a") -> np.ndarray:
    """The 12 single-gain unit responses of one scale (6 subbands x re/im),
    flattened; every single-channel gain configuration of that scale is a
    linear combination of these rows."""
    fs = load_filter_set(filter_set)
    pad = padded_size(size, levels)
    x = np.zeros((1, pad, pad))
    mid = size // 2
    x[0, mid, mid] = 1.0
    pyr = dtcwt_forward(x, levels, fs)
    atoms = []
    src = pyr.highpass[scale - 1]
    for band in range(6):
        for part in ("re", "im"):
            pz = zeros_like_pyramid(pyr)
            dst = pz.highpass[scale - 1]
            if part == "re":    # gain 1: w = v
                dst.re[..., band, :, :] = src.re[..., band, :, :]
                dst.im[..., band, :, :] = src.im[..., band, :, :]
            else:               # gain j: w = j v
                dst.re[..., band, :, :] = -src.im[..., band, :, :]
                dst.im[..., band, :, :] = src.re[..., band, :, :]
            atoms.append(dtcwt_inverse(pz, fs)[0, :size, :size].ravel())
    return np.array(atoms)


def spectral_ring_fractions(shapes: np.ndarray, size: int,
                            nfft: int = 256) -> np.ndarray:
    """Fraction of FFT energy inside the max-norm ring pi/4 < |w| <= pi/2
    for each shape (rows of ``shapes``, each a flattened size x size grid)."""
    om = 2.0 * np.pi * np.fft.fftfreq(nfft)
    w1, w2 = np.meshgrid(om, om, indexing="ij")
    mx = np.maximum(np.abs(w1), np.abs(w2))
    ring = (mx > np.pi / 4) & (mx <= np.pi / 2)
    grids = shapes.reshape(-1, size, size)
    spec = np.abs(np.fft.fft2(grids, s=(nfft, nfft))) ** 2
    return spec[:, ring].sum(axis=1) / spec.sum(axis=(1, 2))


def random_scale2_shapes(num_shapes: int, seed: int, size: int = 33,
                         levels: int = 2,
                         filter_set: str = "near_sym_a") -> np.ndarray:
    """Impulse responses with unit-normal complex scale-2 gains and all
    other gains zero (single channel), the illustrative configuration with
    12 random scalars per shape."""
    atoms = scale_atoms(2, size=size, levels=levels, filter_set=filter_set)
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((num_shapes, atoms.shape[0]))
    return coeffs @ atoms, coeffs


def dof_from_correlations(shapes: np.ndarray) -> tuple[float, np.ndarray]:
    """Moment-fit degrees of freedom: pairwise normalized cross-correlations
    of the shapes distribute like inner products of d-dimensional random
    unit vectors with d ~ 1/var(rho)."""
    num = shapes.shape[0]
    if num < 2:
        raise ConfigError("need at least two shapes")
    norms = np.linalg.norm(shapes, axis=1)
    if np.any(norms == 0.0):
        raise VerificationError("degenerate all-zero shape")
    unit = shapes / norms[:, None]
    rho = (unit @ unit.T)[np.triu_indices(num, k=1)]
    var = float(np.var(rho))
    if var < 1e-12:
        raise VerificationError(
            "correlations are degenerate (all shapes effectively identical)")
    return 1.0 / var, rho


def corr_dof(num_shapes: int = 512, seed: int = 0, size: int = 33,
             levels: int = 2, filter_set: str = "near_sym_a") -> float:
    """Estimated correlation degrees of freedom of the random scale-2
    shape family."""
    shapes, _ = random_scale2_shapes(num_shapes, seed, size, levels,
                                     filter_set)
    dof, _ = dof_from_correlations(shapes)
    return dof


def corr_dof_reference(dim: int, num_vectors: int = 512, seed: int = 0) -> float:
    """Estimator self-test on synthetic white Gaussian vectors of known
    dimension; should return ~dim."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((num_vectors, dim))
    dof, _ = dof_from_correlations(v)
    return dof


# ---------------------------------------------------------------------------
# Serialization: NPY plane pairs per scale plus a JSON manifest.
# ---------------------------------------------------------------------------

def save_gains(dirpath, p: GainParams, extra: dict | None = None) -> None:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    for j, g in enumerate(p.g_hp, start=1):
        save_tensor(d / f"gain{j}.re.npy", g.re)
        save_tensor(d / f"gain{j}.im.npy", g.im)
    save_tensor(d / "gain_lp.npy", p.g_lp)
    man = {
        "kind": "wavegain-params",
        "out_channels": p.out_channels,
        "in_channels": p.in_channels,
        "levels": p.levels,
        "lowpass_size": p.g_lp.shape[-1],
        "spatial_sizes": [list(g.re.shape[-2:]) for g in p.g_hp],
        "filter_set": p.filter_set,
    }
    if extra:
        man.update(extra)
    save_json(d / "manifest.json", man)


def load_gains(dirpath) -> GainParams:
    d = Path(dirpath)
    man = load_json(d / "manifest.json")
    g_hp = [ComplexPair(load_tensor(d / f"gain{j}.re.npy"),
                        load_tensor(d / f"gain{j}.im.npy"))
            for j in range(1, man["levels"] + 1)]
    return GainParams(g_hp=g_hp, g_lp=load_tensor(d / "gain_lp.npy"),
                      levels=man["levels"], filter_set=man["filter_set"])
