"""1-D multirate filter primitives with exact adjoints.

Every operation here is a linear map built from three ingredients whose
transposes are known exactly:

* symmetric extension with repeated end samples (a gather; its adjoint is
  fold-back accumulation onto the core samples),
* tap-weighted strided slices of the extended array (convolution; its
  adjoint scatters through the same slices),
* lane interleaving (a permutation).

The decimating/interpolating pair used on levels >= 2 of the dual-tree
transform operates on a *composite* signal that interleaves the two trees on
even/odd lanes.  Extending the composite symmetrically feeds each tree's
boundary with the other tree's reflected samples; because the tree-b filters
are the time reverse of the tree-a filters, one analysis stage is an exactly
orthogonal map, and the synthesis stage is implemented as its literal
transpose (which is also its inverse).

Operations act along ``axis`` of an arbitrary N-d array and are vectorized
over all other axes.
"""

from __future__ import annotations

import numpy as np

from .core import DimensionError


def reflect_index(p, n: int) -> np.ndarray:
    """Map integer positions onto [0, n) by reflection about -0.5 and n-0.5.

    This is the 'repeated edge sample' symmetric extension: position -1 maps
    to 0, -2 to 1, n to n-1, and so on, bouncing as often as needed.
    """
    p = np.asarray(p)
    period = 2 * n
    mod = np.mod(p, period)
    return np.where(mod >= n, period - 1 - mod, mod)


def _to_last(x: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(x, axis, -1)


def _from_last(x: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(x, -1, axis)


def sym_extend(x: np.ndarray, pre: int, post: int) -> np.ndarray:
    """Extend the last axis by reflection with repeated end samples."""
    n = x.shape[-1]
    idx = reflect_index(np.arange(-pre, n + post), n)
    return x[..., idx]


def sym_extend_adjoint(z: np.ndarray, pre: int, post: int, n: int) -> np.ndarray:
    """Fold an extended array back onto its core: exact transpose of
    :func:`sym_extend`, accumulating every extension sample onto the core
    position it was read from."""
    out = z[..., pre:pre + n].copy()
    if pre:
        tgt = reflect_index(np.arange(-pre, 0), n)
        for i, t in enumerate(tgt):
            out[..., t] += z[..., i]
    if post:
        tgt = reflect_index(np.arange(n, n + post), n)
        for i, t in enumerate(tgt):
            out[..., t] += z[..., pre + n + i]
    return out


# ---------------------------------------------------------------------------
# Same-size filtering with odd-length kernels (level 1 of the transform).
# ---------------------------------------------------------------------------

def filt_same(x: np.ndarray, h: np.ndarray, axis: int = -1) -> np.ndarray:
    """Zero-delay convolution along ``axis`` with an odd-length kernel,
    symmetric extension, output the same size as the input."""
    x = _to_last(x, axis)
    h = np.asarray(h, dtype=x.dtype)
    m = h.size
    if m % 2 == 0:
        raise DimensionError("filt_same expects an odd-length kernel")
    e = (m - 1) // 2
    n = x.shape[-1]
    xe = sym_extend(x, e, e)
    y = np.zeros(x.shape, dtype=np.result_type(x, h))
    for k in range(m):
        s = m - 1 - k
        y += h[k] * xe[..., s:s + n]
    return _from_last(y, axis)


def filt_same_adjoint(g: np.ndarray, h: np.ndarray, axis: int = -1) -> np.ndarray:
    """Exact transpose of :func:`filt_same` (same kernel, not reversed:
    the boundary fold-back is what differs from plain correlation)."""
    g = _to_last(g, axis)
    h = np.asarray(h, dtype=g.dtype)
    m = h.size
    e = (m - 1) // 2
    n = g.shape[-1]
    z = np.zeros(g.shape[:-1] + (n + 2 * e,), dtype=np.result_type(g, h))
    for k in range(m):
        s = m - 1 - k
        z[..., s:s + n] += h[k] * g
    return _from_last(sym_extend_adjoint(z, e, e, n), axis)


def filt_same_pair(x: np.ndarray, ha: np.ndarray, hb: np.ndarray,
                   axis: int = -1):
    """Two :func:`filt_same` filterings of the same input, sharing one
    symmetric extension (the level-1 analysis hot path)."""
    x = _to_last(x, axis)
    ha = np.asarray(ha, dtype=x.dtype)
    hb = np.asarray(hb, dtype=x.dtype)
    e = max((ha.size - 1) // 2, (hb.size - 1) // 2)
    n = x.shape[-1]
    xe = sym_extend(x, e, e)
    outs = []
    for h in (ha, hb):
        m = h.size
        base = e + (m - 1) // 2
        y = np.zeros(x.shape, dtype=x.dtype)
        for k in range(m):
            s = base - k
            y += h[k] * xe[..., s:s + n]
        outs.append(_from_last(y, axis))
    return outs[0], outs[1]


def filt_same_sum(a: np.ndarray, ha: np.ndarray, b: np.ndarray,
                  hb: np.ndarray, axis: int = -1) -> np.ndarray:
    """filt_same(a, ha) + filt_same(b, hb) accumulated into one buffer
    (the level-1 synthesis hot path)."""
    a = _to_last(a, axis)
    b = _to_last(b, axis)
    n = a.shape[-1]
    y = np.zeros(a.shape, dtype=a.dtype)
    for x, h in ((a, ha), (b, hb)):
        h = np.asarray(h, dtype=x.dtype)
        m = h.size
        e = (m - 1) // 2
        xe = sym_extend(x, e, e)
        for k in range(m):
            s = m - 1 - k
            y += h[k] * xe[..., s:s + n]
    return _from_last(y, axis)


def filt_same_sum_adjoint(g: np.ndarray, ha: np.ndarray, hb: np.ndarray,
                          axis: int = -1):
    """Transpose of :func:`filt_same_sum` with respect to its two inputs."""
    return (filt_same_adjoint(g, ha, axis), filt_same_adjoint(g, hb, axis))


def filt_same_adjoint_sum(a: np.ndarray, ha: np.ndarray, b: np.ndarray,
                          hb: np.ndarray, axis: int = -1) -> np.ndarray:
    """filt_same_adjoint(a, ha) + filt_same_adjoint(b, hb), fused fold."""
    a = _to_last(a, axis)
    b = _to_last(b, axis)
    n = a.shape[-1]
    e = max((ha.size - 1) // 2, (hb.size - 1) // 2)
    z = np.zeros(a.shape[:-1] + (n + 2 * e,), dtype=a.dtype)
    for g, h in ((a, ha), (b, hb)):
        h = np.asarray(h, dtype=g.dtype)
        m = h.size
        base = e + (m - 1) // 2
        for k in range(m):
            s = base - k
            z[..., s:s + n] += h[k] * g
    return _from_last(sym_extend_adjoint(z, e, e, n), axis)


# ---------------------------------------------------------------------------
# Composite (dual-lane) decimating stage for levels >= 2.
# ---------------------------------------------------------------------------

def _lane_order(h_even, h_odd):
    # The highpass composite swaps which lane's output sits on even slots;
    # the sign of <h_even, h_odd> distinguishes the two cases.
    return 0 if float(np.dot(h_even, h_odd)) >= 0.0 else 1


def qshift_down(v: np.ndarray, h_even: np.ndarray, h_odd: np.ndarray,
                axis: int = -1) -> np.ndarray:
    """One decimating analysis stage on a two-lane composite signal.

    ``h_even`` filters the tree living on even lanes of ``v``, ``h_odd`` the
    odd-lane tree; both trees decimate by two at their own rate, so the
    output composite has half the input extent.
    """
    v = _to_last(v, axis)
    h_even = np.asarray(h_even, dtype=v.dtype)
    h_odd = np.asarray(h_odd, dtype=v.dtype)
    m = h_even.size
    r = v.shape[-1]
    if r % 4:
        raise DimensionError(f"composite extent {r} must be a multiple of 4")
    ve = sym_extend(v, m, m)
    q = r // 4
    dtype = np.result_type(v, h_even)
    ye = np.zeros(v.shape[:-1] + (q,), dtype=dtype)
    yo = np.zeros_like(ye)
    for k in range(m):
        se = 2 * m - 2 * k
        ye += h_even[k] * ve[..., se:se + 4 * q:4]
        yo += h_odd[k] * ve[..., se + 1:se + 1 + 4 * q:4]
    w = np.zeros(v.shape[:-1] + (r // 2,), dtype=dtype)
    lane = _lane_order(h_even, h_odd)
    w[..., lane::2] = ye
    w[..., 1 - lane::2] = yo
    return _from_last(w, axis)


def qshift_up(w: np.ndarray, h_even: np.ndarray, h_odd: np.ndarray,
              axis: int = -1) -> np.ndarray:
    """Interpolating synthesis stage: the exact transpose of
    :func:`qshift_down` with the same filters.

    Because each tree's filters are orthonormal and the composite extension
    is shared between trees, the analysis stage is an orthogonal map; its
    transpose is therefore also the perfect-reconstruction synthesis stage
    (equivalently: synthesis filters are the time-reversed analysis filters
    with the trees swapped).
    """
    w = _to_last(w, axis)
    h_even = np.asarray(h_even, dtype=w.dtype)
    h_odd = np.asarray(h_odd, dtype=w.dtype)
    m = h_even.size
    q2 = w.shape[-1]
    if q2 % 2:
        raise DimensionError(f"composite extent {q2} must be even")
    q = q2 // 2
    r = 2 * q2
    lane = _lane_order(h_even, h_odd)
    ye = w[..., lane::2]
    yo = w[..., 1 - lane::2]
    z = np.zeros(w.shape[:-1] + (r + 2 * m,), dtype=np.result_type(w, h_even))
    for k in range(m):
        se = 2 * m - 2 * k
        z[..., se:se + 4 * q:4] += h_even[k] * ye
        z[..., se + 1:se + 1 + 4 * q:4] += h_odd[k] * yo
    return _from_last(sym_extend_adjoint(z, m, m, r), axis)


# qshift_down and qshift_up are mutual transposes, so each also serves as
# the adjoint of the other.
qshift_down_adjoint = qshift_up
qshift_up_adjoint = qshift_down


# ---------------------------------------------------------------------------
# Public single-signal primitives: symmetric-extend -> convolve -> keep one
# phase (and the exact duals/adjoints).
# ---------------------------------------------------------------------------

def filter_decimate(x: np.ndarray, h: np.ndarray, axis: int = -1,
                    tree_offset: int = 0) -> np.ndarray:
    """y[n] = sum_k h[k] * xe(2n + tree_offset - k) with symmetric extension.

    Output extent is half the input extent; ``tree_offset`` selects the
    sampling phase.
    """
    x = _to_last(x, axis)
    h = np.asarray(h, dtype=x.dtype)
    m = h.size
    n = x.shape[-1]
    if n % 2:
        raise DimensionError(f"extent {n} along axis must be even")
    off = int(tree_offset)
    xe = sym_extend(x, m, m + 1)
    out = np.zeros(x.shape[:-1] + (n // 2,), dtype=np.result_type(x, h))
    for k in range(m):
        s = m + off - k
        out += h[k] * xe[..., s:s + n:2]
    return _from_last(out, axis)


def filter_decimate_adjoint(g: np.ndarray, h: np.ndarray, axis: int = -1,
                            tree_offset: int = 0) -> np.ndarray:
    """Exact linear-algebra transpose of :func:`filter_decimate`, including
    the fold-back accumulation that transposes the symmetric extension."""
    g = _to_last(g, axis)
    h = np.asarray(h, dtype=g.dtype)
    m = h.size
    n = 2 * g.shape[-1]
    off = int(tree_offset)
    z = np.zeros(g.shape[:-1] + (n + 2 * m + 1,), dtype=np.result_type(g, h))
    for k in range(m):
        s = m + off - k
        z[..., s:s + n:2] += h[k] * g
    return _from_last(sym_extend_adjoint(z, m, m + 1, n), axis)


def upsample_filter(x: np.ndarray, h: np.ndarray, axis: int = -1,
                    tree_offset: int = 0) -> np.ndarray:
    """Dual of :func:`filter_decimate`: zero-interleave at phase
    ``tree_offset`` (coefficients symmetrically extended) and convolve.

    y[t] = sum_j h[t - 2j - tree_offset] * xe(j), output extent 2x input.
    """
    x = _to_last(x, axis)
    h = np.asarray(h, dtype=x.dtype)
    m = h.size
    n = x.shape[-1]
    off = int(tree_offset)
    e = m  # coefficient-domain extension, generous for any offset
    xe = sym_extend(x, e, e)
    y = np.zeros(x.shape[:-1] + (2 * n,), dtype=np.result_type(x, h))
    # z[2p + off] = xe[p + e] on a grid t in [-2e, 2n + 2e); gather slices.
    for k in range(m):
        # contributions h[k] * z[t - k]: nonzero when t - k = 2p + off
        t0 = k + off - 2 * e
        # first output index >= 0 with matching parity
        start = t0 % 2
        p_first = (start - t0) // 2
        y[..., start::2] += h[k] * xe[..., p_first:p_first + (2 * n - start + 1) // 2]
    return _from_last(y, axis)


def upsample_filter_adjoint(g: np.ndarray, h: np.ndarray, axis: int = -1,
                            tree_offset: int = 0) -> np.ndarray:
    """Exact transpose of :func:`upsample_filter`."""
    g = _to_last(g, axis)
    h = np.asarray(h, dtype=g.dtype)
    m = h.size
    n2 = g.shape[-1]
    if n2 % 2:
        raise DimensionError(f"extent {n2} along axis must be even")
    n = n2 // 2
    off = int(tree_offset)
    e = m
    z = np.zeros(g.shape[:-1] + (n + 2 * e,), dtype=np.result_type(g, h))
    for k in range(m):
        t0 = k + off - 2 * e
        start = t0 % 2
        p_first = (start - t0) // 2
        z[..., p_first:p_first + (n2 - start + 1) // 2] += h[k] * g[..., start::2]
    return _from_last(sym_extend_adjoint(z, e, e, n), axis)
