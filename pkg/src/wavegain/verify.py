"""Self-verification suites: perfect reconstruction, adjoint dot tests,
linearity, orientation selectivity, and finite-difference gradient checks.

These back both the test suite and the ``selftest`` / ``gradcheck`` CLI
subcommands.  Every check returns a measured number plus the threshold it
is held to, so failures name the property and the margin.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import ComplexPair, inner_product
from .filters import FilterSet, load_filter_set
from .gainlayer import (GainParams, build_dense_operator, gain_backward,
                        gain_forward, gain_init, identity_gains)
from .multirate import (filt_same, filt_same_sum, qshift_down, qshift_up)
from .transform import (Pyramid, dtcwt_forward, dtcwt_forward_adjoint,
                        dtcwt_inverse, dtcwt_inverse_adjoint)


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ""

    def to_dict(self):
        return asdict(self)


def _check(name, value, threshold, note="", larger_is_better=False):
    ok = value >= threshold if larger_is_better else value <= threshold
    return CheckResult(name=name, value=float(value),
                       threshold=float(threshold), passed=bool(ok), note=note)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _rand_pyramid_like(p: Pyramid, rng) -> Pyramid:
    return p.map(lambda a: rng.standard_normal(a.shape))


def _pyr_inner(a: Pyramid, b: Pyramid) -> float:
    return float(sum(inner_product(x, y)
                     for x, y in zip(a.planes(), b.planes(), strict=True)))


# ---------------------------------------------------------------------------
# Transform suites.
# ---------------------------------------------------------------------------

def perfect_reconstruction_check(trials: int = 100, seed: int = 0,
                                 filter_set: str = "near_sym_a",
                                 tol: float = 1e-9) -> CheckResult:
    rng = np.random.default_rng(seed)
    fs = load_filter_set(filter_set)
    worst = 0.0
    for t in range(trials):
        levels = 1 + t % 3
        x = rng.standard_normal((3, 32, 32))
        err = float(np.max(np.abs(dtcwt_inverse(dtcwt_forward(x, levels, fs),
                                                fs) - x)))
        worst = max(worst, err)
    return _check("perfect_reconstruction", worst, tol,
                  note=f"{trials} random 3x32x32 inputs, J in {{1,2,3}}")


def stage_pr_checks(seed: int = 0, filter_set: str = "near_sym_a",
                    tol: float = 1e-10) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    fs = load_filter_set(filter_set)
    x = rng.standard_normal(64)
    f1 = fs.level1
    s = 1.0 / np.sqrt(2.0)
    lo = filt_same(x, f1.h0 * s)
    hi = filt_same(x, f1.h1 * s)
    err1 = float(np.max(np.abs(
        filt_same_sum(lo, f1.g0 * s, hi, f1.g1 * s) - x)))
    q = fs.qshift
    wlo = qshift_down(x, q.h0a, q.h0b)
    whi = qshift_down(x, q.h1a, q.h1b)
    xr = qshift_up(wlo, q.h0a, q.h0b) + qshift_up(whi, q.h1a, q.h1b)
    err2 = float(np.max(np.abs(xr - x)))
    return [
        _check("stage_pr_level1", err1, tol, note="undecimated two-band"),
        _check("stage_pr_qshift", err2, tol, note="orthogonal dual-lane"),
    ]


def adjoint_dot_checks(trials: int = 100, seed: int = 0,
                       filter_set: str = "near_sym_a",
                       tol: float = 1e-11) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    fs = load_filter_set(filter_set)
    worst_f = 0.0
    worst_i = 0.0
    for t in range(trials):
        levels = 1 + t % 3
        x = rng.standard_normal((2, 32, 32))
        p = dtcwt_forward(x, levels, fs)
        pr = _rand_pyramid_like(p, rng)
        worst_f = max(worst_f, _rel(_pyr_inner(p, pr),
                                    inner_product(x, dtcwt_forward_adjoint(pr, fs))))
        y = dtcwt_inverse(pr, fs)
        yb = rng.standard_normal(y.shape)
        worst_i = max(worst_i, _rel(inner_product(y, yb),
                                    _pyr_inner(pr, dtcwt_inverse_adjoint(yb, levels, fs))))
    return [
        _check("adjoint_dot_forward", worst_f, tol,
               note=f"{trials} trials, J in {{1,2,3}}"),
        _check("adjoint_dot_inverse", worst_i, tol,
               note=f"{trials} trials, J in {{1,2,3}}"),
    ]


def linearity_check(seed: int = 0, filter_set: str = "near_sym_a",
                    tol: float = 1e-12) -> CheckResult:
    rng = np.random.default_rng(seed)
    fs = load_filter_set(filter_set)
    x1 = rng.standard_normal((1, 32, 32))
    x2 = rng.standard_normal((1, 32, 32))
    a, b = 1.7, -0.4
    p1 = dtcwt_forward(x1, 2, fs)
    p2 = dtcwt_forward(x2, 2, fs)
    p12 = dtcwt_forward(a * x1 + b * x2, 2, fs)
    worst = 0.0
    for pa, pb, pc in zip(p1.planes(), p2.planes(), p12.planes(),
                          strict=True):
        num = float(np.max(np.abs(a * pa + b * pb - pc)))
        den = max(float(np.max(np.abs(pc))), 1e-300)
        worst = max(worst, num / den)
    return _check("transform_linearity", worst, tol)


def orientation_check(filter_set: str = "near_sym_a",
                      min_share: float = 0.8) -> CheckResult:
    """A 45-degree sinusoid with radial frequency inside the second-scale
    ring concentrates in the scale-2 45-degree subband (share measured among
    the six scale-2 subbands)."""
    fs = load_filter_set(filter_set)
    n = 32
    hh, ww = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    k = 0.35 * np.pi    # radial 0.495*pi, inside the scale-2 ring
    x = np.cos(k * (hh + ww) + 0.4)[None]
    p = dtcwt_forward(x, 2, fs)
    band = p.highpass[1]
    energies = np.array([float(np.sum(band.re[..., i, :, :] ** 2
                                      + band.im[..., i, :, :] ** 2))
                         for i in range(6)])
    share = energies[1] / energies.sum()
    return _check("orientation_45deg_scale2", share, min_share,
                  larger_is_better=True,
                  note="share of scale-2 energy in the 45-degree band")


def transform_suite(seed: int = 0, trials: int = 100,
                    filter_set: str = "near_sym_a") -> list[CheckResult]:
    out = [perfect_reconstruction_check(trials, seed, filter_set)]
    out += stage_pr_checks(seed, filter_set)
    out += adjoint_dot_checks(trials, seed, filter_set)
    out.append(linearity_check(seed, filter_set))
    out.append(orientation_check(filter_set))
    return out


# ---------------------------------------------------------------------------
# Gain-layer suites.
# ---------------------------------------------------------------------------

def identity_reduction_check(seed: int = 0, filter_set: str = "near_sym_a",
                             tol: float = 1e-9) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for levels in (1, 2):
        p = identity_gains(3, levels, filter_set=filter_set)
        x = rng.standard_normal((2, 3, 32, 32))
        y, _ = gain_forward(x, p)
        worst = max(worst, float(np.max(np.abs(y - x))))
    return _check("identity_reduction", worst, tol,
                  note="unit diagonal gains + delta lowpass kernel")


def layer_adjoint_check(seed: int = 0, filter_set: str = "near_sym_a",
                        tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    p = gain_init(3, 2, 2, seed=seed + 1, scheme="unit-normal",
                  filter_set=filter_set)
    x = rng.standard_normal((2, 2, 16, 16))
    y, cache = gain_forward(x, p)
    dy = rng.standard_normal(y.shape)
    dx, _ = gain_backward(dy, cache, p)
    worst = _rel(float(np.sum(y * dy)), float(np.sum(x * dx)))
    return _check("layer_adjoint_consistency", worst, tol)


def dense_operator_check(seed: int = 0, filter_set: str = "near_sym_a",
                         tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    p = gain_init(3, 2, 1, seed=seed + 2, scheme="unit-normal",
                  filter_set=filter_set)
    h = w = 8
    a = build_dense_operator(p, h, w)
    x = rng.standard_normal((1, 2, h, w))
    y, cache = gain_forward(x, p)
    err_fwd = float(np.max(np.abs(a @ x.ravel() - y.ravel())))
    dy = rng.standard_normal((1, 3, h, w))
    dx, _ = gain_backward(dy, cache, p)
    err_adj = float(np.max(np.abs(a.T @ dy.ravel() - dx.ravel())))
    return _check("dense_operator_transpose", max(err_fwd, err_adj), tol,
                  note="layer-as-matrix vs forward/backward")


def gainlayer_suite(seed: int = 0,
                    filter_set: str = "near_sym_a") -> list[CheckResult]:
    return [
        identity_reduction_check(seed, filter_set),
        layer_adjoint_check(seed, filter_set),
        dense_operator_check(seed, filter_set),
    ]


# ---------------------------------------------------------------------------
# Finite-difference gradient checking.
# ---------------------------------------------------------------------------

def fd_check_arrays(loss, arrays, grads, eps: float = 1e-5,
                    sample: int | None = None, seed: int = 0) -> float:
    """Worst relative error between analytic gradients and central finite
    differences; rel err = |a - fd| / max(1, |a|, |fd|).

    ``loss()`` re-evaluates the scalar loss from the current (mutated)
    array contents; ``arrays``/``grads`` are parallel lists.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for arr, grad in zip(arrays, grads, strict=True):
        flat = arr.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        if sample is None or sample >= flat.size:
            idxs = range(flat.size)
        else:
            idxs = rng.choice(flat.size, size=sample, replace=False)
        for k in idxs:
            orig = flat[k]
            flat[k] = orig + eps
            lp = loss()
            flat[k] = orig - eps
            lm = loss()
            flat[k] = orig
            fd = (lp - lm) / (2.0 * eps)
            err = abs(fd - gflat[k]) / max(1.0, abs(fd), abs(gflat[k]))
            worst = max(worst, err)
    return worst


def gradcheck_wavegain(seed: int = 0, dtype=np.float64,
                       eps: float = 1e-5) -> float:
    """Analytic vs central finite differences for every parameter and input
    entry of a small gain layer (C=2, F=3, 8x8, J=1, 3x3 lowpass)."""
    rng = np.random.default_rng(seed)
    p = gain_init(3, 2, 1, lowpass_size=3, seed=seed + 1,
                  scheme="unit-normal")
    p = p.map(lambda a: a.astype(dtype))
    x = rng.standard_normal((2, 2, 8, 8)).astype(dtype)

    def loss():
        y, _ = gain_forward(x, p)
        return 0.5 * float(np.sum(y * y))

    y, cache = gain_forward(x, p)
    dx, g = gain_backward(y, cache, p)
    worst = fd_check_arrays(loss, p.planes(), g.planes(), eps)
    worst = max(worst, fd_check_arrays(loss, [x], [dx], eps))
    return worst


def gradcheck_conv2d(seed: int = 0, dtype=np.float64,
                     eps: float = 1e-6) -> float:
    from .nn import conv2d_backward, conv2d_forward
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 3, 6, 6)).astype(dtype)
    w = rng.standard_normal((4, 3, 3, 3)).astype(dtype)
    b = rng.standard_normal(4).astype(dtype)
    r = rng.standard_normal((2, 4, 6, 6)).astype(dtype)

    def loss():
        y, _ = conv2d_forward(x, w, b, pad=1)
        return float(np.sum(y * r))

    y, cache = conv2d_forward(x, w, b, pad=1)
    dx, dw, db = conv2d_backward(r, cache)
    return fd_check_arrays(loss, [x, w, b], [dx, dw, db], eps)


def gradcheck_suite(layer: str = "wavegain", precision: str = "float64",
                    seed: int = 0) -> list[CheckResult]:
    dtype = np.dtype(precision)
    # float32 arithmetic leaves far less headroom under the FD noise floor
    tol = 1e-6 if dtype == np.float64 else 1e-3
    eps = 1e-5 if dtype == np.float64 else 1e-2
    out = []
    if layer in ("wavegain", "all"):
        out.append(_check(f"gradcheck_wavegain_{precision}",
                          gradcheck_wavegain(seed, dtype, eps), tol))
    if layer in ("conv2d", "all"):
        out.append(_check(f"gradcheck_conv2d_{precision}",
                          gradcheck_conv2d(seed, dtype, max(eps, 1e-6)), tol))
    return out
