"""Dev scratch: validate PR / orthogonality / orientation before freezing."""
import sys
sys.path.insert(0, "src")
import numpy as np

from wavegain.filters import load_filter_set
from wavegain.multirate import qshift_down, qshift_up, filt_same, filt_same_adjoint
from wavegain.transform import (dtcwt_forward, dtcwt_inverse,
                                dtcwt_forward_adjoint, dtcwt_inverse_adjoint,
                                Pyramid, zeros_like_pyramid)
from wavegain.core import pyramid_inner, inner_product

rng = np.random.default_rng(0)
fs = load_filter_set("near_sym_a")
q = fs.qshift

print("== composite q-shift stage orthogonality (1-D dense) ==")
r = 16
A = np.zeros((2 * (r // 2), r))
for t in range(r):
    e = np.zeros(r); e[t] = 1.0
    lo = qshift_down(e, q.h0a, q.h0b)
    hi = qshift_down(e, q.h1a, q.h1b)
    A[:, t] = np.concatenate([lo, hi])
print("A^T A - I:", np.max(np.abs(A.T @ A - np.eye(r))))
print("A A^T - I:", np.max(np.abs(A @ A.T - np.eye(r))))

# synthesis == transpose check
g = rng.standard_normal(2 * (r // 2))
v1 = qshift_up(g[:r // 2], q.h0a, q.h0b) + qshift_up(g[r // 2:], q.h1a, q.h1b)
v2 = A.T @ g
print("qshift_up vs dense transpose:", np.max(np.abs(v1 - v2)))

print("== 1-D stage PR ==")
x = rng.standard_normal(64)
lo = qshift_down(x, q.h0a, q.h0b)
hi = qshift_down(x, q.h1a, q.h1b)
xr = qshift_up(lo, q.h0a, q.h0b) + qshift_up(hi, q.h1a, q.h1b)
print("stage PR err:", np.max(np.abs(xr - x)))

print("== level-1 undecimated stage PR (1-D) ==")
s = 1 / np.sqrt(2)
f1 = fs.level1
lo = filt_same(x, f1.h0 * s)
hi = filt_same(x, f1.h1 * s)
xr = filt_same(lo, f1.g0 * s) + filt_same(hi, f1.g1 * s)
print("level1 PR err:", np.max(np.abs(xr - x)))

print("== full transform PR ==")
for J in (1, 2, 3):
    x = rng.standard_normal((3, 32, 32))
    p = dtcwt_forward(x, J, fs)
    xr = dtcwt_inverse(p, fs)
    print(f"J={J} PR err:", np.max(np.abs(xr - x)),
          " lowpass shape:", p.lowpass.shape,
          " band shapes:", [b.re.shape for b in p.highpass])

print("== adjoint dot tests ==")
for J in (1, 2, 3):
    x = rng.standard_normal((2, 32, 32))
    p = dtcwt_forward(x, J, fs)
    pr = p.map(lambda a: rng.standard_normal(a.shape))
    lhs = pyramid_inner(zip(p.planes(), [np.ones_like(a) for a in p.planes()]) and
                        [(a, b) for a, b in zip(p.planes(), pr.planes())], [])\
        if False else sum(inner_product(a, b) for a, b in zip(p.planes(), pr.planes()))
    xa = dtcwt_forward_adjoint(pr, fs)
    rhs = inner_product(x, xa)
    print(f"J={J} fwd dot: {abs(lhs - rhs) / abs(lhs):.3e}", end="  ")
    y = dtcwt_inverse(pr, fs)
    yb = rng.standard_normal(y.shape)
    lhs2 = inner_product(y, yb)
    pb = dtcwt_inverse_adjoint(yb, J, fs)
    rhs2 = sum(inner_product(a, b) for a, b in zip(pr.planes(), pb.planes()))
    print(f"inv dot: {abs(lhs2 - rhs2) / abs(lhs2):.3e}")

print("== constant image ==")
x = np.full((1, 32, 32), 3.25)
p = dtcwt_forward(x, 2, fs)
print("max |highpass|:", max(float(np.max(b.magnitude())) for b in p.highpass))
print("lowpass DC value:", p.lowpass.flat[0], " expected around 4*3.25 =", 13.0)

print("== orientation mapping ==")
# wave with wavevector k=(k1,k2); scale-2 ring: |k| around 0.3-0.4 pi
def band_energy(p):
    return np.array([[float(np.sum(b.re[..., i, :, :] ** 2 + b.im[..., i, :, :] ** 2))
                      for i in range(6)] for b in p.highpass])

h_idx, w_idx = np.meshgrid(np.arange(32), np.arange(32), indexing="ij")
for name, k1, k2 in [("45deg scale2", 2 * np.pi * 3 / 32, 2 * np.pi * 3 / 32),
                     ("135deg scale2", 2 * np.pi * 3 / 32, -2 * np.pi * 3 / 32),
                     ("15ish scale1: horiz-high", 2 * np.pi * 10 / 32, 2 * np.pi * 1 / 32),
                     ("vert-high scale1", 2 * np.pi * 1 / 32, 2 * np.pi * 10 / 32)]:
    x = np.cos(k1 * h_idx + k2 * w_idx)[None]
    p = dtcwt_forward(x, 2, fs)
    e = band_energy(p)
    tot = e.sum()
    print(f"{name}: scale1 {np.round(e[0] / tot, 3)} scale2 {np.round(e[1] / tot, 3)}")
