"""Dev scratch: refine the 10-tap q-shift table to machine-precision
orthonormality and verify all candidate tables. Not part of the package."""
import numpy as np

np.set_printoptions(precision=17, floatmode="maxprec_equal")


def orth_residual(h):
    m = len(h)
    res = []
    for k in range(m // 2):
        res.append(np.dot(h[: m - 2 * k], h[2 * k:]) - (1.0 if k == 0 else 0.0))
    res.append(np.sum(h * np.power(-1.0, np.arange(m))))  # zero at pi
    return np.array(res)


def jac(h):
    m = len(h)
    rows = []
    for k in range(m // 2):
        g = np.zeros(m)
        for n in range(m - 2 * k):
            g[n] += h[n + 2 * k]
            g[n + 2 * k] += h[n]
        rows.append(g)
    rows.append(np.power(-1.0, np.arange(m)))
    return np.array(rows)


def refine(h0, support=None, iters=60):
    h = h0.astype(np.float64).copy()
    if support is None:
        support = np.ones(len(h), dtype=bool)
    for _ in range(iters):
        r = orth_residual(h)
        if np.max(np.abs(r)) < 1e-16:
            break
        J = jac(h)[:, support]
        dh, *_ = np.linalg.lstsq(J, -r, rcond=None)
        h[support] = h[support] + dh
    return h


hl10_pub = np.array([
    0.03516384, 0.0, -0.08832942, 0.23389032, 0.76027237,
    0.58751830, 0.0, -0.11430184, 0.0, 0.0])

hl14_pub = np.array([
    0.0032531427636532, -0.0038832119991585, 0.0346603468448535,
    -0.0388728012688278, -0.1172038876991153, 0.2752953846688820,
    0.7561456438925225, 0.5688104207121227, 0.0118660920337970,
    -0.1067118046866654, 0.0238253847949203, 0.0170252238815540,
    -0.0054394759372741, -0.0045568956284755])

for name, pub, sup in [("hl10", hl10_pub, hl10_pub != 0.0),
                       ("hl14", hl14_pub, None)]:
    print(f"== {name} ==")
    print("pub residual:", np.max(np.abs(orth_residual(pub))))
    ref = refine(pub, sup)
    print("ref residual:", np.max(np.abs(orth_residual(ref))))
    print("max delta from published:", np.max(np.abs(ref - pub)))
    print("sum:", np.sum(ref), " vs sqrt2:", np.sqrt(2.0))
    print(repr(ref))

# near_sym_a: exact rationals; check the halfband product and PR kernel.
h0 = np.array([-1, 5, 12, 5, -1], dtype=np.float64) / 20.0
g0 = np.array([-3, -15, 73, 170, 73, -15, -3], dtype=np.float64) / 280.0
h1 = g0 * np.power(-1.0, np.arange(7))
g1 = h0 * np.power(-1.0, np.arange(5))
k0 = np.convolve(h0, g0)          # length 11, center index 5
k1 = np.convolve(h1, g1)          # length 11, center index 5
print("== near_sym_a ==")
print("undecimated kernel (should be delta/1):", k0 + k1)
# alias kernel for opposite-phase decimation: g0(z)h0(-z) - g1(z)h1(-z) = 0
alt7 = np.power(-1.0, np.arange(7))
alt5 = np.power(-1.0, np.arange(5))
a0 = np.convolve(h0 * alt5, g0)
a1 = np.convolve(h1 * alt7, g1)
print("alias kernel g0*h0m - g1*h1m:", np.max(np.abs(a0 - a1)), np.max(np.abs(a0 + a1)))
