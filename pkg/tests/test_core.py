import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavegain.core import (ComplexPair, DimensionError, complex_mul,
                           inner_product, load_complex, load_tensor,
                           save_complex, save_tensor)


def test_complex_mul_identity(rng):
    z = ComplexPair(rng.standard_normal((3, 4)), rng.standard_normal((3, 4)))
    one = ComplexPair(np.ones((3, 4)), np.zeros((3, 4)))
    out = complex_mul(one, z)
    np.testing.assert_array_equal(out.re, z.re)
    np.testing.assert_array_equal(out.im, z.im)


def test_complex_mul_j_squared():
    j = ComplexPair(np.zeros(1), np.ones(1))
    out = complex_mul(j, j)
    np.testing.assert_array_equal(out.re, [-1.0])
    np.testing.assert_array_equal(out.im, [0.0])


def test_complex_mul_matches_scalar_loop(rng):
    a = ComplexPair(rng.standard_normal((6, 4, 4)),
                    rng.standard_normal((6, 4, 4)))
    b = ComplexPair(rng.standard_normal((6, 4, 4)),
                    rng.standard_normal((6, 4, 4)))
    out = complex_mul(a, b)
    # independent scalar oracle
    re = np.empty_like(out.re)
    im = np.empty_like(out.im)
    for idx in np.ndindex(*a.re.shape):
        za = complex(a.re[idx], a.im[idx])
        zb = complex(b.re[idx], b.im[idx])
        zc = za * zb
        re[idx] = zc.real
        im[idx] = zc.imag
    assert np.max(np.abs(out.re - re)) < 1e-15
    assert np.max(np.abs(out.im - im)) < 1e-15


def test_complex_mul_shape_mismatch():
    a = ComplexPair(np.zeros((2, 3)), np.zeros((2, 3)))
    b = ComplexPair(np.zeros((4, 5)), np.zeros((4, 5)))
    with pytest.raises(DimensionError):
        complex_mul(a, b)


@given(alpha=st.floats(-10, 10, allow_nan=False))
@settings(max_examples=25, deadline=None)
def test_complex_mul_bilinear(alpha):
    rng = np.random.default_rng(7)
    a = ComplexPair(rng.standard_normal(16), rng.standard_normal(16))
    b = ComplexPair(rng.standard_normal(16), rng.standard_normal(16))
    lhs = complex_mul(ComplexPair(alpha * a.re, alpha * a.im), b)
    ref = complex_mul(a, b)
    scale = max(float(np.max(np.abs(ref.re))), float(np.max(np.abs(ref.im))),
                1e-30) * max(abs(alpha), 1.0)
    assert np.max(np.abs(lhs.re - alpha * ref.re)) <= 1e-14 * scale
    assert np.max(np.abs(lhs.im - alpha * ref.im)) <= 1e-14 * scale


def test_inner_product_trivial():
    assert inner_product(np.ones(4), np.ones(4)) == 4.0
    assert inner_product(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_inner_product_symmetric_bit_exact(rng):
    a = rng.standard_normal((7, 11))
    b = rng.standard_normal((7, 11))
    assert inner_product(a, b) == inner_product(b, a)


def test_inner_product_vs_kahan(rng):
    a = rng.standard_normal(10_000)
    b = rng.standard_normal(10_000)
    got = inner_product(a, b)
    # compensated-summation oracle
    total = 0.0
    comp = 0.0
    for x, y in zip(a, b):
        term = x * y - comp
        tmp = total + term
        comp = (tmp - total) - term
        total = tmp
    bound = 1e-12 * float(np.linalg.norm(a) * np.linalg.norm(b))
    assert abs(got - total) < bound


def test_inner_product_shape_check():
    with pytest.raises(DimensionError):
        inner_product(np.zeros(3), np.zeros(4))


def test_npy_roundtrip(tmp_path, rng):
    x = rng.standard_normal((3, 5, 2))
    save_tensor(tmp_path / "x.npy", x)
    header = (tmp_path / "x.npy").read_bytes()[:8]
    assert header[:6] == b"\x93NUMPY" and header[6] == 1  # NPY v1.0
    np.testing.assert_array_equal(load_tensor(tmp_path / "x.npy"), x)
    z = ComplexPair(rng.standard_normal((2, 2)), rng.standard_normal((2, 2)))
    save_complex(tmp_path / "z", z)
    assert (tmp_path / "z.re.npy").exists() and (tmp_path / "z.im.npy").exists()
    back = load_complex(tmp_path / "z")
    np.testing.assert_array_equal(back.re, z.re)
    np.testing.assert_array_equal(back.im, z.im)
