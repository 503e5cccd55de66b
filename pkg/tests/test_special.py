import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tsgeo.errors import ConvergenceError, PoleError
from tsgeo.special import SeriesConfig, gamma_real, kummer_m

SQRT_PI = math.sqrt(math.pi)


@pytest.mark.parametrize(
    "x, expected",
    [(0.5, SQRT_PI), (-0.5, -2 * SQRT_PI), (-1.5, 4 * SQRT_PI / 3), (1.5, SQRT_PI / 2), (2.5, 0.75 * SQRT_PI)],
)
def test_gamma_values(x, expected):
    np.testing.assert_allclose(gamma_real(x), expected, rtol=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma_real(x)


def test_gamma_matches_math_on_a_grid():
    xs = np.concatenate([np.linspace(-1.95, -0.05, 77), np.linspace(0.05, 20, 300)])
    for x in xs:
        if abs(x - round(x)) < 1e-9 and x <= 0:
            continue
        np.testing.assert_allclose(gamma_real(x), math.gamma(x), rtol=2e-14)


@given(st.one_of(st.floats(-1.9, -1.01), st.floats(-0.99, -0.1), st.floats(0.1, 5.0)))
def test_gamma_recurrence(x):
    np.testing.assert_allclose(gamma_real(x + 1.0), x * gamma_real(x), rtol=1e-13)


@given(st.floats(0.01, 0.99))
def test_gamma_reflection(x):
    lhs = gamma_real(x) * gamma_real(1 - x) * math.sin(math.pi * x) / math.pi
    np.testing.assert_allclose(lhs, 1.0, rtol=1e-12)


def test_kummer_trivial_cases():
    assert kummer_m(0.3, 1.7, 0.0) == 1.0
    np.testing.assert_allclose(kummer_m(0.7, 0.7, 1.0 + 0j), math.e, rtol=1e-14)


def test_kummer_high_precision_value():
    # mpmath.hyp1f1(-0.25, 0.5, 1) at 40 digits
    got = kummer_m(-0.25, 0.5, 1.0 + 0j, SeriesConfig(rel_tol=1e-16))
    np.testing.assert_allclose(got, 0.3389923224889666595818, rtol=1e-15)


@given(st.floats(-0.9, 0.9), st.floats(0.3, 2.5), st.floats(-8, 8), st.floats(-8, 8))
def test_kummer_conjugate_symmetry(a, b, re, im):
    z = complex(re, im)
    np.testing.assert_allclose(kummer_m(a, b, z.conjugate()), np.conj(kummer_m(a, b, z)), rtol=1e-12, atol=1e-300)


@given(st.floats(-0.9, 0.9), st.floats(0.3, 2.5), st.floats(-7, 7), st.floats(-7, 7))
def test_kummer_transform(a, b, re, im):
    z = complex(re, im)
    if abs(z) > 10:
        z *= 10 / abs(z)
    lhs = kummer_m(a, b, z)
    rhs = cmath.exp(z) * kummer_m(b - a, b, -z)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_kummer_vectorized_matches_scalar():
    z = np.array([0.5j, -2.0 + 1j, 3.0 - 0.5j])
    vec = kummer_m(-0.25, 0.5, z)
    for zi, vi in zip(z, vec):
        assert vi == kummer_m(-0.25, 0.5, complex(zi))


def test_kummer_limits():
    with pytest.raises(PoleError):
        kummer_m(0.5, -1.0, 1.0)
    with pytest.raises(ConvergenceError):
        kummer_m(0.5, 1.5, 60.0)
    with pytest.raises(ConvergenceError):
        kummer_m(0.5, 1.5, 20.0 + 0j, SeriesConfig(max_terms=5))
