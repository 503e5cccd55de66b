import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cts, decay, gts, random_spec, rdts, specs
from tsgeo._quad import QuadratureConfig, QuadResult
from tsgeo.divergence import (
    alpha_divergence,
    alpha_divergence_psi_form,
    alpha_divergence_quadrature,
    f_alpha,
    kl_divergence,
    kl_divergence_kim_lee,
)
from tsgeo.errors import ConvergenceError, DomainError
from tsgeo.params import make_equivalent

TIGHT = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-12)
CTS_PAIR = make_equivalent(cts(), 1.5, 2.5)
# closed form of the CTS example, evaluated in mpmath
CTS_KL = 0.06829763056240291037575


def test_cts_kl_value():
    np.testing.assert_allclose(alpha_divergence(CTS_PAIR, -1.0), CTS_KL, rtol=1e-14)
    quad = alpha_divergence_quadrature(CTS_PAIR, -1.0, TIGHT)
    np.testing.assert_allclose(quad.value, CTS_KL, rtol=1e-12)
    assert kl_divergence(CTS_PAIR) == alpha_divergence(CTS_PAIR, -1.0)
    np.testing.assert_allclose(kl_divergence_kim_lee(CTS_PAIR), CTS_KL, rtol=1e-14)


def test_gts_asymmetric_kl():
    base = gts(a_plus=0.4, a_minus=1.6, c_plus=1.0, c_minus=2.0, lp=2.0, lm=3.0, t=2.0)
    pair = make_equivalent(base, 1.5, 2.5)
    # integral of the KL integrand at 80 digits
    expected = 0.81704009351856772929
    np.testing.assert_allclose(kl_divergence(pair), expected, rtol=1e-14)
    np.testing.assert_allclose(alpha_divergence_quadrature(pair, -1.0).value, expected, rtol=1e-10)


def test_hellinger_self_dual():
    d = alpha_divergence(CTS_PAIR, 0.0)
    assert d > 0
    assert d == alpha_divergence(CTS_PAIR.swapped(), 0.0)


@pytest.mark.parametrize("alpha", [-1.0, -0.5, 0.0, 0.5, 1.0, 3.0, -2.5])
@pytest.mark.parametrize("spec", [gts(), cts(), rdts()])
def test_identical_measures_give_zero(spec, alpha):
    pair = make_equivalent(spec, *spec.lambdas)
    assert alpha_divergence(pair, alpha) == 0.0
    assert alpha_divergence_quadrature(pair, alpha).value == 0.0
    assert alpha_divergence_psi_form(pair, alpha).value == 0.0


def test_invalid_alpha_domain():
    pair = make_equivalent(gts(), 0.5, 3.0)
    with pytest.raises(DomainError):
        alpha_divergence(pair, 3.0)
    with pytest.raises(DomainError):
        alpha_divergence_quadrature(pair, 3.0)
    with pytest.raises(DomainError):
        alpha_divergence(pair, math.inf)


def test_rdts_symmetric_quadrature():
    pair = make_equivalent(rdts(lp=2.0, lm=2.0), 1.0, 1.0)
    closed = alpha_divergence(pair, 0.0)
    np.testing.assert_allclose(alpha_divergence_quadrature(pair, 0.0).value, closed, rtol=1e-8)


def test_psi_form_and_swap():
    pair = make_equivalent(gts(a_plus=0.3, a_minus=1.4, c_minus=2.0), 1.2, 4.0)
    lam = alpha_divergence_quadrature(pair, 0.5)
    psi = alpha_divergence_psi_form(pair, 0.5)
    np.testing.assert_allclose(psi.value, lam.value, rtol=1e-9)
    np.testing.assert_allclose(
        alpha_divergence_psi_form(pair, 1.0).value,
        alpha_divergence_psi_form(pair.swapped(), -1.0).value,
        rtol=1e-9,
    )


def test_quadrature_result_carries_bound():
    res = alpha_divergence_quadrature(CTS_PAIR, 0.5)
    assert isinstance(res, QuadResult)
    assert 0 <= res.error <= max(1e-12, 1e-10 * abs(res.value))


def test_origin_cut_adds_bound():
    res = alpha_divergence_quadrature(CTS_PAIR, -1.0, QuadratureConfig(origin_cut=1e-10))
    np.testing.assert_allclose(res.value, CTS_KL, rtol=1e-8)
    assert res.error > 0


def test_unreachable_tolerance_raises():
    with pytest.raises(ConvergenceError):
        alpha_divergence_quadrature(CTS_PAIR, 0.5, QuadratureConfig(abs_tol=1e-30, rel_tol=1e-30))


@pytest.mark.parametrize("alpha", [-1.0, -0.999, -0.3, 0.0, 0.4, 0.999, 1.0, 3.0, -3.0])
def test_f_alpha_kernel(alpha):
    # f(1) = 0, f'(1) = 0 and f''(1) = 1 in the ratio variable
    for psi in (0.0,):
        assert f_alpha(psi, alpha) == 0.0
    h = 1e-4
    r = np.array([1 - h, 1 + h])
    vals = np.array([f_alpha(math.log(v), alpha) for v in r])
    np.testing.assert_allclose(vals / (0.5 * h * h), 1.0, rtol=1e-3)
    for psi in (-40.0, -3.0, 0.7, 5.0):
        assert f_alpha(psi, alpha) >= 0


@pytest.mark.parametrize("kind", ["GTS", "CTS", "RDTS"])
def test_non_negative_and_linear_in_horizon(kind, rng):
    for _ in range(1000):
        spec = random_spec(rng, kind)
        pair = make_equivalent(spec, *rng.uniform(0.5, 5, size=2))
        alpha = rng.uniform(-1.5, 1.5)
        if not rng.integers(4):
            alpha = float(rng.choice([-1.0, 1.0]))
        try:
            d = alpha_divergence(pair, alpha)
        except DomainError:
            continue
        assert d >= 0
        assert alpha_divergence(pair.with_horizon(2.0), alpha) == 2.0 * d


@settings(max_examples=100, deadline=None)
@given(specs("GTS"), decay, decay, st.floats(-1.0, 1.0))
def test_duality_exact(spec, lp, lm, alpha):
    pair = make_equivalent(spec, lp, lm)
    assert alpha_divergence(pair, alpha) == alpha_divergence(pair.swapped(), -alpha)


@settings(max_examples=60, deadline=None)
@given(specs("GTS"), decay, decay)
def test_zero_only_at_equal_decays(spec, lp, lm):
    pair = make_equivalent(spec, lp, lm)
    d = alpha_divergence(pair, 0.2)
    if (lp, lm) != spec.lambdas and max(abs(lp / spec.lambdas[0] - 1), abs(lm / spec.lambdas[1] - 1)) > 1e-3:
        assert d > 0
