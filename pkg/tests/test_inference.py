import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cts, gts, random_spec, rdts, specs
from tsgeo.charfn import auto_grid, sample
from tsgeo.errors import ConvergenceError, DomainError
from tsgeo.geometry import fisher_metric, metric_from_divergence
from tsgeo.inference import (
    AnsatzSpec,
    FitResult,
    bias_study,
    evaluate_ansatz,
    exponent_interval,
    fit_mle,
    jeffreys_prior,
    laplace_beltrami,
    laplace_beltrami_grid,
    penalized_loglik,
    standard_errors,
    superharmonic_interval,
)

UNIT = gts(lp=1.0, lm=1.0)
G15 = math.sqrt(math.pi) / 2


def exact_power_laplacian(spec, k):
    """Δ λ+^k = k (k - s/2) λ+^(k - s) / K+ for g++ = K+ λ+^(s - 2)."""
    lam = spec.lambdas[0]
    g = fisher_metric(spec).g[0, 0]
    s = spec.tails[0].a * (0.5 if spec.kind.value == "RDTS" else 1.0)
    big_k = g * lam ** (2 - s)
    return k * (k - 0.5 * s) * lam ** (k - s) / big_k


def test_jeffreys_examples():
    np.testing.assert_allclose(jeffreys_prior(UNIT), G15, rtol=1e-15)
    s = gts(a_plus=0.7, lp=1.3)
    ratio = jeffreys_prior(s.with_decays(4 * 1.3, 3.0)) / jeffreys_prior(s)
    np.testing.assert_allclose(ratio, 4 ** (-(2 - 0.7) / 2), rtol=1e-14)
    fd = metric_from_divergence(None, UNIT, -1.0)
    np.testing.assert_allclose(jeffreys_prior(UNIT), math.sqrt(fd.det()), rtol=1e-5)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["GTS", "CTS", "RDTS"]).flatmap(specs))
def test_jeffreys_squared_is_det(spec):
    # a correctly rounded square root squares back to within one ulp
    det = fisher_metric(spec).det()
    assert abs(jeffreys_prior(spec) ** 2 - det) <= 2 * np.spacing(det)


def test_penalized_loglik():
    np.testing.assert_allclose(penalized_loglik(-10.0, UNIT), -10.1207822376352, rtol=1e-13)
    flat = UNIT.with_horizon(1.0 / G15)
    np.testing.assert_allclose(penalized_loglik(-3.0, flat), -3.0, atol=1e-15)
    once = penalized_loglik(-10.0, UNIT)
    np.testing.assert_allclose(penalized_loglik(once, UNIT) - once, math.log(jeffreys_prior(UNIT)), atol=1e-15)


def test_ansatz_validation():
    s = gts(a_plus=0.5, a_minus=1.5)
    assert exponent_interval(0.5) == (-0.5, 0.0)
    assert superharmonic_interval(0.5) == (0.0, 0.25)
    with pytest.raises(DomainError, match="k = 0"):
        evaluate_ansatz(s, AnsatzSpec("phi1", k=0.0))
    with pytest.raises(DomainError):
        evaluate_ansatz(s, AnsatzSpec("phi2", l=-0.1))
    with pytest.raises(DomainError):
        AnsatzSpec("phi5", k=0.1)
    with pytest.raises(DomainError):
        AnsatzSpec("phi3", k=-0.1, l=0.2, c1=0.0)
    with pytest.raises(DomainError):
        AnsatzSpec("phi4", k=-0.1)


def test_ansatz_values(rng):
    s = gts(a_plus=0.5, lp=4.0)
    np.testing.assert_allclose(evaluate_ansatz(s, AnsatzSpec("phi1", k=-0.25)), 2**-0.5, rtol=1e-15)
    for _ in range(100):
        spec = random_spec(rng, "GTS")
        (lo_k, hi_k), (lo_l, hi_l) = (exponent_interval(t.a) for t in spec.tails)
        k, l = rng.uniform(lo_k, hi_k), rng.uniform(lo_l, hi_l)
        c1, c2 = rng.uniform(0.1, 3, size=2)
        p1 = evaluate_ansatz(spec, AnsatzSpec("phi1", k=k))
        p2 = evaluate_ansatz(spec, AnsatzSpec("phi2", l=l))
        p3 = evaluate_ansatz(spec, AnsatzSpec("phi3", k=k, l=l, c1=c1, c2=c2))
        p4 = evaluate_ansatz(spec, AnsatzSpec("phi4", k=k, l=l))
        assert min(p1, p2, p3, p4) > 0
        assert p4 == p1 * p2
        np.testing.assert_allclose(p3, c1 * p1 + c2 * p2, rtol=1e-15)


def test_constant_is_harmonic():
    for spec in (UNIT, rdts(a_plus=1.3), cts(a=1.6, lp=0.7)):
        assert abs(laplace_beltrami(spec, lambda lp, lm: 1.0)) <= 1e-8


@pytest.mark.parametrize("spec", [gts(a_plus=0.5, lp=4.0), gts(a_plus=1.5, lp=0.7), cts(a=1.9), rdts(a_plus=1.2)])
@pytest.mark.parametrize("k", [-0.75, -0.25, 0.1, 0.6])
def test_power_laplacian_matches_closed_form(spec, k):
    got = laplace_beltrami(spec, lambda lp, lm: lp**k)
    np.testing.assert_allclose(got, exact_power_laplacian(spec, k), rtol=1e-7, atol=1e-12)


def test_sign_follows_derived_interval():
    for a in (0.5, 1.5):
        spec = gts(a_plus=a, a_minus=a)
        lo, hi = superharmonic_interval(a)
        k_in = 0.5 * (lo + hi)
        for lp in np.linspace(0.5, 4.0, 5):
            s = spec.with_decays(lp, 1.0)
            assert laplace_beltrami(s, lambda x, y: x**k_in) < 0
            assert laplace_beltrami(s, lambda x, y: x ** (hi + 0.3)) > 0
            assert laplace_beltrami(s, lambda x, y: x ** (lo - 0.3)) > 0


def test_exponent_interval_superharmonic_when_a_above_one():
    spec = gts(a_plus=1.5, a_minus=1.3)
    for ansatz in (
        AnsatzSpec("phi1", k=0.25),
        AnsatzSpec("phi2", l=0.1),
        AnsatzSpec("phi3", k=0.25, l=0.1, c1=2.0, c2=0.5),
        AnsatzSpec("phi4", k=0.25, l=0.1),
    ):
        grid = laplace_beltrami_grid(spec, ansatz)
        assert grid.shape == (81, 3)
        assert np.max(grid[:, 2]) <= 1e-10


def test_laplacian_is_linear():
    spec = gts(a_plus=1.4, a_minus=1.7, c_minus=2.0, lp=1.2, lm=2.6)
    a1, a2 = AnsatzSpec("phi1", k=0.2), AnsatzSpec("phi2", l=0.4)
    combo = AnsatzSpec("phi3", k=0.2, l=0.4, c1=1.7, c2=0.3)
    lhs = laplace_beltrami(spec, combo)
    rhs = 1.7 * laplace_beltrami(spec, a1) + 0.3 * laplace_beltrami(spec, a2)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-8)


def test_laplacian_failure_modes():
    with pytest.raises(DomainError):
        laplace_beltrami(UNIT, AnsatzSpec("phi1", k=-0.25), step=0.0)
    with pytest.raises(DomainError):
        laplace_beltrami(UNIT, AnsatzSpec("phi1", k=0.25))
    with pytest.raises(ConvergenceError):
        laplace_beltrami(UNIT, lambda lp, lm: abs(lp - 1.0))


SPEC = cts()


@pytest.fixture(scope="module")
def grid():
    return auto_grid(SPEC)


def test_fit_needs_samples():
    with pytest.raises(DomainError):
        fit_mle(np.zeros(99), SPEC)
    with pytest.raises(DomainError):
        fit_mle(np.full(200, np.nan), SPEC)


def test_large_sample_fit_is_consistent(grid):
    x = sample(SPEC, 10_000, 7, grid)
    fit = fit_mle(x, SPEC)
    se = standard_errors(x, SPEC, fit)
    assert abs(fit.lambda_hat_plus - 2.0) < 3 * se[0]
    assert abs(fit.lambda_hat_minus - 3.0) < 3 * se[1]
    assert fit_mle(x, SPEC) == fit


def test_penalty_changes_small_sample_fit(grid):
    x = sample(SPEC, 200, 3, grid)
    plain, pen = fit_mle(x, SPEC, False), fit_mle(x, SPEC, True)
    assert (plain.lambda_hat_plus, plain.lambda_hat_minus) != (pen.lambda_hat_plus, pen.lambda_hat_minus)
    assert min(plain.lambda_hat_plus, plain.lambda_hat_minus, pen.lambda_hat_plus, pen.lambda_hat_minus) > 0
    assert pen.penalized and not plain.penalized
    np.testing.assert_allclose(pen.objective, penalized_loglik(pen.loglik, SPEC.with_decays(pen.lambda_hat_plus, pen.lambda_hat_minus)), rtol=1e-12)
    assert json.loads(json.dumps(pen.to_dict()))["iterations"] == pen.iterations


def test_fit_result_rejects_non_positive():
    with pytest.raises(DomainError):
        FitResult(0.0, 1.0, -1.0, False, 1, -1.0)


def test_bias_study_is_deterministic(grid):
    a = bias_study(SPEC, n=150, seeds=3, seed0=5, grid=grid)
    b = bias_study(SPEC, n=150, seeds=3, seed0=5, grid=grid)
    assert a == b
    d = json.loads(json.dumps(a.to_dict()))
    assert d["seeds"] == 3 and isinstance(d["reduced"], bool)
    with pytest.raises(DomainError):
        bias_study(SPEC, n=150, seeds=0)
