"""Alpha-divergences between equivalent tempered stable processes.

Closed forms exist per tail because the Radon-Nikodym derivative only moves
the decay rate: every integral reduces to ``∫ r^(-1-a) (e^{-λ r} ...) dr``,
a Gamma-function integral. Two quadrature oracles integrate the defining
f-divergence instead, one through the density ratio and one through ``ψ``.
"""

from __future__ import annotations

import math
from typing import Optional

import mpmath
import numpy as np

from tsgeo._quad import QuadratureConfig, QuadResult, check_bound, integrate_half_line
from tsgeo.errors import DomainError
from tsgeo.levy import is_gaussian_tempered, tail_density, tail_log_density, tail_log_rn
from tsgeo.params import CtsParams, MeasurePair, ModelKind, Tail, kl_finiteness_domain, mixed_decay
from tsgeo.special import gamma_real

__all__ = [
    "QuadratureConfig",
    "QuadResult",
    "alpha_divergence",
    "alpha_divergence_psi_form",
    "alpha_divergence_quadrature",
    "f_alpha",
    "kl_divergence",
    "kl_divergence_kim_lee",
]


def _check_alpha(pair: MeasurePair, alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise DomainError("alpha must be finite")
    dom = kl_finiteness_domain(pair, alpha)
    if not dom:
        raise DomainError(
            f"alpha = {alpha:g} needs positive mixed decays, got "
            f"({dom.mixed_decays[0]:g}, {dom.mixed_decays[1]:g})"
        )
    return alpha


# -- closed forms -------------------------------------------------------------


def _kl_bracket(a: float, lam: float, lam_t: float) -> float:
    return (a - 1.0) * lam**a - a * lam_t * lam ** (a - 1.0) + lam_t**a


def _mix_bracket(a: float, lam: float, lam_t: float, alpha: float) -> float:
    wp = 0.5 * (1.0 - alpha)
    wq = 0.5 * (1.0 + alpha)
    # operand order keeps the (P, Q, α) <-> (Q, P, -α) swap bit-exact
    return (wp * lam**a + wq * lam_t**a) - (wp * lam + wq * lam_t) ** a


def _bracket(a: float, lam: float, lam_t: float, alpha: float) -> float:
    if alpha == -1.0:
        return _kl_bracket(a, lam, lam_t)
    if alpha == 1.0:
        return _kl_bracket(a, lam_t, lam)
    return 4.0 / (1.0 - alpha * alpha) * _mix_bracket(a, lam, lam_t, alpha)


def _gts_tail(p: Tail, q: Tail, alpha: float) -> float:
    return max(p.c * gamma_real(-p.a) * _bracket(p.a, p.lam, q.lam, alpha), 0.0)


def _rdts_tail(p: Tail, q: Tail, alpha: float) -> float:
    h = 0.5 * p.a
    return max(2.0 ** (-1.0 - h) * p.c * gamma_real(-h) * _bracket(h, p.lam, q.lam, alpha), 0.0)


def alpha_divergence(pair: MeasurePair, alpha: float) -> float:
    """Closed-form alpha-divergence ``D^(α)(P || Q)``.

    Parameters
    ----------
    pair : MeasurePair
        Equivalent measures ``(P, Q)``.
    alpha : float
        ``-1`` is Kullback-Leibler, ``1`` its dual; both use their own
        exact branch. For ``|α| > 1`` both mixed decays must be positive.

    Returns
    -------
    float
        Non-negative; rounding residue below zero is clipped.

    Raises
    ------
    DomainError
        Outside the validity domain of :func:`kl_finiteness_domain`.
    """
    alpha = _check_alpha(pair, alpha)
    tail = _rdts_tail if pair.kind is ModelKind.RDTS else _gts_tail
    (pp, pm), (qp, qm) = pair.p.tails, pair.q.tails
    # + 0.0 turns a clipped -0.0 into 0.0
    return pair.p.horizon_t * (tail(pp, qp, alpha) + tail(pm, qm, alpha)) + 0.0


def kl_divergence(pair: MeasurePair) -> float:
    """Kullback-Leibler divergence ``KL(P || Q)``; the ``α = -1`` branch."""
    return alpha_divergence(pair, -1.0)


def kl_divergence_kim_lee(pair: MeasurePair) -> float:
    """KL divergence of a CTS pair in the classical single-index layout.

    Written with the shared ``(a, C)`` factored out of both tails, as in the
    original CTS result; kept separate from :func:`kl_divergence` so the two
    can be cross-checked.
    """
    if pair.kind is not ModelKind.CTS:
        raise DomainError("the single-index KL form applies to CTS pairs only")
    p: CtsParams = pair.p.params
    q: CtsParams = pair.q.params
    a, c = p.a, p.c
    lp, lm, tp, tm = p.lambda_plus, p.lambda_minus, q.lambda_plus, q.lambda_minus
    plus = (a - 1.0) * lp**a - a * tp * lp ** (a - 1.0) + tp**a
    minus = (a - 1.0) * lm**a - a * tm * lm ** (a - 1.0) + tm**a
    return pair.p.horizon_t * c * gamma_real(-a) * (plus + minus)


# -- f-divergence kernel ------------------------------------------------------


def _expm1_over(x: float, psi: float) -> float:
    """``(e^{xψ} - 1) / x``, continuous through ``x = 0``."""
    return psi if x == 0.0 else math.expm1(x * psi) / x


def f_alpha(psi: float, alpha: float) -> float:
    """``f^(α)(e^ψ)``, the alpha-divergence generator at ``t = e^ψ``.

    With ``β = (1 - α)/2`` the kernel is
    ``(β (e^ψ - 1) - (e^{βψ} - 1)) / (β (1 - β))``, whose ``β -> 1`` and
    ``β -> 0`` limits are the KL generator and its dual. Near ``ψ = 0``
    the Taylor series ``Σ_{n≥2} (Σ_{k<n-1} β^k) ψ^n / n!`` avoids the
    cancellation, uniformly in ``α``. Elsewhere the division by ``β`` or
    ``1 - β``, whichever is small, is absorbed into ``expm1(xψ)/x``.
    """
    if psi == 0.0:
        return 0.0
    beta = 0.5 * (1.0 - alpha)
    growth = max(1.0, abs(beta))
    if abs(psi) * growth < 0.1:
        total, power, s_n, b_k, bound = 0.0, psi, 0.0, 1.0, 1.0
        for n in range(2, 80):
            power *= psi / n
            s_n += b_k
            b_k *= beta
            total += s_n * power
            # |S_n| <= (n - 1) growth^(n-2); partial sums can vanish when β < 0
            if abs(power) * (n - 1) * bound <= 1e-18 * abs(total):
                break
            bound *= growth
        return total
    if alpha == -1.0:
        return psi * math.exp(psi) - math.expm1(psi)
    if alpha == 1.0:
        return math.expm1(psi) - psi
    if beta >= 0.5:
        g = 1.0 - beta
        return (math.exp(psi) * _expm1_over(-g, psi) - math.expm1(psi)) / beta
    return (math.expm1(psi) - _expm1_over(beta, psi)) / (1.0 - beta)


def _f_times_density(psi: float, log_dq: float, alpha: float) -> float:
    """``f^(α)(e^ψ) e^{log_dq}`` without overflowing any intermediate exponential."""
    beta = 0.5 * (1.0 - alpha)
    if abs(psi) * max(1.0, abs(beta), abs(1.0 - beta)) < 30.0:
        f = f_alpha(psi, alpha)
        if log_dq < 700.0:
            return f * math.exp(log_dq)
        # the density overflows right at the origin while f·density stays finite
        return math.exp(math.log(f) + log_dq) if f > 0.0 else 0.0
    dq = math.exp(log_dq)
    dp = math.exp(psi + log_dq)
    if alpha == -1.0:
        return psi * dp - dp + dq
    if alpha == 1.0:
        return dp - dq - psi * dq
    mixed = math.exp(beta * psi + log_dq)
    if beta >= 0.5:
        g = 1.0 - beta
        # dp * expm1(-g ψ), accurate whether or not g ψ is small
        em = dp * math.expm1(-g * psi) if abs(g * psi) < 1.0 else mixed - dp
        return (em / -g - (dp - dq)) / beta
    em = dq * math.expm1(beta * psi) if abs(beta * psi) < 1.0 else mixed - dq
    return ((dp - dq) - em / beta) / (1.0 - beta)


# -- quadrature oracles -------------------------------------------------------


def _origin_power(a: float, gaussian: bool) -> float:
    # f ~ ψ²/2 with ψ ~ r (exponential) or r² (Gaussian tempering); density ~ r^(-1-a)
    return (3.0 if gaussian else 1.0) - a


def _body_scale(lam: float, lam_t: float, alpha: float, gaussian: bool) -> float:
    kappa = min(lam, lam_t)
    mixed = mixed_decay(lam, lam_t, alpha)
    if mixed > 0:
        kappa = min(kappa, mixed)
    return 1.0 / math.sqrt(kappa) if gaussian else 1.0 / kappa


def _mp_log_densities(r: float, p: Tail, q: Tail, gaussian: bool) -> tuple[float, float]:
    """``(log λ^P/λ^Q, log λ^Q)`` in extended precision, immune to overflow near 0.

    The working precision grows with ``-log10 |ψ|`` so the ratio keeps about
    25 significant digits after the leading 1.
    """
    size = abs(p.lam - q.lam) * (0.5 * r * r if gaussian else r)
    dps = 25 + (max(0, int(-math.log10(size))) if size > 0 else 0)
    with mpmath.workdps(dps):
        x = mpmath.mpf(r)

        def dens(t: Tail):
            e = t.lam * x * x / 2 if gaussian else t.lam * x
            return t.c * x ** (-(t.a + 1)) * mpmath.exp(-e)

        dp, dq = dens(p), dens(q)
        return float(mpmath.log(dp / dq)), float(mpmath.log(dq))


def _lambda_integrand(p: Tail, q: Tail, alpha: float, gaussian: bool):
    """``f^(α)(λ^P/λ^Q) λ^Q`` at ``r > 0``, the ratio taken from the densities."""

    def fn(r: float) -> float:
        with np.errstate(over="ignore"):
            dp = float(tail_density(r, p, gaussian))
            dq = float(tail_density(r, q, gaussian))
        if dp == 0.0 or dq == 0.0:
            return 0.0
        ratio = dp / dq
        if math.isfinite(ratio) and abs(ratio - 1.0) >= 1e-2:
            return _f_times_density(math.log(ratio), math.log(dq), alpha)
        # near r = 0 the densities overflow, and a double-precision ratio
        # carries ~1e-16 absolute error against an f that vanishes like ψ²
        psi, log_dq = _mp_log_densities(r, p, q, gaussian)
        return _f_times_density(psi, log_dq, alpha)

    return fn


def _psi_integrand(p: Tail, q: Tail, alpha: float, gaussian: bool):
    """``f^(α)(e^ψ) λ^Q`` with ``ψ`` from the closed-form exponent."""

    def fn(r: float) -> float:
        psi = tail_log_rn(r, p.lam, q.lam, gaussian)
        return _f_times_density(psi, float(tail_log_density(r, q, gaussian)), alpha)

    return fn


def _integrate(pair: MeasurePair, alpha: float, cfg: QuadratureConfig, make, what: str) -> QuadResult:
    gaussian = is_gaussian_tempered(pair.p)
    total = QuadResult(0.0, 0.0)
    for p, q in zip(pair.p.tails, pair.q.tails):
        fn = make(p, q, alpha, gaussian)
        scale = _body_scale(p.lam, q.lam, alpha, gaussian)
        total = total + integrate_half_line(fn, _origin_power(p.a, gaussian), scale, cfg)
    return check_bound(total.scaled(pair.p.horizon_t), cfg, what)


def alpha_divergence_quadrature(
    pair: MeasurePair, alpha: float, cfg: Optional[QuadratureConfig] = None
) -> QuadResult:
    """Alpha-divergence by adaptive quadrature of the density-ratio integrand.

    Integrates ``f^(α)(λ^P/λ^Q) λ^Q`` over both half-lines. At ``α = 1`` the
    roles swap: ``f^(-1)(λ^Q/λ^P) λ^P``. Where the ratio is within 1% of 1,
    or not representable, it is recomputed in mpmath with enough digits to
    resolve ``ratio - 1``, since ``f`` vanishes quadratically there and a
    double-precision ratio would dominate the result as ``a -> 2``.

    Returns
    -------
    QuadResult
        Value with an error bound ``<= max(abs_tol, rel_tol |value|)``.

    Raises
    ------
    ConvergenceError
        If QUADPACK gives up or the bound cannot be met.
    """
    cfg = cfg or QuadratureConfig()
    alpha = _check_alpha(pair, alpha)
    if alpha == 1.0:
        return _integrate(pair.swapped(), -1.0, cfg, _lambda_integrand, "lambda-form quadrature")
    return _integrate(pair, alpha, cfg, _lambda_integrand, "lambda-form quadrature")


def alpha_divergence_psi_form(
    pair: MeasurePair, alpha: float, cfg: Optional[QuadratureConfig] = None
) -> QuadResult:
    """Alpha-divergence by quadrature of the log-Radon-Nikodym integrand.

    ``f^(α)(e^ψ)`` against ``ν^Q``; at ``α = 1`` the dual form
    ``f^(-1)(e^{-ψ})`` against ``ν^P``.
    """
    cfg = cfg or QuadratureConfig()
    alpha = _check_alpha(pair, alpha)
    if alpha == 1.0:
        return _integrate(pair.swapped(), -1.0, cfg, _psi_integrand, "psi-form quadrature")
    return _integrate(pair, alpha, cfg, _psi_integrand, "psi-form quadrature")
