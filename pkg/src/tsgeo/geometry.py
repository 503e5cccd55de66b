"""Fisher metric and alpha-connections in the decay coordinates ``(λ+, λ-)``.

The EMM conditions freeze ``a±``, ``C±`` and ``T``, so each family's
manifold is two-dimensional. Closed forms come with two numerical oracles:
finite differences of the closed-form divergence, and quadrature of score
products against the Levy density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from tsgeo._quad import QuadratureConfig, check_bound, integrate_half_line
from tsgeo.divergence import alpha_divergence
from tsgeo.errors import ConvergenceError, DomainError
from tsgeo.levy import is_gaussian_tempered, tail_density, tail_log_density
from tsgeo.params import MeasurePair, ProcessSpec, Tail, make_equivalent
from tsgeo.special import gamma_real

COORDS = ("lambda_plus", "lambda_minus")
_LABEL = {"+": 0, "-": 1, 0: 0, 1: 1}


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Metric2:
    """2×2 Fisher metric ``g_ij`` in the chart ``(λ+, λ-)``."""

    g: np.ndarray

    def __post_init__(self):
        g = _frozen(self.g)
        if g.shape != (2, 2):
            raise DomainError(f"metric must be 2x2, got shape {g.shape}")
        object.__setattr__(self, "g", g)

    def __eq__(self, other) -> bool:
        return isinstance(other, Metric2) and np.array_equal(self.g, other.g)

    def det(self) -> float:
        return float(self.g[0, 0] * self.g[1, 1] - self.g[0, 1] * self.g[1, 0])

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    def to_list(self) -> list:
        return self.g.tolist()


@dataclass(frozen=True, eq=False)
class Connection2:
    """Connection coefficients ``Γ_{ij,k}`` (lowered index), stored as ``coeffs[i, j, k]``.

    Index 0 is ``λ+`` and 1 is ``λ-``; :meth:`component` also accepts
    ``"+"``/``"-"`` labels.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.shape != (2, 2, 2):
            raise DomainError(f"connection must be 2x2x2, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def __eq__(self, other) -> bool:
        return isinstance(other, Connection2) and np.array_equal(self.coeffs, other.coeffs)

    def component(self, i, j, k) -> float:
        return float(self.coeffs[_LABEL[i], _LABEL[j], _LABEL[k]])

    def raised(self, metric: Metric2) -> np.ndarray:
        """Christoffel symbols of the second kind, ``Γ^k_ij = g^{kl} Γ_{ij,l}``, as ``[k, i, j]``."""
        return np.einsum("kl,ijl->kij", metric.inverse(), self.coeffs)

    def to_dict(self) -> dict[str, float]:
        names = "+-"
        return {
            f"{names[i]}{names[j]},{names[k]}": float(self.coeffs[i, j, k])
            for i in range(2)
            for j in range(2)
            for k in range(2)
        }


# -- closed forms -------------------------------------------------------------


def _tail_moment(spec: ProcessSpec, tail: Tail, order: int) -> float:
    """``T ∫_0^∞ |∂_λ log t|^order ν(dr)`` for one tail."""
    t = spec.horizon_t
    if is_gaussian_tempered(spec):
        h = 0.5 * tail.a
        return 2.0 ** (-1.0 - h) * t * tail.c * gamma_real(order - h) / tail.lam ** (order - h)
    return t * tail.c * gamma_real(order - tail.a) / tail.lam ** (order - tail.a)


def fisher_metric(spec: ProcessSpec) -> Metric2:
    """Closed-form Fisher metric; diagonal for all three families.

    GTS/CTS: ``T C± Γ(2-a±) / λ±^(2-a±)``. RDTS:
    ``2^(-1-a±/2) T C± Γ(2-a±/2) / λ±^(2-a±/2)``.
    """
    tp, tm = spec.tails
    return Metric2(np.diag([_tail_moment(spec, tp, 2), _tail_moment(spec, tm, 2)]))


def _diag_connection(plus: float, minus: float) -> Connection2:
    c = np.zeros((2, 2, 2))
    c[0, 0, 0] = plus
    c[1, 1, 1] = minus
    return Connection2(c)


def levi_civita(spec: ProcessSpec) -> Connection2:
    """Levi-Civita connection; only ``Γ_{++,+}`` and ``Γ_{--,-}`` are non-zero."""
    tp, tm = spec.tails
    return _diag_connection(-0.5 * _tail_moment(spec, tp, 3), -0.5 * _tail_moment(spec, tm, 3))


def alpha_connection(spec: ProcessSpec, alpha: float) -> Connection2:
    """Alpha-connection ``Γ^(α) = (1 - α) Γ^LC``.

    ``α = 0`` reproduces :func:`levi_civita` bit-for-bit and ``α = 1`` gives
    the zero connection. Because ``(1 - α)`` and ``(1 + α)`` are rounded
    separately, ``Γ^(α) + Γ^(-α) = 2 Γ^LC`` holds to a few ulp, not bitwise,
    unless ``α`` is a dyadic rational.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise DomainError("alpha must be finite")
    lc = levi_civita(spec).coeffs
    # + 0.0 turns the -0.0 of α = 1 into a plain zero
    return Connection2((1.0 - alpha) * lc + 0.0)


# -- divergence finite differences -------------------------------------------

PairFactory = Callable[[ProcessSpec, float, float], MeasurePair]


def _mixed_hessian(spec: ProcessSpec, alpha: float, factory: PairFactory, steps) -> np.ndarray:
    """Central estimate of ``∂_i ∂~_j D(ξ, ξ~)`` at ``ξ = ξ~``."""
    lam = np.array(spec.lambdas)
    out = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            acc = 0.0
            for si, sj, w in ((1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)):
                xi = lam.copy()
                xi[i] += si * steps[i]
                xt = lam.copy()
                xt[j] += sj * steps[j]
                p = spec.with_decays(*xi)
                acc += w * alpha_divergence(factory(p, *xt), alpha)
            out[i, j] = acc / (4.0 * steps[i] * steps[j])
    return out


def metric_from_divergence(
    pair_factory: Optional[PairFactory],
    spec: ProcessSpec,
    alpha: float,
    step: float = 1e-4,
    tol: float = 1e-5,
) -> Metric2:
    """Metric ``g_ij = -∂_i ∂~_j D^(α)(ξ, ξ~)|_{ξ = ξ~}`` by finite differences.

    Parameters
    ----------
    pair_factory : callable or None
        ``(P, new_lambda_plus, new_lambda_minus) -> MeasurePair``; defaults
        to :func:`tsgeo.params.make_equivalent`.
    spec : ProcessSpec
        Base point.
    alpha : float
        Divergence index; the result should not depend on it.
    step : float
        Relative step; coordinate ``i`` moves by ``step * λ_i``.
    tol : float
        Allowed change between the ``h`` and ``h/2`` estimates, relative to
        the largest diagonal entry.

    Raises
    ------
    ConvergenceError
        If the two step sizes disagree by more than ``tol``.
    """
    if not step > 0:
        raise DomainError("step must be positive")
    factory = pair_factory or make_equivalent
    h = step * np.array(spec.lambdas)
    coarse = -_mixed_hessian(spec, alpha, factory, h)
    fine = -_mixed_hessian(spec, alpha, factory, 0.5 * h)
    scale = np.max(np.abs(np.diag(fine)))
    if not np.max(np.abs(fine - coarse)) <= tol * scale:
        raise ConvergenceError(
            f"finite-difference metric unstable: change {np.max(np.abs(fine - coarse)):.3g} "
            f"against scale {scale:.3g}"
        )
    return Metric2((4.0 * fine - coarse) / 3.0)


# -- quadrature oracle --------------------------------------------------------

_CSTEP = 1e-30


def _score_lambda(tail: Tail, gaussian: bool):
    """Numerical ``∂_λ log λ(r)`` and ``∂²_λ log λ(r)`` by complex steps.

    The score uses a vanishing imaginary step. The Hessian uses
    ``2 (f(λ) - Re f(λ + ih)) / h²`` with a moderate ``h``; it is exactly
    zero whenever ``log λ`` is linear in the decay.
    """
    lam = tail.lam

    def score(r: float) -> float:
        z = tail_log_density(r, tail, gaussian, lam=complex(lam, _CSTEP * lam))
        return float(np.imag(z)) / (_CSTEP * lam)

    h = 1e-4 * lam

    def hess(r: float) -> float:
        base = float(tail_log_density(r, tail, gaussian))
        z = tail_log_density(r, tail, gaussian, lam=complex(lam, h))
        return 2.0 * (base - float(np.real(z))) / (h * h)

    return score, hess


def _score_t(gaussian: bool):
    """Analytic ``∂_λ log t`` and ``∂²_λ log t``; the tempering exponent is linear in λ."""
    if gaussian:
        return (lambda r: -0.5 * r * r), (lambda r: 0.0)
    return (lambda r: -r), (lambda r: 0.0)


@dataclass(frozen=True)
class GeometryOracle:
    """Quadrature geometry from both integrand forms, and their largest relative gap."""

    metric: Metric2
    connection: Connection2
    metric_t: Metric2
    connection_t: Connection2
    form_gap: float


def _quad_geometry(spec: ProcessSpec, alpha: float, cfg: QuadratureConfig, form: str):
    gaussian = is_gaussian_tempered(spec)
    t = spec.horizon_t
    g = np.zeros((2, 2))
    conn = np.zeros((2, 2, 2))
    for side, tail in enumerate(spec.tails):
        score, hess = _score_lambda(tail, gaussian) if form == "lambda" else _score_t(gaussian)
        scale = 1.0 / math.sqrt(tail.lam) if gaussian else 1.0 / tail.lam
        lift = 2.0 if gaussian else 1.0  # score ~ r or r²/2 near the origin

        def dens(r, tail=tail):
            return float(tail_density(r, tail, gaussian))

        # on this half-line only the score along `side` is non-zero, so only
        # g[side, side] and Γ_{side side, side} receive mass
        m = integrate_half_line(
            lambda r: score(r) ** 2 * dens(r), 2 * lift - 1.0 - tail.a, scale, cfg
        )
        c = integrate_half_line(
            lambda r: (hess(r) + 0.5 * (1.0 - alpha) * score(r) ** 2) * score(r) * dens(r),
            3 * lift - 1.0 - tail.a,
            scale,
            cfg,
        )
        g[side, side] = check_bound(m.scaled(t), cfg, "metric quadrature").value
        conn[side, side, side] = check_bound(c.scaled(t), cfg, "connection quadrature").value
    return Metric2(g), Connection2(conn)


def geometry_quadrature_detail(
    spec: ProcessSpec, alpha: float, cfg: Optional[QuadratureConfig] = None, agree_tol: float = 1e-10
) -> GeometryOracle:
    """Both quadrature forms of the metric and alpha-connection.

    The λ-form differentiates ``log λ(x; ξ)`` numerically (complex step for
    scores, a central difference for the Hessian); the t-form uses the
    analytic derivatives of ``log t``. Valid because the EMM conditions keep
    ``C`` and ``a`` fixed, so both forms share the same integrand.

    Raises
    ------
    ConvergenceError
        If a quadrature fails or the forms disagree by more than
        ``agree_tol`` relative to the largest entry.
    """
    cfg = cfg or QuadratureConfig()
    alpha = float(alpha)
    g_l, c_l = _quad_geometry(spec, alpha, cfg, "lambda")
    g_t, c_t = _quad_geometry(spec, alpha, cfg, "t")
    gap_g = np.max(np.abs(g_l.g - g_t.g)) / np.max(np.abs(g_t.g))
    c_scale = np.max(np.abs(c_t.coeffs))
    gap_c = np.max(np.abs(c_l.coeffs - c_t.coeffs)) / c_scale if c_scale > 0 else np.max(np.abs(c_l.coeffs))
    gap = float(max(gap_g, gap_c))
    if not gap <= agree_tol:
        raise ConvergenceError(f"lambda-form and t-form geometry disagree by {gap:.3g}")
    return GeometryOracle(g_l, c_l, g_t, c_t, gap)


def geometry_quadrature(
    spec: ProcessSpec, alpha: float, cfg: Optional[QuadratureConfig] = None
) -> tuple[Metric2, Connection2]:
    """``(metric, alpha-connection)`` by quadrature of the λ-form integrands.

    The t-form is computed as well and must agree; see
    :func:`geometry_quadrature_detail`.
    """
    res = geometry_quadrature_detail(spec, alpha, cfg)
    return res.metric, res.connection
