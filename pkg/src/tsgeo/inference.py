"""Jeffreys priors, Firth-penalized fitting and superharmonic prior ansatzes.

The Jeffreys prior is ``sqrt(det g)`` with its proportionality constant set
to 1. Likelihoods use the FFT density of ``X_T`` from :mod:`tsgeo.charfn`;
fits move only the decay rates ``(λ+, λ-)`` and keep every other template
parameter fixed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from tsgeo.charfn import DensityGrid, auto_grid, auto_u_max, density_grid, sample, spread
from tsgeo.errors import ConvergenceError, DomainError, MassError
from tsgeo.geometry import fisher_metric, levi_civita
from tsgeo.params import ProcessSpec

ANSATZ_KINDS = ("phi1", "phi2", "phi3", "phi4")

# -- priors ------------------------------------------------------------------


def jeffreys_prior(spec: ProcessSpec) -> float:
    """``sqrt(det g)`` of the closed-form Fisher metric."""
    return math.sqrt(fisher_metric(spec).det())


def penalized_loglik(loglik: float, spec: ProcessSpec) -> float:
    """Firth-penalized log-likelihood ``l + log J``."""
    return float(loglik) + math.log(jeffreys_prior(spec))


# -- shrinkage ansatzes --------------------------------------------------------


def exponent_interval(a: float) -> tuple[float, float]:
    """Open interval ``(min(0, a-1), max(0, a-1))`` admitted for power ansatzes."""
    return (min(0.0, a - 1.0), max(0.0, a - 1.0))


def superharmonic_interval(a: float) -> tuple[float, float]:
    """Exponents ``k`` for which ``λ^k`` is superharmonic under ``g = K λ^(a-2)``.

    ``Δ λ^k = k (k - a/2) λ^(k-a) / K``, which is non-positive on
    ``[0, a/2]``. For ``a > 1`` this contains :func:`exponent_interval`; for
    ``a < 1`` the two are disjoint apart from 0.
    """
    return (0.0, 0.5 * a)


def _check_exponent(name: str, v: float, a: float, tail: str) -> None:
    lo, hi = exponent_interval(a)
    if not lo < v < hi:
        raise DomainError(f"{name} = {v:g} outside ({lo:g}, {hi:g}) for a_{tail} = {a:g}")


@dataclass(frozen=True)
class AnsatzSpec:
    """A power-type candidate ``φ(λ+, λ-)`` for a superharmonic prior factor.

    ``phi1 = λ+^k``, ``phi2 = λ-^l``, ``phi3 = c1 phi1 + c2 phi2`` and
    ``phi4 = phi1 phi2``. Exponents are checked against a spec's indexes by
    :meth:`check`.
    """

    kind: str
    k: Optional[float] = None
    l: Optional[float] = None  # noqa: E741
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if self.kind not in ANSATZ_KINDS:
            raise DomainError(f"unknown ansatz kind {self.kind!r}; expected one of {ANSATZ_KINDS}")
        for name in ("k", "l"):
            v = getattr(self, name)
            if name in self.exponents and (v is None or not math.isfinite(v)):
                raise DomainError(f"{self.kind} needs a finite exponent {name}")
        if self.kind == "phi3" and not (self.c1 > 0 and self.c2 > 0):
            raise DomainError("phi3 weights c1, c2 must be positive")

    @property
    def exponents(self) -> tuple[str, ...]:
        return {"phi1": ("k",), "phi2": ("l",)}.get(self.kind, ("k", "l"))

    def check(self, spec: ProcessSpec) -> None:
        """Raise :class:`DomainError` if an exponent leaves its open interval."""
        tp, tm = spec.tails
        if "k" in self.exponents:
            _check_exponent("k", self.k, tp.a, "plus")
        if "l" in self.exponents:
            _check_exponent("l", self.l, tm.a, "minus")

    def value(self, lambda_plus: float, lambda_minus: float) -> float:
        """``φ`` at a decay pair, without the exponent check."""
        if self.kind == "phi1":
            return lambda_plus**self.k
        if self.kind == "phi2":
            return lambda_minus**self.l
        p1, p2 = lambda_plus**self.k, lambda_minus**self.l
        return self.c1 * p1 + self.c2 * p2 if self.kind == "phi3" else p1 * p2

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_ansatz(spec: ProcessSpec, ansatz: AnsatzSpec) -> float:
    """``φ`` at ``spec``'s decay rates.

    Raises
    ------
    DomainError
        If an exponent lies outside its open interval for ``spec``'s indexes.
    """
    ansatz.check(spec)
    return ansatz.value(*spec.lambdas)


Scalar2 = Callable[[float, float], float]


def _derivatives(phi: Scalar2, x: np.ndarray, h: np.ndarray):
    """Central-difference gradient and Hessian of ``phi`` at ``x``."""
    grad = np.empty(2)
    hess = np.empty((2, 2))
    f0 = phi(*x)
    e = np.eye(2)
    for i in range(2):
        fp, fm = phi(*(x + h[i] * e[i])), phi(*(x - h[i] * e[i]))
        grad[i] = (fp - fm) / (2.0 * h[i])
        hess[i, i] = (fp - 2.0 * f0 + fm) / h[i] ** 2
    d0, d1 = h[0] * e[0], h[1] * e[1]
    hess[0, 1] = hess[1, 0] = (
        phi(*(x + d0 + d1)) - phi(*(x + d0 - d1)) - phi(*(x - d0 + d1)) + phi(*(x - d0 - d1))
    ) / (4.0 * h[0] * h[1])
    return grad, hess


def laplace_beltrami(
    spec: ProcessSpec,
    ansatz: Union[AnsatzSpec, Scalar2],
    step: float = 1e-2,
    tol: float = 1e-6,
) -> float:
    """``Δφ = g^{ij} (∂_i ∂_j φ - Γ^k_{ij} ∂_k φ)`` at ``spec``'s decay rates.

    This is the divergence form ``g^{-1/2} ∂_i (g^{1/2} g^{ij} ∂_j φ)``
    rewritten with the Levi-Civita symbols, which are available in closed
    form. Derivatives of ``φ`` are central differences with relative step
    ``step``, Richardson-extrapolated.

    Parameters
    ----------
    spec : ProcessSpec
    ansatz : AnsatzSpec or callable
        A callable ``phi(lambda_plus, lambda_minus)`` is used as is, which
        allows probes such as a constant.
    step : float
        Relative step; ``h_i = step * λ_i``.
    tol : float
        Relative agreement required between two Richardson levels.

    Raises
    ------
    ConvergenceError
        If the two Richardson levels disagree.
    """
    if not step > 0:
        raise DomainError("step must be positive")
    if isinstance(ansatz, AnsatzSpec):
        ansatz.check(spec)
        phi = ansatz.value
    else:
        phi = ansatz
    metric = fisher_metric(spec)
    ginv = metric.inverse()
    gamma = levi_civita(spec).raised(metric)  # [k, i, j]
    x = np.array(spec.lambdas, dtype=float)
    h = step * x
    levels = [_derivatives(phi, x, h / 2.0**s) for s in range(3)]

    def rich(a, b):
        return (4.0 * b - a) / 3.0

    def lap(grad, hess):
        second = float(np.sum(ginv * hess))
        first = float(np.einsum("ij,kij,k->", ginv, gamma, grad))
        return second - first, abs(second) + abs(first)

    coarse = lap(rich(levels[0][0], levels[1][0]), rich(levels[0][1], levels[1][1]))
    fine = lap(rich(levels[1][0], levels[2][0]), rich(levels[1][1], levels[2][1]))
    scale = max(coarse[1], fine[1])
    if abs(fine[0] - coarse[0]) > tol * scale + 1e-14:
        raise ConvergenceError(
            f"Laplace-Beltrami difference quotients did not settle: {coarse[0]:.6g} vs {fine[0]:.6g}"
        )
    return fine[0]


def laplace_beltrami_grid(
    spec: ProcessSpec,
    ansatz: AnsatzSpec,
    lo: float = 0.5,
    hi: float = 4.0,
    n: int = 9,
    step: float = 1e-2,
) -> np.ndarray:
    """``Δφ`` on an ``n × n`` grid of decay rates in ``[lo, hi]²``.

    Returns
    -------
    ndarray, shape (n*n, 3)
        Rows ``(lambda_plus, lambda_minus, delta_phi)``.
    """
    ansatz.check(spec)
    lams = np.linspace(lo, hi, int(n))
    rows = [
        (lp, lm, laplace_beltrami(spec.with_decays(lp, lm), ansatz, step)) for lp in lams for lm in lams
    ]
    return np.array(rows, dtype=float)


# -- likelihood fits ---------------------------------------------------------

MIN_SAMPLES = 100
MAX_ITER = 500
SEARCH_FACTOR = 10.0
LOG_FLOOR = 1e-300
FIT_MASS_TOL = 1e-4


@dataclass(frozen=True)
class FitResult:
    """Maximizer of the (optionally penalized) likelihood over ``(λ+, λ-)``.

    ``loglik`` is the plain log-likelihood at the estimate; ``objective``
    adds ``log J`` when ``penalized``.
    """

    lambda_hat_plus: float
    lambda_hat_minus: float
    loglik: float
    penalized: bool
    iterations: int
    objective: float

    def __post_init__(self):
        if not (self.lambda_hat_plus > 0 and self.lambda_hat_minus > 0):
            raise DomainError("decay estimates must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _FitGrid:
    n: int
    u_max: float


def _fit_grid(samples: np.ndarray, template: ProcessSpec) -> _FitGrid:
    """One ``(n, u_max)`` shared by every candidate, so the ``x`` lattice is fixed.

    ``u_max`` resolves the template's CF to 1e-14. The grid spans the
    samples with margin and 40 standard deviations of the widest candidate
    in the search box.
    """
    u_max = auto_u_max(template, floor=1e-14)
    lp, lm = template.lambdas
    widest = spread(template.with_decays(lp / SEARCH_FACTOR, lm / SEARCH_FACTOR))
    half = max(40.0 * widest, 1.5 * float(np.max(np.abs(samples - template.m * template.horizon_t))))
    need = 2.0 * half * u_max / math.pi
    n = 4096
    while n < need:
        n *= 2
    return _FitGrid(n, u_max)


def _loglik(samples: np.ndarray, spec: ProcessSpec, fg: _FitGrid, mass_tol: float) -> float:
    grid = density_grid(spec, fg.n, fg.u_max, mass_tol)
    return float(np.sum(np.log(np.maximum(grid.pdf(samples), LOG_FLOOR))))


def log_likelihood(samples: Sequence[float], spec: ProcessSpec) -> float:
    """``Σ log f(x_i)`` with ``f`` the FFT density of ``X_T`` under ``spec``."""
    x = np.asarray(samples, dtype=float)
    return _loglik(x, spec, _fit_grid(x, spec), FIT_MASS_TOL)


def _prepare_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MIN_SAMPLES:
        raise DomainError(f"fit_mle needs at least {MIN_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples must be finite")
    return x


def fit_mle(samples: Sequence[float], template: ProcessSpec, penalized: bool = False) -> FitResult:
    """Fit ``(λ+, λ-)`` by bounded Nelder-Mead on ``log λ``.

    The search starts at the template's decay rates and is boxed to within a
    factor ``SEARCH_FACTOR`` of them. Candidates whose density grid fails the
    mass check are treated as infeasible.

    Raises
    ------
    DomainError
        Fewer than ``MIN_SAMPLES`` samples.
    MassError
        If the density grid fails at the template itself.
    ConvergenceError
        If the search hits ``MAX_ITER`` iterations.
    """
    x = _prepare_samples(samples)
    fg = _fit_grid(x, template)
    _loglik(x, template, fg, FIT_MASS_TOL)  # surfaces MassError at the start point

    def objective(theta):
        spec = template.with_decays(*np.exp(theta))
        try:
            ll = _loglik(x, spec, fg, FIT_MASS_TOL)
        except MassError:
            return math.inf
        return -(penalized_loglik(ll, spec) if penalized else ll)

    theta0 = np.log(template.lambdas)
    width = math.log(SEARCH_FACTOR)
    simplex = np.array([theta0, theta0 + [0.2, 0.0], theta0 + [0.0, 0.2]])
    res = optimize.minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        bounds=[(t - width, t + width) for t in theta0],
        options={"maxiter": MAX_ITER, "xatol": 1e-7, "fatol": 1e-10, "initial_simplex": simplex},
    )
    if not res.success:
        raise ConvergenceError(f"likelihood search stopped after {res.nit} iterations: {res.message}")
    lp, lm = (float(v) for v in np.exp(res.x))
    best = template.with_decays(lp, lm)
    ll = _loglik(x, best, fg, FIT_MASS_TOL)
    return FitResult(lp, lm, ll, bool(penalized), int(res.nit), float(-res.fun))


def standard_errors(
    samples: Sequence[float], template: ProcessSpec, fit: FitResult, step: float = 1e-3
) -> tuple[float, float]:
    """Standard errors of ``(λ+, λ-)`` from the observed information.

    The Hessian of the plain log-likelihood is taken by central differences
    at the estimate, with relative step ``step``.
    """
    x = _prepare_samples(samples)
    fg = _fit_grid(x, template)
    at = np.array([fit.lambda_hat_plus, fit.lambda_hat_minus])
    h = step * at

    def ll(v):
        return _loglik(x, template.with_decays(*v), fg, FIT_MASS_TOL)

    _, hess = _derivatives(lambda a, b: ll(np.array([a, b])), at, h)
    cov = np.linalg.inv(-hess)
    if np.any(np.diag(cov) <= 0):
        raise ConvergenceError("observed information is not positive definite at the estimate")
    return float(math.sqrt(cov[0, 0])), float(math.sqrt(cov[1, 1]))


# -- bias study ----------------------------------------------------------------


@dataclass(frozen=True)
class BiasSummary:
    """Monte Carlo comparison of plain and penalized decay estimates.

    ``bias_*`` is the mean estimate minus the truth; ``mae_*`` the mean
    absolute error. ``reduced`` compares ``|bias|`` for ``λ+``.
    """

    n: int
    seeds: int
    seed0: int
    truth_plus: float
    truth_minus: float
    mean_plain_plus: float
    mean_plain_minus: float
    mean_penalized_plus: float
    mean_penalized_minus: float
    bias_plain_plus: float
    bias_plain_minus: float
    bias_penalized_plus: float
    bias_penalized_minus: float
    mae_plain_plus: float
    mae_penalized_plus: float
    reduced: bool

    def to_dict(self) -> dict:
        return asdict(self)


def bias_study(
    spec: ProcessSpec,
    n: int = 200,
    seeds: int = 200,
    seed0: int = 42,
    grid: Optional[DensityGrid] = None,
) -> BiasSummary:
    """Fit each of ``seeds`` samples of size ``n`` with and without the penalty.

    Seed ``i`` draws with ``seed0 + i``; the summary does not depend on
    evaluation order.
    """
    if int(seeds) < 1:
        raise DomainError("seeds must be at least 1")
    grid = grid or auto_grid(spec)
    plain, pen = [], []
    for i in range(int(seeds)):
        x = sample(spec, n, int(seed0) + i, grid)
        f0, f1 = fit_mle(x, spec, False), fit_mle(x, spec, True)
        plain.append((f0.lambda_hat_plus, f0.lambda_hat_minus))
        pen.append((f1.lambda_hat_plus, f1.lambda_hat_minus))
    plain_a, pen_a = np.array(plain), np.array(pen)
    truth = np.array(spec.lambdas)
    mp, mq = plain_a.mean(axis=0), pen_a.mean(axis=0)
    bp, bq = mp - truth, mq - truth
    return BiasSummary(
        n=int(n),
        seeds=int(seeds),
        seed0=int(seed0),
        truth_plus=float(truth[0]),
        truth_minus=float(truth[1]),
        mean_plain_plus=float(mp[0]),
        mean_plain_minus=float(mp[1]),
        mean_penalized_plus=float(mq[0]),
        mean_penalized_minus=float(mq[1]),
        bias_plain_plus=float(bp[0]),
        bias_plain_minus=float(bp[1]),
        bias_penalized_plus=float(bq[0]),
        bias_penalized_minus=float(bq[1]),
        mae_plain_plus=float(np.mean(np.abs(plain_a[:, 0] - truth[0]))),
        mae_penalized_plus=float(np.mean(np.abs(pen_a[:, 0] - truth[0]))),
        reduced=bool(abs(bq[0]) <= abs(bp[0])),
    )
