"""Characteristic functions, FFT density inversion and inverse-CDF sampling.

Characteristic functions are unit-time; the horizon enters as
``φ(u)^T = exp(T log φ(u))`` inside :func:`density_grid` only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from tsgeo._quad import QuadratureConfig, integrate_half_line
from tsgeo.errors import ConvergenceError, DomainError, MassError
from tsgeo.levy import is_gaussian_tempered, tail_density
from tsgeo.params import ProcessSpec, Tail
from tsgeo.special import SeriesConfig, gamma_real, kummer_m

# The RDTS argument z = -u²/(2λ) grows quadratically in u, so the default
# |z| <= 50 cap would stop the CF near u = 10 sqrt(λ). For negative real z the
# Kummer transform gives a series of same-signed terms, accurate well past
# that; 600 keeps e^{|z|} clear of overflow.
RDTS_SERIES = SeriesConfig(rel_tol=1e-14, max_terms=5000, max_abs_z=600.0)

DEFAULT_N = 4096
DEFAULT_MASS_TOL = 1e-6
CF_FLOOR = 1e-12


# -- characteristic exponent --------------------------------------------------


def _gts_tail_exponent(tail: Tail, v: np.ndarray) -> np.ndarray:
    """``∫_0^∞ (e^{ivr} - 1 - ivr) C r^{-1-a} e^{-λ r} dr`` for real ``v`` (sign folded in)."""
    a, c, lam = tail
    t = v / lam
    # (λ - iv)^a - λ^a = λ^a expm1(a log(1 - it)) on the principal branch;
    # log(1 - it) = log1p(t²)/2 - i atan(t) is exact at v = 0 and keeps small v accurate
    log_base = 0.5 * np.log1p(t * t) - 1j * np.arctan(t)
    power_diff = lam**a * np.expm1(a * log_base)
    return c * gamma_real(-a) * power_diff - 1j * v * c * gamma_real(1.0 - a) * lam ** (a - 1.0)


def _rdts_g(x: np.ndarray, a: float, lam: float, series: SeriesConfig) -> np.ndarray:
    """``G(x; a, λ)`` for the tempering ``exp(-λ x²/2)``.

    The classical expression is written for ``exp(-s² x²/2)``; it is
    evaluated here at ``s = sqrt(λ)``.
    """
    s = math.sqrt(lam)
    z = x * x / (2.0 * lam)
    m1 = kummer_m(-0.5 * a, 0.5, z, series)
    m2 = kummer_m(0.5 * (1.0 - a), 1.5, z, series)
    return (
        2.0 ** (-1.0 - 0.5 * a) * s**a * gamma_real(-0.5 * a) * (m1 - 1.0)
        + 2.0 ** (-0.5 - 0.5 * a) * x * s ** (a - 1.0) * gamma_real(0.5 * (1.0 - a)) * (m2 - 1.0)
    )


def characteristic_exponent(spec: ProcessSpec, u, series: Optional[SeriesConfig] = None):
    """``log φ(u)`` at unit time, with ``m`` as the mean.

    Parameters
    ----------
    spec : ProcessSpec
    u : float or array_like
    series : SeriesConfig, optional
        Kummer series controls for RDTS; defaults to :data:`RDTS_SERIES`.
    """
    uu = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(uu)):
        raise DomainError("u must be finite")
    iu = 1j * uu
    tp, tm = spec.tails
    if is_gaussian_tempered(spec):
        cfg = series or RDTS_SERIES
        out = iu * spec.m + tp.c * _rdts_g(iu, tp.a, tp.lam, cfg) + tm.c * _rdts_g(-iu, tm.a, tm.lam, cfg)
    else:
        out = iu * spec.m + _gts_tail_exponent(tp, uu) + _gts_tail_exponent(tm, -uu)
    return complex(out) if np.ndim(u) == 0 else out


def characteristic_function(spec: ProcessSpec, u, series: Optional[SeriesConfig] = None):
    """Unit-time characteristic function ``φ(u)``; vectorized over ``u``.

    Raises
    ------
    ConvergenceError
        From the Kummer series when an RDTS argument exceeds its cap.
    """
    out = np.exp(characteristic_exponent(spec, u, series))
    return complex(out) if np.ndim(u) == 0 else out


def _sin_minus_id(x: float) -> float:
    """``sin x - x`` without cancellation at small ``x``."""
    if abs(x) < 0.1:
        x2 = x * x
        return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    return math.sin(x) - x


def levy_khintchine_exponent(spec: ProcessSpec, u: float, cfg: Optional[QuadratureConfig] = None) -> complex:
    """``log φ(u)`` by quadrature of ``∫ (e^{iux} - 1 - iux) ν(dx)`` plus ``ium``.

    An oracle for :func:`characteristic_exponent`; the compensator covers
    all jumps, which is what makes ``m`` the mean.
    """
    cfg = cfg or QuadratureConfig(abs_tol=1e-13, rel_tol=1e-12)
    u = float(u)
    gaussian = is_gaussian_tempered(spec)
    total = complex(0.0, u * spec.m)
    for sign, tail in zip((1.0, -1.0), spec.tails):
        scale = 1.0 / math.sqrt(tail.lam) if gaussian else 1.0 / tail.lam
        if u != 0.0:
            scale = min(scale, 2.0 * math.pi / abs(u))

        def dens(r, tail=tail):
            return float(tail_density(r, tail, gaussian))

        re = integrate_half_line(
            lambda r: -2.0 * math.sin(0.5 * u * r) ** 2 * dens(r), 1.0 - tail.a, scale, cfg
        )
        im = integrate_half_line(
            lambda r: sign * _sin_minus_id(u * r) * dens(r), 2.0 - tail.a, scale, cfg
        )
        total += complex(re.value, im.value)
    return total


# -- density grid ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Density values on the uniform grid ``x_min + k dx``, ``k < n``."""

    x_min: float
    x_max: float
    n: int
    values: np.ndarray
    mass_tol: float = DEFAULT_MASS_TOL

    def __post_init__(self):
        n = int(self.n)
        if n < 256 or n & (n - 1):
            raise DomainError(f"grid size must be a power of two >= 256, got {n}")
        vals = np.array(self.values, dtype=float)
        if vals.shape != (n,):
            raise DomainError(f"expected {n} density values, got shape {vals.shape}")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise DomainError("density values must be finite and non-negative")
        if not self.x_max > self.x_min:
            raise DomainError("x_max must exceed x_min")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "n", n)
        mass = self.mass()
        if not abs(mass - 1.0) <= self.mass_tol:
            raise MassError(
                f"density grid mass {mass:.9f} is off by more than {self.mass_tol:g}; "
                "widen the grid (larger n) or raise u_max"
            )

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def mass(self) -> float:
        return float(np.trapezoid(self.values, dx=self.dx))

    def mean(self) -> float:
        return float(np.trapezoid(self.x * self.values, dx=self.dx) / self.mass())

    def cdf(self) -> np.ndarray:
        """Cumulative trapezoid, normalized to end at 1."""
        steps = 0.5 * (self.values[1:] + self.values[:-1]) * self.dx
        c = np.concatenate(([0.0], np.cumsum(steps)))
        return c / c[-1]

    def pdf(self, x) -> np.ndarray:
        """Linear interpolation of the density; 0 outside the grid."""
        return np.interp(x, self.x, self.values, left=0.0, right=0.0)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "value"])
            for xi, vi in zip(self.x, self.values):
                w.writerow([repr(float(xi)), repr(float(vi))])


def _cf_horizon(spec: ProcessSpec, u, series=None):
    return np.exp(spec.horizon_t * characteristic_exponent(spec, u, series))


def auto_u_max(spec: ProcessSpec, floor: float = CF_FLOOR, start: float = 1.0, limit: float = 1e6) -> float:
    """Smallest ``start * 2^k`` with ``|φ(u)^T| < floor``."""
    u = start
    while u <= limit:
        if abs(_cf_horizon(spec, u)) < floor:
            return u
        u *= 2.0
    raise ConvergenceError(f"|φ(u)| stays above {floor:g} up to u = {limit:g}")


def density_grid(
    spec: ProcessSpec,
    n: int = DEFAULT_N,
    u_max: Optional[float] = None,
    mass_tol: float = DEFAULT_MASS_TOL,
) -> DensityGrid:
    """Density of ``X_T`` by discrete Fourier inversion of ``φ(u)^T``.

    The frequency grid is ``u_j = (j - n/2) du`` with ``du = 2 u_max / n``;
    the Nyquist relation then fixes ``dx = π / u_max`` and the ``x`` grid is
    centred on the mean ``m T``. Negative ripples are clipped to 0.

    Raises
    ------
    MassError
        If the trapezoid mass misses 1 by more than ``mass_tol``: the grid
        is too narrow (raise ``n``) or too coarse (raise ``u_max``).
    """
    n = int(n)
    if n < 256 or n & (n - 1):
        raise DomainError(f"n must be a power of two >= 256, got {n}")
    if u_max is None:
        u_max = auto_u_max(spec)
    if not u_max > 0:
        raise DomainError("u_max must be positive")
    du = 2.0 * u_max / n
    dx = math.pi / u_max
    mu = spec.m * spec.horizon_t
    j = np.arange(n)
    u = (j - n / 2) * du
    alt = np.where(j % 2 == 0, 1.0, -1.0)
    phi = _cf_horizon(spec, u) * np.exp(-1j * u * mu) * alt
    f = alt * np.fft.fft(phi).real * du / (2.0 * math.pi)
    x_min = mu - (n / 2) * dx
    return DensityGrid(x_min, x_min + (n - 1) * dx, n, np.clip(f, 0.0, None), mass_tol)


def spread(spec: ProcessSpec) -> float:
    """Standard deviation of ``X_T``: ``sqrt(T ∫ x² ν(dx))``."""
    from tsgeo.geometry import fisher_metric

    if is_gaussian_tempered(spec):
        # ∫ x² ν = Σ C 2^{-a/2} Γ(1 - a/2) / λ^{1 - a/2}
        var = sum(
            t.c * 2.0 ** (-0.5 * t.a) * gamma_real(1.0 - 0.5 * t.a) / t.lam ** (1.0 - 0.5 * t.a)
            for t in spec.tails
        )
        return math.sqrt(spec.horizon_t * var)
    # for exponential tempering ∫ x² ν is the trace of the Fisher metric
    return math.sqrt(float(np.trace(fisher_metric(spec).g)))


def auto_grid(spec: ProcessSpec, mass_tol: float = DEFAULT_MASS_TOL, width_sd: float = 80.0) -> DensityGrid:
    """Density grid with ``u_max`` from :func:`auto_u_max` and ``n`` wide enough.

    ``n`` is the smallest power of two (at least 4096) whose grid spans
    ``width_sd`` standard deviations.
    """
    u_max = auto_u_max(spec)
    need = width_sd * spread(spec) * u_max / math.pi
    n = DEFAULT_N
    while n < need:
        n *= 2
    return density_grid(spec, n, u_max, mass_tol)


def sample(
    spec: ProcessSpec,
    n_samples: int,
    seed: int,
    grid: Optional[DensityGrid] = None,
) -> np.ndarray:
    """Draws of ``X_T`` by inverse CDF on a density grid; deterministic per seed."""
    n_samples = int(n_samples)
    if n_samples < 0:
        raise DomainError("n_samples must be non-negative")
    grid = grid or auto_grid(spec)
    rng = np.random.default_rng(seed)
    return np.interp(rng.random(n_samples), grid.cdf(), grid.x)
