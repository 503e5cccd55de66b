"""Real Gamma function and the confluent hypergeometric function M(a, b, z).

Only what the closed forms need: Gamma at real, possibly negative
non-integer arguments, and Kummer's M at real parameters with complex
argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tsgeo.errors import ConvergenceError, DomainError, PoleError

ComplexValue = complex

# Lanczos approximation, g = 7 with 9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _lanczos(x: float) -> float:
    # valid for x >= 1
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * t ** (z + 0.5) * math.exp(-t) * acc


def gamma_real(x: float) -> float:
    """Gamma function of a real argument.

    Arguments below 1 are lifted into [1, 2] with the recurrence
    ``Gamma(x) = Gamma(x + n) / (x (x + 1) ... (x + n - 1))``; the reflection
    formula is deliberately avoided because ``sin(pi x)`` loses accuracy next
    to the poles.

    Raises
    ------
    PoleError
        At zero and the negative integers.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma_real needs a finite argument, got {x}")
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at x = {x:g}")
    if x > 171.6:
        raise DomainError(f"Gamma overflows at x = {x:g}")
    if x >= 1.0:
        return _lanczos(x)
    n = int(math.ceil(1.0 - x))
    denom = 1.0
    for i in range(n):
        denom *= x + i
    return _lanczos(x + n) / denom


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation controls for the Kummer series.

    ``max_abs_z`` caps the argument modulus; asymptotic expansions are not
    implemented, so larger arguments raise instead of returning garbage.
    """

    rel_tol: float = 1e-14
    max_terms: int = 500
    max_abs_z: float = 50.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if not self.max_abs_z > 0:
            raise DomainError("max_abs_z must be positive")


DEFAULT_SERIES = SeriesConfig()


def _kummer_series(a: float, b: float, z: np.ndarray, cfg: SeriesConfig) -> np.ndarray:
    """Direct power series, elementwise, with the relative stopping rule."""
    z = np.asarray(z, dtype=complex)
    term = np.ones_like(z)
    total = np.ones_like(z)
    done = np.zeros(z.shape, dtype=bool)
    for n in range(cfg.max_terms):
        ratio = (a + n) * z / ((b + n) * (n + 1))
        term = term * ratio
        total = total + np.where(done, 0.0, term)
        nxt = np.abs((a + n + 1) * z / ((b + n + 1) * (n + 2)))
        small = np.abs(term) < cfg.rel_tol * np.abs(total)
        # a small term only ends the sum once terms are decreasing
        done |= (term == 0) | (small & (nxt < 1.0))
        if done.all():
            return total
    raise ConvergenceError(
        f"Kummer series M({a:g}, {b:g}, z) did not converge in {cfg.max_terms} terms"
    )


def kummer_m(a: float, b: float, z, cfg: SeriesConfig = DEFAULT_SERIES):
    """Confluent hypergeometric function ``M(a, b, z) = 1F1(a; b; z)``.

    Parameters
    ----------
    a, b : float
        Real parameters; ``b`` must not be zero or a negative integer.
    z : complex or array_like of complex
        Argument. Arrays are evaluated elementwise.
    cfg : SeriesConfig
        Stopping rule and argument cap.

    Returns
    -------
    complex or ndarray
        Same shape as ``z``.

    Notes
    -----
    The sum stops once a term falls below ``rel_tol`` times the partial sum.
    Arguments with ``Re z < -1`` go through Kummer's transformation
    ``M(a, b, z) = e^z M(b - a, b, -z)``, which turns the alternating series
    into one of same-signed terms when ``b - a > 0``.
    """
    if b <= 0 and b == math.floor(b):
        raise PoleError(f"M(a, b, z) is undefined for b = {b:g}")
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(zz)):
        raise DomainError("kummer_m needs finite arguments")
    if np.any(np.abs(zz) > cfg.max_abs_z):
        raise ConvergenceError(
            f"|z| = {np.abs(zz).max():.4g} exceeds the series cap {cfg.max_abs_z:g}"
        )
    out = np.empty_like(zz)
    flip = zz.real < -1.0
    if np.any(~flip):
        out[~flip] = _kummer_series(a, b, zz[~flip], cfg)
    if np.any(flip):
        zf = zz[flip]
        out[flip] = np.exp(zf) * _kummer_series(b - a, b, -zf, cfg)
    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))
