"""Half-line adaptive quadrature for integrands with an integrable origin singularity."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from tsgeo.errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the quadrature oracles.

    Attributes
    ----------
    abs_tol, rel_tol : float
        The returned error bound must satisfy
        ``error <= max(abs_tol, rel_tol * |value|)``.
    max_subdivisions : int
        Subinterval budget handed to QUADPACK per piece.
    origin_cut : float
        Half-width of an excluded ball around 0. The default 0 integrates
        all the way to the origin through a power substitution; a positive
        cut drops the ball and adds a bound on its mass to the error.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    origin_cut: float = 0.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if not 0.0 <= self.origin_cut < 1.0:
            raise DomainError("origin_cut must lie in [0, 1)")


@dataclass(frozen=True)
class QuadResult:
    """A quadrature value with its error bound."""

    value: float
    error: float

    def __float__(self) -> float:
        return self.value

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(self.value + other.value, self.error + other.error)

    def scaled(self, k: float) -> "QuadResult":
        return QuadResult(k * self.value, abs(k) * self.error)


def integrate_half_line(
    fn: Callable[[float], float],
    origin_power: float,
    scale: float,
    cfg: QuadratureConfig,
) -> QuadResult:
    """``∫_0^∞ fn(r) dr`` where ``fn(r) ~ r**origin_power`` as ``r -> 0``.

    ``scale`` splits the line into a body ``[0, scale]`` and a tail
    ``[scale, ∞)``; pick it near the integrand's decay length. On the body,
    a negative ``origin_power`` is removed with ``r = s**q``,
    ``q = 1 / (origin_power + 1)``, which makes the integrand bounded.
    """
    p = float(origin_power)
    if not p > -1.0:
        raise DomainError(f"origin power {p:g} is not integrable")
    eps = cfg.origin_cut
    ell = max(float(scale), 2.0 * eps) if eps > 0 else float(scale)

    def guarded(r):
        return fn(r) if r > 1e-300 else 0.0

    if eps > 0:
        body = _run(guarded, eps, ell, cfg)
        # excluded mass: ∫_0^eps c r^p dr with c r^p matched at eps, doubled for safety
        bound = 2.0 * abs(fn(eps)) * eps / (p + 1.0)
        body = QuadResult(body.value, body.error + bound)
    elif p < 0:
        q = 1.0 / (p + 1.0)

        def sub(s):
            r = s**q
            return guarded(r) * q * s ** (q - 1.0) if r > 1e-300 else 0.0

        body = _run(sub, 0.0, ell ** (1.0 / q), cfg)
    else:
        body = _run(guarded, 0.0, ell, cfg)
    tail = _run(guarded, ell, math.inf, cfg)
    return body + tail


_ROUNDOFF = ("The occurrence of roundoff error", "The algorithm does not converge.  Roundoff")


def _run(f, lo, hi, cfg: QuadratureConfig) -> QuadResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f,
            lo,
            hi,
            epsabs=0.25 * cfg.abs_tol,
            epsrel=0.25 * cfg.rel_tol,
            limit=int(cfg.max_subdivisions),
            full_output=1,
        )
    v, e, info = out[0], out[1], out[2]
    if not np.isfinite(v):
        raise ConvergenceError(f"quadrature on [{lo:g}, {hi:g}] produced {v}")
    # scipy reports trouble only as a message. Round-off notices still carry a
    # usable error estimate, which check_bound judges later; the rest are fatal.
    if len(out) > 3 and not out[3].startswith(_ROUNDOFF):
        first = out[3].split(".")[0]
        raise ConvergenceError(
            f"quadrature on [{lo:g}, {hi:g}] failed after {info['last']} subintervals: {first}"
        )
    return QuadResult(float(v), float(e))


def check_bound(res: QuadResult, cfg: QuadratureConfig, what: str) -> QuadResult:
    """Enforce ``error <= max(abs_tol, rel_tol |value|)``."""
    limit = max(cfg.abs_tol, cfg.rel_tol * abs(res.value))
    if not res.error <= limit:
        raise ConvergenceError(
            f"{what}: error estimate {res.error:.3g} exceeds the requested {limit:.3g}"
        )
    return res
