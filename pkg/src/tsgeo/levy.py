"""Levy densities, tempering functions and Radon-Nikodym derivatives.

All public functions accept a scalar or an array for ``x`` and return the
same shape. The origin is excluded from every Levy measure here, so any
``|x| < 1e-300`` raises instead of returning 0 or infinity.
"""

from __future__ import annotations

import numpy as np

from tsgeo.errors import DomainError
from tsgeo.params import MeasurePair, ModelKind, ProcessSpec, Tail

ORIGIN_GUARD = 1e-300


def _prepare(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("x must be finite")
    if np.any(np.abs(arr) < ORIGIN_GUARD):
        raise DomainError("x = 0 is outside the Levy measure's support")
    return arr


def _finish(x, out):
    return float(out) if np.ndim(x) == 0 else out


def _two_sided(x, pos, neg):
    """Apply ``pos(r)`` on ``x > 0`` and ``neg(r)`` on ``x < 0`` with ``r = |x|``."""
    arr = _prepare(x)
    r = np.abs(arr)
    out = np.where(arr > 0, pos(r), neg(r))
    return _finish(x, out)


def is_gaussian_tempered(spec: ProcessSpec) -> bool:
    return spec.kind is ModelKind.RDTS


def tail_log_tempering(r, lam, gaussian: bool):
    """``log t`` on one half-line; ``lam`` may be complex for complex-step use."""
    return -lam * r * r * 0.5 if gaussian else -lam * r


def tail_log_density(r, tail: Tail, gaussian: bool, lam=None):
    """Log Levy density of one tail at ``r = |x| > 0``.

    ``lam`` overrides ``tail.lam``; it may be complex, which is how the
    geometry oracle differentiates in the decay by complex step.
    """
    lam = tail.lam if lam is None else lam
    return np.log(tail.c) - (tail.a + 1.0) * np.log(r) + tail_log_tempering(r, lam, gaussian)


def tail_density(r, tail: Tail, gaussian: bool):
    return np.exp(tail_log_density(r, tail, gaussian))


def stable_levy_density(x, c_plus: float, c_minus: float, a_plus: float, a_minus: float):
    """Untempered stable Levy density ``C± / |x|^(a±+1)``."""
    return _two_sided(
        x,
        lambda r: c_plus / r ** (a_plus + 1.0),
        lambda r: c_minus / r ** (a_minus + 1.0),
    )


def tempering(x, spec: ProcessSpec):
    """``exp(-λ± |x|)`` for GTS/CTS, ``exp(-λ± x² / 2)`` for RDTS."""
    g = is_gaussian_tempered(spec)
    tp, tm = spec.tails
    return _two_sided(
        x,
        lambda r: np.exp(tail_log_tempering(r, tp.lam, g)),
        lambda r: np.exp(tail_log_tempering(r, tm.lam, g)),
    )


def levy_density(x, spec: ProcessSpec):
    """Tempered stable Levy density of ``spec`` (unit time)."""
    g = is_gaussian_tempered(spec)
    tp, tm = spec.tails
    return _two_sided(
        x,
        lambda r: tp.c / r ** (tp.a + 1.0) * np.exp(tail_log_tempering(r, tp.lam, g)),
        lambda r: tm.c / r ** (tm.a + 1.0) * np.exp(tail_log_tempering(r, tm.lam, g)),
    )


def tail_log_rn(r, lam: float, lam_t: float, gaussian: bool):
    """``ψ`` on one half-line: ``-(λ - λ~) r`` or ``-(λ - λ~) r² / 2``."""
    d = lam - lam_t
    return -d * r * r * 0.5 if gaussian else -d * r


def log_radon_nikodym(x, pair: MeasurePair):
    """``ψ(x) = log dν^P/dν^Q (x)``; the shared stable part cancels exactly."""
    g = is_gaussian_tempered(pair.p)
    (lp, lm), (qp, qm) = pair.p.lambdas, pair.q.lambdas
    return _two_sided(
        x,
        lambda r: tail_log_rn(r, lp, qp, g),
        lambda r: tail_log_rn(r, lm, qm, g),
    )


def radon_nikodym(x, pair: MeasurePair):
    """``dν^P/dν^Q (x)`` from the closed-form exponent, never as a 0/0 ratio."""
    psi = log_radon_nikodym(x, pair)
    return _finish(x, np.exp(psi))
