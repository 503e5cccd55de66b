"""Parameter records, validation and equivalent-measure pairs.

Every computation in the package consumes a :class:`ProcessSpec`: a model
family tag, a validated parameter record and the horizon ``T``. Divergences
and Radon-Nikodym derivatives additionally require a :class:`MeasurePair`,
which can only be built from two specs satisfying the equivalent martingale
measure (EMM) conditions of their family.

Examples
--------
>>> base = validate("CTS", {"a": 0.5, "c": 1.0, "lambda_plus": 2.0,
...                         "lambda_minus": 3.0, "m": 0.0})
>>> pair = make_equivalent(base, 1.5, 2.5)
>>> pair.q.lambdas
(1.5, 2.5)
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Any, Mapping, NamedTuple, Optional, Union

from tsgeo.errors import DomainError, NotEquivalentError
from tsgeo.special import gamma_real

DRIFT_TOL = 1e-12


class ModelKind(str, Enum):
    GTS = "GTS"
    CTS = "CTS"
    RDTS = "RDTS"

    @classmethod
    def parse(cls, tag: Union[str, "ModelKind"]) -> "ModelKind":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).upper())
        except ValueError:
            raise DomainError(f"unknown model kind {tag!r}; expected GTS, CTS or RDTS") from None


class Tail(NamedTuple):
    """One side of a two-sided Levy density: index, scale and decay."""

    a: float
    c: float
    lam: float


def _check_index(name: str, a: float) -> None:
    if not math.isfinite(a):
        raise DomainError(f"{name} must be finite")
    if a == 1.0:
        raise DomainError(f"{name} = 1 excluded")
    if not 0.0 < a < 2.0:
        raise DomainError(f"{name} = {a:g} outside (0, 2)")


def _check_positive(name: str, v: float) -> None:
    if not (math.isfinite(v) and v > 0.0):
        raise DomainError(f"{name} = {v:g} ≤ 0" if math.isfinite(v) else f"{name} must be finite")


@dataclass(frozen=True)
class _TwoTailParams:
    a_plus: float
    a_minus: float
    c_plus: float
    c_minus: float
    lambda_plus: float
    lambda_minus: float
    m: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, float(getattr(self, f.name)))
        _check_index("a_plus", self.a_plus)
        _check_index("a_minus", self.a_minus)
        for name in ("c_plus", "c_minus", "lambda_plus", "lambda_minus"):
            _check_positive(name, getattr(self, name))
        if not math.isfinite(self.m):
            raise DomainError("m must be finite")

    def tails(self) -> tuple[Tail, Tail]:
        return (
            Tail(self.a_plus, self.c_plus, self.lambda_plus),
            Tail(self.a_minus, self.c_minus, self.lambda_minus),
        )


@dataclass(frozen=True)
class GtsParams(_TwoTailParams):
    """Generalized tempered stable parameters ``(a±, C±, λ±, m)``."""


@dataclass(frozen=True)
class RdtsParams(_TwoTailParams):
    """Rapidly decreasing tempered stable parameters ``(a±, C±, λ±, m)``.

    The tempering is ``exp(-λ± x² / 2)``, so ``λ±`` has units of 1/x².
    """


@dataclass(frozen=True)
class CtsParams:
    """Classical tempered stable (CGMY) parameters ``(a, C, λ+, λ-, m)``."""

    a: float
    c: float
    lambda_plus: float
    lambda_minus: float
    m: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, float(getattr(self, f.name)))
        _check_index("a", self.a)
        for name in ("c", "lambda_plus", "lambda_minus"):
            _check_positive(name, getattr(self, name))
        if not math.isfinite(self.m):
            raise DomainError("m must be finite")

    def tails(self) -> tuple[Tail, Tail]:
        return (
            Tail(self.a, self.c, self.lambda_plus),
            Tail(self.a, self.c, self.lambda_minus),
        )

    def as_gts(self) -> GtsParams:
        """The same law written as GTS under ``a± = a``, ``C± = C``."""
        return GtsParams(
            self.a, self.a, self.c, self.c, self.lambda_plus, self.lambda_minus, self.m
        )


Params = Union[GtsParams, CtsParams, RdtsParams]

_RECORD = {ModelKind.GTS: GtsParams, ModelKind.CTS: CtsParams, ModelKind.RDTS: RdtsParams}


@dataclass(frozen=True)
class ProcessSpec:
    """A model family, its parameters and the horizon ``T``."""

    kind: ModelKind
    params: Params
    horizon_t: float = 1.0

    def __post_init__(self):
        kind = ModelKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if type(self.params) is not _RECORD[kind]:
            raise DomainError(
                f"{kind.value} needs {_RECORD[kind].__name__}, got {type(self.params).__name__}"
            )
        t = float(self.horizon_t)
        object.__setattr__(self, "horizon_t", t)
        _check_positive("horizon_t", t)

    @property
    def tails(self) -> tuple[Tail, Tail]:
        return self.params.tails()

    @property
    def lambdas(self) -> tuple[float, float]:
        return (self.params.lambda_plus, self.params.lambda_minus)

    @property
    def m(self) -> float:
        return self.params.m

    def with_decays(self, lambda_plus: float, lambda_minus: float) -> "ProcessSpec":
        p = dataclasses.replace(self.params, lambda_plus=lambda_plus, lambda_minus=lambda_minus)
        return ProcessSpec(self.kind, p, self.horizon_t)

    def with_m(self, m: float) -> "ProcessSpec":
        return ProcessSpec(self.kind, dataclasses.replace(self.params, m=m), self.horizon_t)

    def with_horizon(self, horizon_t: float) -> "ProcessSpec":
        return ProcessSpec(self.kind, self.params, horizon_t)

    def as_gts(self) -> "ProcessSpec":
        """GTS view of a CTS spec; GTS specs are returned unchanged."""
        if self.kind is ModelKind.CTS:
            return ProcessSpec(ModelKind.GTS, self.params.as_gts(), self.horizon_t)
        if self.kind is ModelKind.GTS:
            return self
        raise DomainError("RDTS has no GTS view")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value}
        d.update(dataclasses.asdict(self.params))
        d["horizon_t"] = self.horizon_t
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ProcessSpec":
        d = dict(d)
        try:
            kind = d.pop("kind")
        except KeyError:
            raise DomainError("missing field 'kind'") from None
        return validate(kind, d)

    @classmethod
    def from_json(cls, text: str) -> "ProcessSpec":
        return cls.from_dict(json.loads(text))


def validate(kind: Union[str, ModelKind], raw: Union[Mapping[str, Any], Params]) -> ProcessSpec:
    """Build a :class:`ProcessSpec` from a raw field mapping.

    ``raw`` holds the snake_case fields of the family's record; ``m`` defaults
    to 0 and ``horizon_t`` to 1. A ready-made record is also accepted.

    Raises
    ------
    DomainError
        Naming the first missing field or violated bound.
    """
    kind = ModelKind.parse(kind)
    record = _RECORD[kind]
    if isinstance(raw, (GtsParams, CtsParams, RdtsParams)):
        return ProcessSpec(kind, raw)
    raw = dict(raw)
    horizon = raw.pop("horizon_t", 1.0)
    names = [f.name for f in fields(record)]
    unknown = set(raw) - set(names)
    if unknown:
        raise DomainError(f"unknown field(s) for {kind.value}: {', '.join(sorted(unknown))}")
    values = {}
    for name in names:
        if name in raw:
            try:
                values[name] = float(raw[name])
            except (TypeError, ValueError):
                raise DomainError(f"{name} must be a real number, got {raw[name]!r}") from None
        elif name != "m":
            raise DomainError(f"missing field {name!r} for {kind.value}")
    try:
        horizon = float(horizon)
    except (TypeError, ValueError):
        raise DomainError(f"horizon_t must be a real number, got {horizon!r}") from None
    return ProcessSpec(kind, record(**values), horizon)


def _drift_tail(kind: ModelKind, tail: Tail, new_lam: float) -> float:
    """Mean-jump difference of one tail between decays ``tail.lam`` and ``new_lam``."""
    a, c, lam = tail
    if kind is ModelKind.RDTS:
        # Gaussian tempering exp(-lam x^2 / 2): the jump mean scales as lam^((a-1)/2)
        h = 0.5 * (a - 1.0)
        return 2.0 ** (-0.5 * (1.0 + a)) * c * gamma_real(0.5 * (1.0 - a)) * (lam**h - new_lam**h)
    return c * gamma_real(1.0 - a) * (lam ** (a - 1.0) - new_lam ** (a - 1.0))


def drift_shift(spec: ProcessSpec, new_lambda_plus: float, new_lambda_minus: float) -> float:
    """``m - m~`` required by the EMM drift relation when the decays move."""
    tp, tm = spec.tails
    return _drift_tail(spec.kind, tp, new_lambda_plus) - _drift_tail(spec.kind, tm, new_lambda_minus)


def _shared_mismatch(p: ProcessSpec, q: ProcessSpec) -> Optional[str]:
    if p.kind is not q.kind:
        return f"model kinds differ ({p.kind.value} vs {q.kind.value})"
    if p.horizon_t != q.horizon_t:
        return f"horizons differ ({p.horizon_t:g} vs {q.horizon_t:g})"
    names = ("c", "a") if p.kind is ModelKind.CTS else ("c_plus", "c_minus", "a_plus", "a_minus")
    for name in names:
        vp, vq = getattr(p.params, name), getattr(q.params, name)
        if vp != vq:
            return f"{name} differs ({vp:g} vs {vq:g})"
    return None


@dataclass(frozen=True)
class MeasurePair:
    """Two EMM-equivalent specs ``(P, Q)``; construction verifies the conditions."""

    p: ProcessSpec
    q: ProcessSpec
    drift_tol: float = DRIFT_TOL

    def __post_init__(self):
        msg = _shared_mismatch(self.p, self.q)
        if msg:
            raise NotEquivalentError(msg)
        want = drift_shift(self.p, *self.q.lambdas)
        got = self.p.m - self.q.m
        if not abs(got - want) <= self.drift_tol:
            raise NotEquivalentError(
                f"drift relation violated: m - m~ = {got:.15g}, required {want:.15g}"
            )

    @property
    def kind(self) -> ModelKind:
        return self.p.kind

    def swapped(self) -> "MeasurePair":
        return MeasurePair(self.q, self.p, self.drift_tol)

    def with_horizon(self, horizon_t: float) -> "MeasurePair":
        return MeasurePair(self.p.with_horizon(horizon_t), self.q.with_horizon(horizon_t), self.drift_tol)

    def to_dict(self) -> dict[str, Any]:
        return {"p": self.p.to_dict(), "q": self.q.to_dict()}


def make_equivalent(base: ProcessSpec, new_lambda_plus: float, new_lambda_minus: float) -> MeasurePair:
    """Pair ``base`` with the equivalent measure having decays ``new_lambda_±``.

    The new measure copies indexes, scales and horizon; its location is
    solved from the family's drift relation.
    """
    _check_positive("new_lambda_plus", float(new_lambda_plus))
    _check_positive("new_lambda_minus", float(new_lambda_minus))
    shift = drift_shift(base, new_lambda_plus, new_lambda_minus)
    q = base.with_decays(new_lambda_plus, new_lambda_minus).with_m(base.m - shift)
    return MeasurePair(base, q)


def check_equivalent(p: ProcessSpec, q: ProcessSpec, drift_tol: float = DRIFT_TOL) -> MeasurePair:
    """Return ``MeasurePair(p, q)`` or raise :class:`NotEquivalentError`."""
    return MeasurePair(p, q, drift_tol)


@dataclass(frozen=True)
class Finiteness:
    """Result of :func:`kl_finiteness_domain`; truthy iff the closed form applies.

    ``kim_lee_plus``/``kim_lee_minus`` report ``λ± < 2 λ~±`` and are only
    populated at ``alpha == -1``.
    """

    finite: bool
    mixed_decays: tuple[float, float]
    kim_lee_plus: Optional[bool] = None
    kim_lee_minus: Optional[bool] = None

    def __bool__(self) -> bool:
        return self.finite


def mixed_decay(lam: float, lam_t: float, alpha: float) -> float:
    return 0.5 * (1.0 - alpha) * lam + 0.5 * (1.0 + alpha) * lam_t


def kl_finiteness_domain(pair: MeasurePair, alpha: float) -> Finiteness:
    """Whether the closed-form alpha-divergence of ``pair`` is well defined."""
    alpha = float(alpha)
    if not math.isfinite(alpha):
        return Finiteness(False, (math.nan, math.nan))
    (lp, lm), (qp, qm) = pair.p.lambdas, pair.q.lambdas
    mixed = (mixed_decay(lp, qp, alpha), mixed_decay(lm, qm, alpha))
    finite = -1.0 <= alpha <= 1.0 or (mixed[0] > 0.0 and mixed[1] > 0.0)
    if alpha == -1.0:
        return Finiteness(finite, mixed, lp < 2.0 * qp, lm < 2.0 * qm)
    return Finiteness(finite, mixed)
