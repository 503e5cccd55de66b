"""Information geometry of tempered stable processes.

Closed-form alpha-divergences, Fisher metrics, alpha-connections and
Jeffreys/shrinkage priors for GTS, CTS and RDTS processes, each paired with
an independent numerical oracle.
"""

from tsgeo.errors import (
    ConvergenceError,
    DomainError,
    MassError,
    NotEquivalentError,
    PoleError,
    TsgeoError,
)
from tsgeo.params import (
    CtsParams,
    GtsParams,
    MeasurePair,
    ModelKind,
    ProcessSpec,
    RdtsParams,
    check_equivalent,
    kl_finiteness_domain,
    make_equivalent,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "CtsParams",
    "DomainError",
    "GtsParams",
    "MassError",
    "MeasurePair",
    "ModelKind",
    "NotEquivalentError",
    "PoleError",
    "ProcessSpec",
    "RdtsParams",
    "TsgeoError",
    "__version__",
    "check_equivalent",
    "kl_finiteness_domain",
    "make_equivalent",
    "validate",
]
