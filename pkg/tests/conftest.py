import numpy as np
import pytest
from hypothesis import strategies as st

from tsgeo.params import validate

# Indexes are kept away from 1 and from the ends of (0, 2), where Γ(-a)
# and Γ(1 - a) blow up and every closed form loses digits.
index = st.one_of(st.floats(0.1, 0.9), st.floats(1.1, 1.9))
scale = st.floats(0.2, 3.0)
decay = st.floats(0.5, 5.0)


def gts(a_plus=0.5, a_minus=0.5, c_plus=1.0, c_minus=1.0, lp=2.0, lm=3.0, m=0.0, t=1.0):
    return validate(
        "GTS",
        dict(a_plus=a_plus, a_minus=a_minus, c_plus=c_plus, c_minus=c_minus,
             lambda_plus=lp, lambda_minus=lm, m=m, horizon_t=t),
    )


def rdts(a_plus=0.5, a_minus=0.5, c_plus=1.0, c_minus=1.0, lp=2.0, lm=3.0, m=0.0, t=1.0):
    return validate(
        "RDTS",
        dict(a_plus=a_plus, a_minus=a_minus, c_plus=c_plus, c_minus=c_minus,
             lambda_plus=lp, lambda_minus=lm, m=m, horizon_t=t),
    )


def cts(a=0.5, c=1.0, lp=2.0, lm=3.0, m=0.0, t=1.0):
    return validate("CTS", dict(a=a, c=c, lambda_plus=lp, lambda_minus=lm, m=m, horizon_t=t))


@st.composite
def specs(draw, kind):
    if kind == "CTS":
        return cts(draw(index), draw(scale), draw(decay), draw(decay))
    make = gts if kind == "GTS" else rdts
    return make(draw(index), draw(index), draw(scale), draw(scale), draw(decay), draw(decay))


def random_spec(rng, kind):
    def a():
        return rng.uniform(0.1, 0.9) if rng.random() < 0.5 else rng.uniform(1.1, 1.9)

    if kind == "CTS":
        return cts(a(), rng.uniform(0.2, 3), rng.uniform(0.5, 5), rng.uniform(0.5, 5))
    make = gts if kind == "GTS" else rdts
    return make(a(), a(), rng.uniform(0.2, 3), rng.uniform(0.2, 3), rng.uniform(0.5, 5), rng.uniform(0.5, 5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
