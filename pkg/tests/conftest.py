import math

import numpy as np
import pytest
from hypothesis import strategies as st

from circleprev.lifting import Lifting
from circleprev.probe import Probe

AMP = 1.0 / (2.1 * math.pi)


def fixed_point_map() -> Lifting:
    """x + 0.1 + sin(2 pi x) / (2.1 pi): has fixed points, derivative dips to 1 - 2/2.1."""
    return Lifting(0.1, ((1, AMP, 0.0),))


def rigid(c0: float) -> Lifting:
    return Lifting.rotation(c0)


@pytest.fixture
def F_fix():
    return fixed_point_map()


@pytest.fixture(scope="session")
def probe_II():
    return Probe.type_two(fixed_point_map(), rigid(0.2 * math.pi), grid_points=2**14)


@pytest.fixture(scope="session")
def probe_I():
    return Probe.type_one(fixed_point_map(), 1.0)


finite = st.floats(-0.03, 0.03, allow_nan=False)


@st.composite
def small_liftings(draw, max_k=3, r=2):
    """Liftings with small harmonics (certified diffeomorphisms by the coefficient bound)."""
    c0 = draw(st.floats(-2, 2, allow_nan=False))
    ks = draw(st.lists(st.integers(1, max_k), unique=True, max_size=max_k))
    return Lifting(c0, tuple((k, draw(finite) / k, draw(finite) / k) for k in ks), r)


@st.composite
def any_liftings(draw, max_k=3, r=2):
    """Liftings whose harmonics may be large enough to break monotonicity."""
    c0 = draw(st.floats(-2, 2, allow_nan=False))
    ks = draw(st.lists(st.integers(1, max_k), unique=True, max_size=max_k))
    amp = st.floats(-0.5, 0.5, allow_nan=False)
    return Lifting(c0, tuple((k, draw(amp), draw(amp)) for k in ks), r)


def random_lifting(rng: np.random.Generator, amp=0.02, r=2) -> Lifting:
    return Lifting(float(rng.uniform(-1, 1)),
                   tuple((k, float(rng.uniform(-amp, amp)), float(rng.uniform(-amp, amp)))
                         for k in (1, 2, 3)), r)
