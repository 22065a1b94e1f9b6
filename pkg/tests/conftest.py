import math

import pytest

from lapconv.kernel import BallIndicator, Constant
from lapconv.metric_space import Circle, Interval, Torus2

TWO_PI = 2.0 * math.pi


@pytest.fixture
def circle():
    return Circle(TWO_PI)


@pytest.fixture
def ball():
    return BallIndicator(math.pi / 4, a=0.2, C_omega=0.64, m_prime=1.0)


@pytest.fixture
def const():
    return Constant(1.0, a=0.5)


@pytest.fixture(params=["interval", "circle", "torus"])
def any_space(request):
    return {"interval": Interval(1.0), "circle": Circle(TWO_PI), "torus": Torus2((1.0, 2.0))}[request.param]
