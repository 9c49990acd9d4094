import os
import random

import pytest
from hypothesis import HealthCheck, settings as hyp_settings, strategies as st

from settings import reload_settings
from suites import random_expr

hyp_settings.register_profile('default', deadline=None, max_examples=40,
                              suppress_health_check=[HealthCheck.too_slow])
hyp_settings.register_profile('ci', deadline=None, max_examples=200,
                              suppress_health_check=[HealthCheck.too_slow])
hyp_settings.load_profile(os.environ.get('HYPOTHESIS_PROFILE', 'default'))

DERIVATIONS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'derivations')


@pytest.fixture(autouse=True)
def fresh_settings():
    """Settings are cached per process; start and end every test from the environment."""
    reload_settings()
    yield
    reload_settings()


@pytest.fixture
def derivation():
    def path(name: str) -> str:
        return os.path.join(DERIVATIONS, name)
    return path


rationals = st.fractions(min_value=-8, max_value=8, max_denominator=64)


@st.composite
def exact_dags(draw, arity: int = 1, depth: int = 3):
    """Random exact series DAG; the seed comes from hypothesis so failures shrink to a seed."""
    seed = draw(st.integers(min_value=0, max_value=2 ** 32 - 1))
    return random_expr(random.Random(seed), arity, depth, exact=True)


@st.composite
def series_dags(draw, arity: int = 1, depth: int = 3):
    """Random DAG over every node kind, translations and partial integrals included."""
    seed = draw(st.integers(min_value=0, max_value=2 ** 32 - 1))
    return random_expr(random.Random(seed), arity, depth)

