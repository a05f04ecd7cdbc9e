import os

import pytest
from hypothesis import HealthCheck, settings

from kvvstream.fixtures import make_fixture

settings.register_profile(
    "default", max_examples=50, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def fix_a():
    return make_fixture("fix-a")


@pytest.fixture(scope="session")
def fix_b():
    return make_fixture("fix-b")


@pytest.fixture(scope="session")
def fix_b_ws(fix_b):
    from kvvstream import predecessor as pr
    return pr.witness_sets(fix_b)
