import pytest
from mpmath import mp

from hypmop import suites


@pytest.fixture(autouse=True)
def prec512():
    """Every test runs at 512 bits from an empty cache."""
    with mp.workprec(512):
        suites.clear_caches()
        yield
    suites.clear_caches()
