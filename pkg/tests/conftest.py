import pytest

from porism import Ellipse, family_sweep, find_caustic

E21 = Ellipse(2.0, 1.0)
CIRCLE = Ellipse(1.0, 1.0)

# family list exercised by the acceptance sweeps
SWEEP_FAMILIES = [(3, 1), (4, 1), (5, 1), (6, 1), (7, 1), (8, 1),
                  (5, 2), (7, 2), (7, 3), (8, 3)]


@pytest.fixture(scope="session")
def ellipse():
    return E21


@pytest.fixture(scope="session")
def circle():
    return CIRCLE


@pytest.fixture(scope="session")
def family_cache():
    """Memoized find_caustic results, shared across the whole run."""
    cache = {}

    def get(n, k, table=E21):
        key = (table.a1, table.a2, n, k)
        if key not in cache:
            cache[key] = find_caustic(table, n, k)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def sweep_cache(family_cache):
    """Memoized 64-phase sweeps for the acceptance families."""
    cache = {}

    def get(n, k, samples=64):
        key = (n, k, samples)
        if key not in cache:
            cache[key] = family_sweep(family_cache(n, k), samples)
        return cache[key]

    return get
