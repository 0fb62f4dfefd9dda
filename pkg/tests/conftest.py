import time

import pytest

from chainkit.morse import catalog_surface, numerical_morse_data

_CACHE = {}


def numeric_data(name, negate=False):
    """Numerical Morse data for a catalog surface, computed once per session.

    Returns ``(data, seconds)`` where ``seconds`` is the wall time of the first
    computation.
    """
    key = (name, negate)
    if key not in _CACHE:
        surface, f = catalog_surface(name)
        t0 = time.perf_counter()
        data = numerical_morse_data(surface, -f if negate else f)
        _CACHE[key] = (data, time.perf_counter() - t0)
    return _CACHE[key]


@pytest.fixture(scope="session")
def numeric():
    return numeric_data
