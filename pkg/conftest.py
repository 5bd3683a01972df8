import os
import sys

import pytest

ROOT = os.path.dirname(os.path.abspath(__file__))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from src.numtheory.modular import prime_context  # noqa: E402


@pytest.fixture
def ctx7():
    return prime_context(7)


@pytest.fixture
def ctx5():
    return prime_context(5)


@pytest.fixture
def ctx11():
    return prime_context(11)


@pytest.fixture(params=[3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97])
def small_prime(request):
    return request.param
