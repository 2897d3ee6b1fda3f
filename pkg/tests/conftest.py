# tests/conftest.py
import numpy as np
import pytest

from app.config import Settings
from app.models import Alphabet, CyclicWord

ABCDR = Alphabet.from_string("ABCDR")


def word(text, alphabet=None):
    """Cyclic word from a string, alphabet inferred unless given"""
    return CyclicWord.from_symbols(text, alphabet)


def binary(text):
    return CyclicWord.from_symbols(text, Alphabet.binary())


@pytest.fixture
def settings():
    """Default numerical settings, independent of the environment"""
    return Settings()


@pytest.fixture
def sparse_settings():
    """Settings that force k-gram discovery instead of radix indexing"""
    return Settings(dense_vertex_limit=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def abracadabra():
    return word("ABRACADABRA", ABCDR)


@pytest.fixture
def abaracarbad():
    return word("ABARACARBAD", ABCDR)


def random_binary_word(rng, length):
    return CyclicWord(rng.integers(0, 2, size=length), Alphabet.binary())
