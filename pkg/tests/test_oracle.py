# tests/test_oracle.py
import math

import pytest

from app.config import Settings
from app.errors import DeBruijnError, DomainError, GuardExceededError, NotEulerianError
from app.models import Alphabet, Quiver
from app.services.entropy_service import eulerian_entropy, word_entropy
from app.services.oracle_service import (
    burnside_necklaces,
    count_euler_circuits,
    enumerate_class,
    exact_spanning_trees,
    necklace_classes,
)
from app.services.quiver_service import build_quiver
from tests.conftest import ABCDR, binary, random_binary_word, word

# The twelve words sharing the order-1 quiver of ABRACADABRA, as listed by hand
ABRACADABRA_CLASS = [
    "ABRABRACADA", "ABRABRADACA", "ABRACABRADA", "ABRACADABRA",
    "ABRADABRACA", "ABRADACABRA", "ACABRABRADA", "ACABRADABRA",
    "ACADABRABRA", "ADABRABRACA", "ADABRACABRA", "ADACABRABRA",
]


def _canonical(text, alphabet):
    return word(text, alphabet).canonical().text


def test_abracadabra_class_listing(abracadabra):
    """Exactly the twelve hand-listed words, least rotations in order"""
    result = enumerate_class(abracadabra, 1)
    expected = sorted(_canonical(w, ABCDR) for w in ABRACADABRA_CLASS)
    assert result.members == expected
    assert result.count == 12
    assert len(set(expected)) == 12


def test_barbara_class():
    alphabet = Alphabet.from_string("ABR")
    result = enumerate_class(word("BARBARA", alphabet), 1)
    assert result.members == sorted(_canonical(w, alphabet) for w in ("BARBARA", "BARARBA"))


def test_constant_word_class_is_singleton():
    result = enumerate_class(binary("0000000"), 1)
    assert result.members == ["0000000"]
    assert result.count == 1


def test_enumeration_guard(abracadabra):
    with pytest.raises(GuardExceededError):
        enumerate_class(abracadabra, 1, Settings(enumeration_limit=1000))


def test_euler_circuits_golden(abracadabra):
    assert count_euler_circuits(build_quiver(abracadabra, 1)) == 96
    assert count_euler_circuits(build_quiver(word("BARBARA", "ABR"), 1)) == 8
    assert count_euler_circuits(Quiver.from_dense([[3]])) == 2


def test_euler_circuit_guards(rng):
    with pytest.raises(GuardExceededError):
        count_euler_circuits(build_quiver(random_binary_word(rng, 15), 1))
    with pytest.raises(NotEulerianError):
        count_euler_circuits(Quiver.from_dense([[0, 1], [0, 0]]))


def test_best_count_matches_backtracking(rng):
    """BEST theorem against direct enumeration on connected quivers of at most 12 edges"""
    fixtures = [build_quiver(word("ABRACADABRA", ABCDR), 1), build_quiver(word("ATAGTC", "ACGT"), 1)]
    for length in range(4, 13):
        for k in (1, 2):
            for _ in range(6):
                fixtures.append(build_quiver(random_binary_word(rng, length), k))
    fixtures.append(Quiver.from_dense([[2, 1, 0], [0, 1, 2], [1, 1, 1]]))
    checked = 0
    for q in fixtures:
        try:
            report = eulerian_entropy(q)
        except DeBruijnError:
            continue
        assert report.euler_circuits == count_euler_circuits(q)
        checked += 1
    assert checked > 50


def test_burnside_necklaces():
    assert burnside_necklaces(2, 1) == 2
    assert burnside_necklaces(2, 16) == 4116
    assert burnside_necklaces(3, 6) == 130
    with pytest.raises(DomainError):
        burnside_necklaces(0, 4)
    with pytest.raises(GuardExceededError):
        burnside_necklaces(2, 72)


def test_exact_spanning_trees(abracadabra):
    assert exact_spanning_trees(build_quiver(abracadabra, 1)) == 4
    assert exact_spanning_trees(build_quiver(word("BARBARA", ABCDR), 1)) == 4


@pytest.mark.parametrize("ell", range(3, 13))
@pytest.mark.parametrize("k", [1, 2])
def test_formula_matches_enumeration(ell, k):
    """Every binary necklace of length ell: class size from the formula equals the enumerated class"""
    classes = necklace_classes(Alphabet.binary(), ell, k)
    assert sum(c.count for c in classes) == burnside_necklaces(2, ell)
    for cls in classes:
        assert word_entropy(binary(cls.representative), k).count == cls.count


@pytest.mark.parametrize("ell", range(2, 9))
def test_formula_matches_enumeration_over_three_symbols(ell):
    """Every ternary necklace of length ell at k = 1"""
    alphabet = Alphabet.from_string("ABC")
    classes = necklace_classes(alphabet, ell, 1)
    assert sum(c.count for c in classes) == burnside_necklaces(3, ell)
    for cls in classes:
        assert word_entropy(word(cls.representative, alphabet), 1).count == cls.count


def test_necklace_classes_guard():
    with pytest.raises(GuardExceededError):
        necklace_classes(Alphabet.binary(), 30, 1)


def test_exhaustive_counts_match_log_domain(rng):
    """Bareiss determinant against the floating log-determinant"""
    for _ in range(20):
        q = build_quiver(random_binary_word(rng, 40), 3)
        try:
            report = eulerian_entropy(q)
        except DeBruijnError:
            continue
        assert math.log(exact_spanning_trees(q)) == pytest.approx(report.log_spanning_trees, abs=1e-9)
