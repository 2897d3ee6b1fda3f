"""
Brute-force ground truth for small instances: class enumeration, Euler circuit
backtracking, necklace counting and exact determinants.
"""
import itertools
import logging
import math
from collections import Counter, defaultdict
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp
from sympy import Matrix
from sympy.utilities.iterables import multiset_permutations

from app.config import Settings, resolve_settings
from app.errors import DomainError, GuardExceededError, NotEulerianError
from app.models import Alphabet, CyclicWord, Quiver
from app.schemas import ClassEnumeration, SpinParams
from app.services.entropy_service import divisors, totient
from app.services.quiver_service import word_kgram_counts
from app.services.spin_service import word_energy

logger = logging.getLogger(__name__)


def _least_rotation(seq: Tuple[int, ...]) -> Tuple[int, ...]:
    return min(seq[r:] + seq[:r] for r in range(len(seq)))


def _cyclic_key(seq: Tuple[int, ...], k: int) -> Tuple:
    extended = seq + seq[:k]
    counts = Counter(extended[j: j + k + 1] for j in range(len(seq)))
    return tuple(sorted(counts.items()))


def _rearrangement_count(word: CyclicWord) -> int:
    counts = np.bincount(word.indices)
    total = math.factorial(word.length)
    for c in counts:
        total //= math.factorial(int(c))
    return total


def enumerate_class(word: CyclicWord, k: int, settings: Optional[Settings] = None) -> ClassEnumeration:
    """
    All distinct cyclic words with the same order-k quiver as `word`.

    Words sharing a quiver share their symbol counts, so the search runs over the
    rearrangements of `word`.
    """
    settings = resolve_settings(settings)
    target = word_kgram_counts(word, k)
    space = _rearrangement_count(word)
    if space > settings.enumeration_limit:
        raise GuardExceededError(
            f"{space} rearrangements exceed the enumeration limit of {settings.enumeration_limit}")
    target_key = tuple(sorted(target.items()))

    members = []
    for perm in multiset_permutations([int(i) for i in word.indices]):
        seq = tuple(perm)
        if seq != _least_rotation(seq):
            continue
        if _cyclic_key(seq, k) == target_key:
            members.append(seq)
    members.sort()
    logger.info(f"Enumerated {space} rearrangements of {word.text}: {len(members)} class members")
    return ClassEnumeration(
        representative=word.text,
        k=k,
        members=[word.alphabet.render(m) for m in members],
        count=len(members),
    )


def necklace_classes(alphabet: Alphabet, ell: int, k: int,
                     settings: Optional[Settings] = None) -> List[ClassEnumeration]:
    """Every necklace of length ell grouped by its order-k quiver"""
    settings = resolve_settings(settings)
    space = alphabet.size ** ell
    if space > settings.enumeration_limit:
        raise GuardExceededError(f"{space} words exceed the enumeration limit of {settings.enumeration_limit}")
    groups: Dict[Tuple, List[Tuple[int, ...]]] = defaultdict(list)
    for seq in itertools.product(range(alphabet.size), repeat=ell):
        if seq == _least_rotation(seq):
            groups[_cyclic_key(seq, k)].append(seq)
    classes = []
    for members in groups.values():
        rendered = [alphabet.render(m) for m in sorted(members)]
        classes.append(ClassEnumeration(representative=rendered[0], k=k, members=rendered, count=len(rendered)))
    return sorted(classes, key=lambda c: c.representative)


def count_euler_circuits(q: Quiver, settings: Optional[Settings] = None) -> int:
    """
    Euler circuits by backtracking, parallel edges distinguishable. The first
    edge is fixed, so rotations of the same circuit are counted once.
    """
    settings = resolve_settings(settings)
    total = q.total_edges
    if total > settings.circuit_edge_limit:
        raise GuardExceededError(f"{total} edges exceed the backtracking limit of {settings.circuit_edge_limit}")
    if not q.is_balanced():
        raise NotEulerianError("Euler circuits need in-degree = out-degree everywhere")
    if total == 0:
        return 0

    edges = [(u, v) for u, v, _ in q.edges()]
    start = min(u for u, _ in edges)
    first = next(i for i, (u, _) in enumerate(edges) if u == start)
    remaining = [m for _, _, m in q.edges()]
    outgoing: Dict[int, List[int]] = defaultdict(list)
    for i, (u, _) in enumerate(edges):
        outgoing[u].append(i)

    @lru_cache(maxsize=None)
    def walk(current: int, state: Tuple[int, ...]) -> int:
        if not any(state):
            return 1 if current == start else 0
        count = 0
        for i in outgoing[current]:
            if state[i]:
                after = state[:i] + (state[i] - 1,) + state[i + 1:]
                count += state[i] * walk(edges[i][1], after)
        return count

    remaining[first] -= 1
    return walk(edges[first][1], tuple(remaining))


def burnside_necklaces(n: int, ell: int) -> int:
    """Number of necklaces of length ell over n symbols"""
    if n < 1 or ell < 1:
        raise DomainError(f"Necklace count needs n >= 1 and ell >= 1, got n={n}, ell={ell}")
    count = sum(totient(d) * n ** (ell // d) for d in divisors(ell)) // ell
    if count >= 2 ** 64:
        raise GuardExceededError(f"Necklace count for n={n}, ell={ell} does not fit in 64 bits")
    return count


def exact_spanning_trees(q: Quiver, settings: Optional[Settings] = None) -> int:
    """Fraction-free integer determinant of the Laplacian minor"""
    settings = resolve_settings(settings)
    keep = np.flatnonzero(q.out_degrees + q.in_degrees > 0)
    if keep.size > settings.exact_determinant_limit:
        raise GuardExceededError(
            f"{keep.size} vertices exceed the exact determinant limit of {settings.exact_determinant_limit}")
    if keep.size <= 1:
        return 1
    dense = q.toarray()[np.ix_(keep, keep)]
    laplacian = np.diag(dense.sum(axis=1)) - dense
    minor = Matrix(laplacian[1:, 1:].tolist())
    return int(minor.det(method="bareiss"))


def exhaustive_log_partition(params: SpinParams, settings: Optional[Settings] = None) -> float:
    """log of the Boltzmann sum over all 2^ell binary strings"""
    settings = resolve_settings(settings)
    if params.ell > settings.exhaustive_spin_limit:
        raise GuardExceededError(
            f"ell={params.ell} exceeds the exhaustive spin limit of {settings.exhaustive_spin_limit}")
    alphabet = Alphabet.binary()
    exponents = [
        -params.beta * word_energy(CyclicWord(np.array(bits), alphabet), params)
        for bits in itertools.product((0, 1), repeat=params.ell)
    ]
    return float(logsumexp(exponents))


__all__ = [
    "enumerate_class",
    "necklace_classes",
    "count_euler_circuits",
    "burnside_necklaces",
    "exact_spanning_trees",
    "exhaustive_log_partition",
]
