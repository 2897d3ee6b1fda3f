"""
Entropy engine: Euler-circuit based class counts of de Bruijn quivers.

For an Eulerian quiver with adjacency matrix A, the number of cyclic words sharing
it is

    W(A) = sum over d | gcd(A) of phi(d) * c(A/d) / (d * (A/d)!)

where c is the BEST-theorem circuit count t(A) * prod_v (deg v - 1)! and (A/d)! is
the product of factorials of the entries. Everything is carried as natural logs.
"""
import logging
import math
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu
from scipy.special import gammaln, logsumexp
from sympy import divisors as sympy_divisors
from sympy import totient as sympy_totient
from sympy.combinatorics import Permutation

from app.config import Settings, resolve_settings
from app.errors import (
    DisconnectedQuiverError,
    DomainError,
    EmptyQuiverError,
    NotEulerianError,
    NumericalInstabilityError,
    QuiverMismatchError,
)
from app.models import CyclicWord, Quiver
from app.schemas import ComponentEntropy, CountReport, DivisorTerm, EntropyValue
from app.services.quiver_service import (
    binary_quiver,
    boxminus,
    build_quiver,
    strongly_connected_components,
)

logger = logging.getLogger(__name__)


class KMode(str, Enum):
    INFORMATIVE = "informative"
    LINEAR_TIME = "linear-time"


def divisors(x: int) -> List[int]:
    if x < 1:
        raise DomainError(f"divisors() needs a positive integer, got {x}")
    return [int(d) for d in sympy_divisors(int(x))]


def totient(d: int) -> int:
    if d < 1:
        raise DomainError(f"totient() needs a positive integer, got {d}")
    return int(sympy_totient(int(d)))


def snap_integer(log_value: float, settings: Optional[Settings] = None) -> Optional[int]:
    """exp(log_value) as an int when it is within the snap tolerance of one"""
    settings = resolve_settings(settings)
    if not math.isfinite(log_value) or log_value > math.log(settings.snap_limit):
        return None
    value = math.exp(log_value)
    nearest = round(value)
    if nearest >= 1 and abs(value - nearest) <= settings.snap_tolerance * nearest:
        return int(nearest)
    return None


def _log_factorials(m: int) -> np.ndarray:
    """table[i] = log(i!) for i in 0..m"""
    return np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, m + 1, dtype=np.float64)))])


def _permutation_sign(perm: np.ndarray) -> int:
    return int(Permutation(perm.tolist()).signature())


def _log_cofactor(matrix: sparse.csr_matrix, settings: Settings) -> Tuple[float, int]:
    """
    log|det| and sign of the Laplacian minor with the first vertex deleted.
    The matrix must already be restricted to nonzero-degree vertices.
    """
    size = matrix.shape[0]
    if size <= 1:
        return 0.0, 1
    out_degrees = np.asarray(matrix.sum(axis=1)).ravel().astype(np.float64)
    laplacian = (sparse.diags(out_degrees) - matrix.astype(np.float64)).tocsc()
    minor = laplacian[1:, 1:]
    if minor.shape[0] <= settings.dense_determinant_limit:
        sign, logdet = np.linalg.slogdet(minor.toarray())
        return float(logdet), int(sign)
    try:
        lu = splu(minor.tocsc())
    except RuntimeError as e:
        # splu refuses exactly singular matrices
        logger.warning(f"Sparse LU failed on a {minor.shape[0]}-vertex minor: {e}")
        return -math.inf, 0
    pivots = lu.U.diagonal()
    if np.any(pivots == 0):
        return -math.inf, 0
    sign = int(np.prod(np.sign(pivots)))
    sign *= _permutation_sign(lu.perm_r) * _permutation_sign(lu.perm_c)
    return float(np.sum(np.log(np.abs(pivots)))), sign


def _retained(q: Quiver) -> sparse.csr_matrix:
    keep = np.flatnonzero(q.out_degrees + q.in_degrees > 0)
    return q.matrix[keep][:, keep].tocsr()


def _require_balanced(q: Quiver) -> None:
    if not q.is_balanced():
        bad = np.flatnonzero(q.out_degrees != q.in_degrees)
        raise NotEulerianError(
            f"In-degree differs from out-degree at {len(bad)} vertices, first {q.vertex_text(int(bad[0]))!r}")


def _require_connected(matrix: sparse.csr_matrix) -> None:
    count, _ = csgraph.connected_components(matrix, directed=True, connection="strong")
    if count > 1:
        raise DisconnectedQuiverError(f"Quiver has {count} strongly connected components")


def _checked_log_trees(matrix: sparse.csr_matrix, settings: Settings) -> float:
    logdet, sign = _log_cofactor(matrix, settings)
    if sign <= 0 or not math.isfinite(logdet):
        raise NumericalInstabilityError(
            f"Laplacian cofactor is not positive (sign={sign}, log|det|={logdet})")
    if logdet < -settings.comparison_tolerance:
        raise NumericalInstabilityError(f"Spanning tree count below 1 (log={logdet})")
    return max(logdet, 0.0)


def log_spanning_trees(q: Quiver, settings: Optional[Settings] = None) -> float:
    """Natural log of the number of spanning trees oriented towards a fixed vertex"""
    settings = resolve_settings(settings)
    _require_balanced(q)
    matrix = _retained(q)
    if matrix.shape[0] > 1:
        _require_connected(matrix)
    return _checked_log_trees(matrix, settings)


def _eulerian_report(matrix: sparse.csr_matrix, settings: Settings) -> CountReport:
    """Divisor-sum class count of a connected, balanced, edge-bearing matrix"""
    entries = matrix.data.astype(np.int64)
    g = int(np.gcd.reduce(entries))
    max_degree = int(np.asarray(matrix.sum(axis=1)).max())
    log_fact = _log_factorials(max_degree)

    terms: List[DivisorTerm] = []
    log_trees = log_circuits = 0.0
    for d in divisors(g):
        scaled = matrix.copy()
        scaled.data = scaled.data // d
        degrees = np.asarray(scaled.sum(axis=1)).ravel()
        trees = _checked_log_trees(scaled, settings)
        circuits = trees + float(np.sum(log_fact[degrees - 1]))
        phi = totient(d)
        log_term = math.log(phi) + circuits - math.log(d) - float(np.sum(log_fact[scaled.data]))
        terms.append(DivisorTerm(d=d, phi=phi, log_term=log_term))
        if d == 1:
            log_trees, log_circuits = trees, circuits

    log_w = float(logsumexp([t.log_term for t in terms]))
    return CountReport(
        log_spanning_trees=log_trees,
        log_euler_circuits=log_circuits,
        log_W=log_w,
        divisor_terms=terms,
        spanning_trees=snap_integer(log_trees, settings),
        euler_circuits=snap_integer(log_circuits, settings),
        W=snap_integer(log_w, settings),
    )


def eulerian_entropy(q: Quiver, settings: Optional[Settings] = None) -> CountReport:
    """Class count report of a strongly connected Eulerian quiver"""
    settings = resolve_settings(settings)
    if q.total_edges == 0:
        raise EmptyQuiverError("Quiver has no edges")
    _require_balanced(q)
    matrix = _retained(q)
    _require_connected(matrix)
    return _eulerian_report(matrix, settings)


def _canonical_orientation(block: sparse.csr_matrix) -> sparse.csr_matrix:
    """A block or its transpose, whichever has the smaller CSR byte layout"""
    block = block.tocsr()
    block.sort_indices()
    flipped = block.transpose().tocsr()
    flipped.sort_indices()

    def layout(m: sparse.csr_matrix) -> tuple:
        return m.indptr.tobytes(), m.indices.tobytes(), m.data.tobytes()

    return block if layout(block) <= layout(flipped) else flipped


def componentwise_entropy(q: Quiver, settings: Optional[Settings] = None) -> EntropyValue:
    """Sum of component entropies; single-vertex components contribute 0"""
    settings = resolve_settings(settings)
    _require_balanced(q)
    labeling = strongly_connected_components(q)
    components: List[ComponentEntropy] = []
    for component in range(1, labeling.count + 1):
        members = labeling.members(component)
        block = q.matrix[members][:, members].tocsr()
        nats = 0.0
        if len(members) > 1:
            report = _eulerian_report(_canonical_orientation(block), settings)
            nats = 0.0 if report.W == 1 else max(report.log_W, 0.0)
        components.append(ComponentEntropy(
            component=component, vertices=len(members), edges=int(block.sum()), nats=nats))
    total = float(sum(c.nats for c in components))
    return EntropyValue(nats=total, components=components, count=snap_integer(total, settings))


def _with_base(value: EntropyValue, base: Optional[float]) -> EntropyValue:
    if base is None:
        return value
    return value.model_copy(update={"base": float(base), "value": value.in_base(base)})


def word_entropy(word: CyclicWord, k: int, base: Optional[float] = None,
                 settings: Optional[Settings] = None) -> EntropyValue:
    """Order-k de Bruijn entropy; `value` is reported in base n unless `base` is given"""
    settings = resolve_settings(settings)
    quiver = build_quiver(word, k, settings)
    if base is None and word.alphabet.size > 1:
        base = word.alphabet.size
    return _with_base(componentwise_entropy(quiver, settings), base)


def relative_entropy(word: CyclicWord, other: CyclicWord, k: int, base: Optional[float] = None,
                     settings: Optional[Settings] = None) -> EntropyValue:
    settings = resolve_settings(settings)
    if word.alphabet != other.alphabet:
        raise QuiverMismatchError("Relative entropy needs both words over the same alphabet")
    difference = boxminus(build_quiver(word, k, settings), build_quiver(other, k, settings))
    return _with_base(componentwise_entropy(difference, settings), base)


def _log_binomial(n: float, r: float) -> float:
    return float(gammaln(n + 1) - gammaln(r + 1) - gammaln(n - r + 1))


def implied_x11(x00: int, xstar: int, ell: int) -> int:
    if ell < 1:
        raise DomainError(f"Length must be positive, got {ell}")
    if x00 < 0 or xstar < 0:
        raise DomainError(f"Counts must be nonnegative, got x00={x00}, x*={xstar}")
    x11 = ell - x00 - 2 * xstar
    if x11 < 0:
        raise DomainError(f"x00={x00}, x*={xstar} imply x11={x11} < 0 for length {ell}")
    if xstar == 0 and x00 not in (0, ell):
        raise DomainError(f"x*=0 only occurs for the constant words, not x00={x00}")
    return x11


def binary_W1_closed_form(x00: int, xstar: int, ell: int) -> float:
    """log W1 of binary words with x00 '00'-pairs and x* '01'-pairs"""
    x11 = implied_x11(x00, xstar, ell)
    if xstar == 0:
        return 0.0
    zeros, ones = x00 + xstar, xstar + x11
    terms = [
        math.log(totient(d))
        + _log_binomial(zeros / d, xstar / d)
        + _log_binomial(ones / d, xstar / d)
        for d in divisors(math.gcd(x00, x11, xstar))
    ]
    prefactor = math.log(xstar) - math.log(zeros) - math.log(ones)
    return max(prefactor + float(logsumexp(terms)), 0.0)


def binary_log_linear_count(x00: int, xstar: int, ell: int) -> float:
    """
    log of the number of binary strings of length ell, read cyclically, with the
    given pair counts: ell/x* * C(x00+x*-1, x*-1) * C(x11+x*-1, x*-1).
    """
    x11 = implied_x11(x00, xstar, ell)
    if xstar == 0:
        return 0.0
    return (math.log(ell) - math.log(xstar)
            + _log_binomial(x00 + xstar - 1, xstar - 1)
            + _log_binomial(x11 + xstar - 1, xstar - 1))


def binary_pairs(ell: int) -> Iterator[Tuple[int, int]]:
    """Every (x00, x*) realised by some binary cyclic word of length ell"""
    for xstar in range(0, ell // 2 + 1):
        if xstar == 0:
            yield 0, 0
            yield ell, 0
            continue
        for x00 in range(0, ell - 2 * xstar + 1):
            yield x00, xstar


def binary_w1_grid(ell: int) -> List[Tuple[int, int, float]]:
    return [(x00, xstar, binary_W1_closed_form(x00, xstar, ell)) for x00, xstar in binary_pairs(ell)]


def relative_entropy_grid(ell: int, x00: int, xstar: int,
                          settings: Optional[Settings] = None) -> List[Tuple[int, int, float, int]]:
    """
    Entropy of boxminus(A', A) for the fixed binary word class A = (x00, x*) against
    every class A' of the same length. Rows are (x00', x*', nats, entry sum).
    """
    settings = resolve_settings(settings)
    implied_x11(x00, xstar, ell)
    reference = binary_quiver(x00, xstar, ell)
    rows = []
    for other_x00, other_xstar in binary_pairs(ell):
        difference = boxminus(binary_quiver(other_x00, other_xstar, ell), reference)
        nats = componentwise_entropy(difference, settings).nats
        rows.append((other_x00, other_xstar, nats, difference.total_edges))
    logger.info(f"Relative entropy grid for length {ell} filled with {len(rows)} cells")
    return rows


def suggest_k(ell: int, n: int, mode: KMode = KMode.INFORMATIVE, omega: Optional[float] = None,
              settings: Optional[Settings] = None) -> int:
    """floor(log_n ell), or floor(log_n(ell) / omega) for linear-time work, at least 1"""
    if ell < 2 or n < 2:
        raise DomainError(f"suggest_k needs ell >= 2 and n >= 2, got ell={ell}, n={n}")
    mode = KMode(mode)
    floor_log, power = 0, n
    while power <= ell:
        floor_log += 1
        power *= n
    if mode is KMode.INFORMATIVE:
        return max(1, floor_log)
    omega = resolve_settings(settings).omega if omega is None else omega
    if float(omega).is_integer():
        k = floor_log // int(omega)
    else:
        k = math.floor(math.log(ell) / math.log(n) / omega + 1e-12)
    return max(1, k)


__all__ = [
    "KMode",
    "divisors",
    "totient",
    "snap_integer",
    "log_spanning_trees",
    "eulerian_entropy",
    "componentwise_entropy",
    "word_entropy",
    "relative_entropy",
    "binary_W1_closed_form",
    "binary_log_linear_count",
    "implied_x11",
    "binary_pairs",
    "binary_w1_grid",
    "relative_entropy_grid",
    "suggest_k",
]
