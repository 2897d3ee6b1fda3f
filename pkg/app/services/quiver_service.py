"""
De Bruijn quiver construction and quiver algebra.

Vertices are k-grams and edges are the (k+1)-grams of a cyclic word, wrap-around
edges included. Small vertex spaces use radix indexing over all n^k k-grams,
larger ones index only the k-grams that occur.
"""
import logging
from collections import Counter
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import sparse
from scipy.sparse import csgraph

from app.config import Settings, resolve_settings
from app.errors import AlphabetError, DomainError, OrderError, QuiverMismatchError
from app.models import Alphabet, ComponentLabeling, CyclicWord, KGram, Quiver

logger = logging.getLogger(__name__)

# (kgrams or None for radix, square int64 matrix) before validation as a Quiver
RawQuiver = Tuple[Optional[Tuple[KGram, ...]], sparse.csr_matrix]


def uses_radix_scheme(n: int, k: int, settings: Optional[Settings] = None) -> bool:
    return n ** k <= resolve_settings(settings).dense_vertex_limit


def _check_order(word: CyclicWord, k: int) -> None:
    if k < 1 or k >= word.length:
        raise OrderError(f"Order k={k} must satisfy 1 <= k < {word.length} (word length)")


def edge_windows(word: CyclicWord, k: int) -> np.ndarray:
    """All cyclic (k+1)-grams of the word, one row per starting position"""
    extended = np.concatenate([word.indices, word.indices[:k]])
    return sliding_window_view(extended, k + 1)


def _raw_from_windows(windows: np.ndarray, weights: np.ndarray, k: int, n: int,
                      settings: Settings) -> RawQuiver:
    """Accumulate weighted (k+1)-gram rows into an adjacency matrix"""
    windows = np.asarray(windows, dtype=np.int64).reshape(-1, k + 1)
    if uses_radix_scheme(n, k, settings):
        radix = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
        src = windows[:, :k] @ radix
        dst = windows[:, 1:] @ radix
        size = n ** k
        matrix = sparse.csr_matrix((weights, (src, dst)), shape=(size, size), dtype=np.int64)
        return None, matrix
    grams = np.concatenate([windows[:, :k], windows[:, 1:]])
    unique, inverse = np.unique(grams, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    src, dst = inverse[: len(windows)], inverse[len(windows):]
    size = len(unique)
    matrix = sparse.csr_matrix((weights, (src, dst)), shape=(size, size), dtype=np.int64)
    return tuple(map(tuple, unique.tolist())), matrix


def _align(parts: Sequence[RawQuiver]) -> Tuple[Optional[Tuple[KGram, ...]], List[sparse.csr_matrix]]:
    """Re-index matrices onto a common vertex set"""
    schemes = {kgrams is None for kgrams, _ in parts}
    if len(schemes) > 1:
        raise QuiverMismatchError("Cannot combine a radix-indexed quiver with a sparse-indexed one")
    if schemes == {True}:
        shapes = {m.shape for _, m in parts}
        if len(shapes) > 1:
            raise QuiverMismatchError(f"Quiver shapes differ: {sorted(shapes)}")
        return None, [m for _, m in parts]

    union = tuple(sorted(set().union(*(kgrams for kgrams, _ in parts))))
    position = {g: i for i, g in enumerate(union)}
    size = len(union)
    aligned = []
    for kgrams, matrix in parts:
        remap = np.array([position[g] for g in kgrams], dtype=np.int64)
        coo = matrix.tocoo()
        aligned.append(sparse.csr_matrix(
            (coo.data, (remap[coo.row], remap[coo.col])), shape=(size, size), dtype=np.int64))
    return union, aligned


def _check_compatible(a: Quiver, b: Quiver) -> None:
    if a.k != b.k:
        raise QuiverMismatchError(f"Quiver orders differ: {a.k} vs {b.k}")
    if a.alphabet != b.alphabet:
        raise QuiverMismatchError("Quivers are over different alphabets")


def build_quiver(word: CyclicWord, k: int, settings: Optional[Settings] = None) -> Quiver:
    """Order-k de Bruijn quiver of a cyclic word, one edge per cyclic position"""
    settings = resolve_settings(settings)
    _check_order(word, k)
    windows = edge_windows(word, k)
    weights = np.ones(len(windows), dtype=np.int64)
    kgrams, matrix = _raw_from_windows(windows, weights, k, word.alphabet.size, settings)
    return Quiver(k, word.alphabet, matrix, kgrams)


def word_kgram_counts(word: CyclicWord, k: int) -> Counter:
    """Multiset of cyclic (k+1)-grams; two words share a quiver iff these agree"""
    _check_order(word, k)
    return Counter(map(tuple, edge_windows(word, k).tolist()))


def boxminus(a: Quiver, b: Quiver) -> Quiver:
    """max(A - B, 0) + max(B - A, 0)^T, elementwise"""
    _check_compatible(a, b)
    kgrams, (ma, mb) = _align([(a.kgrams, a.matrix), (b.kgrams, b.matrix)])
    diff = (ma - mb).tocsr()
    positive = diff.maximum(0)
    negative = (-diff).maximum(0)
    return Quiver(a.k, a.alphabet, (positive + negative.transpose()).tocsr(), kgrams)


def boxplus(a: Quiver, b: Quiver) -> Quiver:
    return boxminus(a, b.transpose())


def strongly_connected_components(q: Quiver) -> ComponentLabeling:
    """
    Label the strongly connected components of the nonzero-degree vertices.
    Labels run from 1 in order of each component's lowest vertex.
    """
    degree = q.out_degrees + q.in_degrees
    retained = np.flatnonzero(degree > 0)
    if retained.size == 0:
        return ComponentLabeling(retained, np.zeros(0, dtype=np.int64))
    restricted = q.matrix[retained][:, retained]
    _, raw = csgraph.connected_components(restricted, directed=True, connection="strong")
    _, first_seen = np.unique(raw, return_index=True)
    order = np.argsort(first_seen)
    relabel = np.empty(len(order), dtype=np.int64)
    relabel[order] = np.arange(1, len(order) + 1)
    return ComponentLabeling(retained, relabel[raw])


def concat_quiver(u: CyclicWord, v: CyclicWord, qu: Quiver, qv: Quiver,
                  settings: Optional[Settings] = None) -> Quiver:
    """
    Quiver of the cyclic concatenation uv from the quivers of u and v.

    The k wrap edges of each word are removed and replaced by the k edges that
    cross each junction of uv.
    """
    settings = resolve_settings(settings)
    _check_compatible(qu, qv)
    if u.alphabet != qu.alphabet or v.alphabet != qv.alphabet:
        raise AlphabetError("Words and quivers are over different alphabets")
    k = qu.k
    _check_order(u, k)
    _check_order(v, k)
    if qu.total_edges != u.length or qv.total_edges != v.length:
        raise QuiverMismatchError("Quivers were not built from the given words")

    lu, lv = u.length, v.length
    joined = u.concat(v)
    removed = np.concatenate([edge_windows(u, k)[lu - k:], edge_windows(v, k)[lv - k:]])
    joined_windows = edge_windows(joined, k)
    added = np.concatenate([joined_windows[lu - k: lu], joined_windows[lu + lv - k:]])
    windows = np.concatenate([removed, added])
    weights = np.concatenate([-np.ones(len(removed), dtype=np.int64), np.ones(len(added), dtype=np.int64)])
    correction = _raw_from_windows(windows, weights, k, u.alphabet.size, settings)

    kgrams, (mu, mv, mc) = _align([(qu.kgrams, qu.matrix), (qv.kgrams, qv.matrix), correction])
    total = (mu + mv + mc).tocsr()
    total.eliminate_zeros()
    if total.nnz and total.data.min() < 0:
        raise QuiverMismatchError("Quivers were not built from the given words")
    if kgrams is not None:
        # sparse scheme lists only k-grams that occur in uv
        live = np.flatnonzero(np.asarray(total.sum(axis=1)).ravel() > 0)
        kgrams = tuple(kgrams[i] for i in live)
        total = total[live][:, live]
    return Quiver(k, u.alphabet, total, kgrams)


def binary_quiver(x00: int, xstar: int, ell: int) -> Quiver:
    """Order-1 binary quiver [[x00, x*], [x*, x11]] with x11 = ell - x00 - 2x*"""
    x11 = ell - x00 - 2 * xstar
    if min(x00, xstar, x11) < 0:
        raise DomainError(f"No binary word of length {ell} has x00={x00}, x*={xstar}")
    return Quiver.from_dense([[x00, xstar], [xstar, x11]], k=1, alphabet=Alphabet.binary())


__all__ = [
    "build_quiver",
    "boxminus",
    "boxplus",
    "strongly_connected_components",
    "concat_quiver",
    "binary_quiver",
    "word_kgram_counts",
    "edge_windows",
    "uses_radix_scheme",
]
