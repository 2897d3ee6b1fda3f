"""
Corpus comparison: relative-entropy distance matrices, the edit-distance
baseline, agglomerative linkage, Newick export and clade annotation.
"""
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import Levenshtein
import numpy as np

from app.config import Settings, resolve_settings
from app.errors import AlphabetError, DeBruijnError, LabelCountError
from app.models import CyclicWord, DistanceMatrix, LinkageTree, Merge
from app.schemas import CladeAnnotation
from app.services.entropy_service import componentwise_entropy
from app.services.quiver_service import boxminus, build_quiver, concat_quiver

logger = logging.getLogger(__name__)

LINKAGE_METHODS = ("single", "average", "complete")
NEWICK_UNSAFE = re.compile(r"[\s()\[\]':;,]")


def distance_matrix(words: Sequence[CyclicWord], k: int, normalize: bool = False,
                    labels: Optional[Sequence[str]] = None,
                    settings: Optional[Settings] = None) -> DistanceMatrix:
    """
    Pairwise relative entropies. With `normalize`, each entry is divided by the
    entropy of the quiver of the concatenated pair.
    """
    settings = resolve_settings(settings)
    size = len(words)
    if size == 0:
        raise DeBruijnError("Distance matrix needs at least one word")
    labels = [str(i) for i in range(size)] if labels is None else [str(label) for label in labels]
    if len(labels) != size:
        raise LabelCountError(f"{len(labels)} labels for {size} words")
    alphabet = words[0].alphabet
    if any(w.alphabet != alphabet for w in words):
        raise AlphabetError("All words in a corpus must share one alphabet")

    quivers = [build_quiver(w, k, settings) for w in words]

    def concat_entropy(i: int, j: int) -> float:
        joined = concat_quiver(words[i], words[j], quivers[i], quivers[j], settings)
        return componentwise_entropy(joined, settings).nats

    def fill(pair: Tuple[int, int]) -> Tuple[float, float]:
        i, j = pair
        numerator = componentwise_entropy(boxminus(quivers[i], quivers[j]), settings).nats
        denominator = concat_entropy(i, j) if normalize else 0.0
        return numerator, denominator

    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    logger.info(f"Computing {len(pairs)} pairwise relative entropies at k={k} (normalize={normalize})")
    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        results = list(pool.map(fill, pairs))

    values = np.zeros((size, size), dtype=np.float64)
    fallback = np.zeros((size, size), dtype=bool)
    normalizers = None
    if normalize:
        normalizers = np.zeros((size, size), dtype=np.float64)
        with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
            np.fill_diagonal(normalizers, list(pool.map(lambda i: concat_entropy(i, i), range(size))))

    for (i, j), (numerator, denominator) in zip(pairs, results):
        value = numerator
        if normalize:
            normalizers[i, j] = normalizers[j, i] = denominator
            if denominator > 0:
                value = numerator / denominator
            elif numerator > 0:
                logger.warning(f"Zero normalizer for pair ({labels[i]}, {labels[j]}); keeping raw entropy")
                fallback[i, j] = fallback[j, i] = True
            else:
                value = 0.0
        values[i, j] = values[j, i] = value

    return DistanceMatrix(labels=tuple(labels), values=values, k=k, normalized=normalize,
                          fallback=fallback, normalizers=normalizers)


def _edit_distance_dp(a: np.ndarray, b: np.ndarray) -> int:
    """Unit-cost edit distance, one vectorised row per symbol of a"""
    previous = np.arange(len(b) + 1, dtype=np.int64)
    offsets = np.arange(len(b) + 1, dtype=np.int64)
    for i, symbol in enumerate(a, start=1):
        candidate = np.empty_like(previous)
        candidate[0] = i
        candidate[1:] = np.minimum(previous[1:] + 1, previous[:-1] + (b != symbol))
        # insertions: current[j] = min over t <= j of candidate[t] + (j - t)
        previous = np.minimum.accumulate(candidate - offsets) + offsets
    return int(previous[-1])


def levenshtein(u: Union[str, Sequence, CyclicWord], v: Union[str, Sequence, CyclicWord]) -> int:
    """Edit distance between two linear words"""
    if isinstance(u, str) and isinstance(v, str):
        return int(Levenshtein.distance(u, v))
    if isinstance(u, CyclicWord) and isinstance(v, CyclicWord):
        if u.alphabet != v.alphabet:
            raise AlphabetError("Edit distance needs both words over the same alphabet")
        return _edit_distance_dp(u.indices, v.indices)
    # a cyclic word against plain text compares decoded symbols
    if isinstance(u, CyclicWord):
        u = u.symbols()
    if isinstance(v, CyclicWord):
        v = v.symbols()
    tokens: Dict = {}
    a = np.array([tokens.setdefault(t, len(tokens)) for t in u], dtype=np.int64)
    b = np.array([tokens.setdefault(t, len(tokens)) for t in v], dtype=np.int64)
    return _edit_distance_dp(a, b)


def linkage(d: DistanceMatrix, method: str = "average") -> LinkageTree:
    """
    Agglomerative clustering with Lance-Williams updates.

    Each active cluster sits in the slot of its smallest leaf. Ties go to the
    lexicographically smallest pair of slots.
    """
    if method not in LINKAGE_METHODS:
        raise DeBruijnError(f"Unknown linkage method {method!r}, expected one of {LINKAGE_METHODS}")
    n = d.size
    if n < 2:
        raise DeBruijnError("Linkage needs at least two leaves")

    dist = d.values.copy()
    active = list(range(n))
    node = list(range(n))
    size = [1] * n
    merges: List[Merge] = []
    for step in range(n - 1):
        block = dist[np.ix_(active, active)]
        block[np.tril_indices(len(active))] = np.inf
        flat = int(np.argmin(block))
        a, b = divmod(flat, len(active))
        i, j = active[a], active[b]
        height = float(dist[i, j])
        merges.append(Merge(left=node[i], right=node[j], height=height, size=size[i] + size[j]))

        for h in active:
            if h in (i, j):
                continue
            if method == "single":
                updated = min(dist[i, h], dist[j, h])
            elif method == "complete":
                updated = max(dist[i, h], dist[j, h])
            else:
                updated = (size[i] * dist[i, h] + size[j] * dist[j, h]) / (size[i] + size[j])
            dist[i, h] = dist[h, i] = updated
        size[i] += size[j]
        node[i] = n + step
        active.remove(j)

    logger.info(f"{method.capitalize()} linkage of {n} leaves, root height {merges[-1].height:.6g}")
    return LinkageTree(n_leaves=n, merges=tuple(merges), method=method)


def _quote_label(label: str) -> str:
    if NEWICK_UNSAFE.search(label):
        return "'" + label.replace("'", "''") + "'"
    return label


def _format_length(value: float) -> str:
    return f"{value:.12g}"


def newick_export(tree: LinkageTree, labels: Sequence[str],
                  internal_labels: Optional[Mapping[int, str]] = None) -> str:
    """Newick string with branch lengths parent height minus child height"""
    if len(labels) != tree.n_leaves:
        raise LabelCountError(f"{len(labels)} labels for a tree with {tree.n_leaves} leaves")
    internal_labels = internal_labels or {}

    def render(node: int) -> str:
        if tree.is_leaf(node):
            return _quote_label(str(labels[node]))
        left, right = tree.children(node)
        height = tree.height(node)
        parts = [f"{render(child)}:{_format_length(height - tree.height(child))}" for child in (left, right)]
        return f"({','.join(parts)}){_quote_label(internal_labels.get(node, ''))}"

    return render(tree.root) + ";"


def annotate_clades(tree: LinkageTree, leaf_taxa: Sequence[Sequence[str]]) -> List[CladeAnnotation]:
    """
    Label each internal node with the most general taxon shared by all of its
    leaves and by no other leaf; empty when there is none.
    """
    if len(leaf_taxa) != tree.n_leaves:
        raise LabelCountError(f"{len(leaf_taxa)} lineages for a tree with {tree.n_leaves} leaves")
    lineages = [list(taxa) for taxa in leaf_taxa]
    annotations = []
    for node in tree.internal_nodes:
        members = tree.leaves(node)
        inside = set(lineages[members[0]]).intersection(*(lineages[m] for m in members[1:]))
        outside = set().union(*(lineages[m] for m in range(tree.n_leaves) if m not in members))
        distinctive = inside - outside
        label = next((taxon for taxon in lineages[members[0]] if taxon in distinctive), "")
        annotations.append(CladeAnnotation(node=node, label=label, leaves=list(members)))
    return annotations


__all__ = [
    "LINKAGE_METHODS",
    "distance_matrix",
    "levenshtein",
    "linkage",
    "newick_export",
    "annotate_clades",
]
