# tests/test_similarity.py
import io

import numpy as np
import pytest
from Bio import Phylo
from scipy.cluster import hierarchy

from app.errors import AlphabetError, DeBruijnError, LabelCountError
from app.models import Alphabet, CyclicWord, DistanceMatrix
from app.services.entropy_service import relative_entropy
from app.services.similarity_service import (
    annotate_clades,
    distance_matrix,
    levenshtein,
    linkage,
    newick_export,
)
from tests.conftest import binary, random_binary_word


def _random_matrix(rng, size):
    raw = rng.random((size, size))
    values = np.triu(raw, 1)
    values = values + values.T
    return DistanceMatrix(labels=tuple(f"t{i}" for i in range(size)), values=values)


def test_levenshtein_baseline():
    assert levenshtein("ABRACADABRA", "ABARACARBAD") == 5
    assert levenshtein("ABRACADABRA", "ABRACADABRA") == 0
    assert levenshtein("", "ABC") == 3


@pytest.mark.parametrize("m", [2, 3])
@pytest.mark.parametrize("ell", [4, 8])
def test_levenshtein_of_block_words(m, ell):
    """0^(ml) 1^(ml) against (0^l 1^l)^m"""
    u = "0" * (m * ell) + "1" * (m * ell)
    v = ("0" * ell + "1" * ell) * m
    assert levenshtein(u, v) == 2 * (m // 2) * ell
    assert levenshtein(binary(u), binary(v)) == 2 * (m // 2) * ell


def test_levenshtein_dynamic_programme_agrees(rng):
    """Vectorised rows against the library on random binary words"""
    for _ in range(50):
        u = random_binary_word(rng, int(rng.integers(1, 30)))
        v = random_binary_word(rng, int(rng.integers(1, 30)))
        assert levenshtein(u, v) == levenshtein(u.text, v.text)
        assert levenshtein(list(u.text), list(v.text)) == levenshtein(u.text, v.text)


def test_levenshtein_of_cyclic_word_against_text():
    """A cyclic word is read once from its first symbol"""
    assert levenshtein(binary("0101"), "0110") == 2
    assert levenshtein("0110", binary("0101")) == 2
    assert levenshtein(binary("0101"), list("0101")) == 0


def test_distance_matrix_of_abracadabra_pair(abracadabra, abaracarbad):
    matrix = distance_matrix([abracadabra, abaracarbad], 1)
    assert np.array_equal(matrix.values, np.zeros((2, 2)))
    assert matrix.labels == ("0", "1")


def test_distance_matrix_matches_pairwise(rng):
    words = [random_binary_word(rng, 32) for _ in range(3)]
    matrix = distance_matrix(words, 2, labels=["a", "b", "c"])
    for i in range(3):
        assert matrix.values[i, i] == 0.0
        for j in range(3):
            if i != j:
                assert matrix.values[i, j] == relative_entropy(words[i], words[j], 2).nats


def test_normalized_matrix(rng):
    """Entries divided by the entropy of the concatenated pair"""
    words = [random_binary_word(rng, 40) for _ in range(4)]
    raw = distance_matrix(words, 2)
    normalized = distance_matrix(words, 2, normalize=True)
    assert normalized.normalized
    assert np.all(np.diag(normalized.normalizers) >= 0)
    for i in range(4):
        for j in range(i + 1, 4):
            denominator = normalized.normalizers[i, j]
            if denominator > 0:
                assert normalized.values[i, j] == pytest.approx(raw.values[i, j] / denominator)
    assert normalized.fallback_pairs() == []


def test_normalized_zero_over_zero():
    words = [binary("0000"), binary("0000")]
    matrix = distance_matrix(words, 1, normalize=True)
    assert matrix.values[0, 1] == 0.0
    assert matrix.fallback_pairs() == []


def test_distance_matrix_preconditions(abracadabra):
    with pytest.raises(AlphabetError):
        distance_matrix([abracadabra, binary("0101")], 1)
    with pytest.raises(LabelCountError):
        distance_matrix([abracadabra, abracadabra], 1, labels=["only"])


def test_distance_matrix_rejects_asymmetry():
    with pytest.raises(DeBruijnError):
        DistanceMatrix(labels=("a", "b"), values=[[0.0, 1.0], [2.0, 0.0]])


@pytest.mark.parametrize("method", ["single", "average", "complete"])
def test_linkage_matches_scipy(rng, method):
    """Same merge heights and clusters as scipy.cluster.hierarchy"""
    d = _random_matrix(rng, 9)
    tree = linkage(d, method)
    reference = hierarchy.linkage(d.condensed(), method=method)

    assert np.allclose(sorted(m.height for m in tree.merges), sorted(reference[:, 2]))
    heights = [m.height for m in tree.merges]
    assert heights == sorted(heights)

    root = hierarchy.to_tree(reference)
    expected = set()

    def collect(node):
        if not node.is_leaf():
            expected.add(tuple(sorted(node.pre_order())))
            collect(node.get_left())
            collect(node.get_right())

    collect(root)
    assert set(tree.clusters().values()) == expected


def test_linkage_tree_shape(rng):
    d = _random_matrix(rng, 6)
    tree = linkage(d)
    assert tree.root == 10
    used = [c for m in tree.merges for c in (m.left, m.right)]
    assert sorted(used) == list(range(10))
    assert tree.leaves(tree.root) == tuple(range(6))
    assert tree.merges[-1].size == 6


def test_linkage_tie_break():
    """Equal distances merge the lowest pair of slots first"""
    d = DistanceMatrix(labels=("a", "b", "c"), values=np.ones((3, 3)) - np.eye(3))
    tree = linkage(d, "single")
    assert (tree.merges[0].left, tree.merges[0].right) == (0, 1)


def test_linkage_preconditions():
    single = DistanceMatrix(labels=("a",), values=[[0.0]])
    with pytest.raises(DeBruijnError):
        linkage(single)
    with pytest.raises(DeBruijnError):
        linkage(DistanceMatrix(labels=("a", "b"), values=[[0.0, 1.0], [1.0, 0.0]]), "ward")


def test_newick_branch_lengths():
    values = np.array([[0.0, 2.0, 6.0], [2.0, 0.0, 6.0], [6.0, 6.0, 0.0]])
    tree = linkage(DistanceMatrix(labels=("a", "b", "c"), values=values))
    newick = newick_export(tree, ["a", "b", "c"])
    assert newick == "((a:2,b:2):4,c:6);"

    parsed = Phylo.read(io.StringIO(newick), "newick")
    assert sorted(t.name for t in parsed.get_terminals()) == ["a", "b", "c"]
    assert parsed.distance("a", "c") == pytest.approx(12.0)


def test_newick_quotes_unsafe_labels():
    tree = linkage(DistanceMatrix(labels=("x", "y"), values=[[0.0, 1.0], [1.0, 0.0]]))
    newick = newick_export(tree, ["Homo sapiens", "O'Brien"], {2: "Hominidae"})
    assert newick == "('Homo sapiens':1,'O''Brien':1)Hominidae;"
    with pytest.raises(LabelCountError):
        newick_export(tree, ["only"])


def test_annotate_clades():
    values = np.array([
        [0.0, 1.0, 5.0, 5.0],
        [1.0, 0.0, 5.0, 5.0],
        [5.0, 5.0, 0.0, 1.0],
        [5.0, 5.0, 1.0, 0.0],
    ])
    tree = linkage(DistanceMatrix(labels=("a", "b", "c", "d"), values=values))
    lineages = [
        ["Eukaryota", "Primates", "Hominidae", "Homo"],
        ["Eukaryota", "Primates", "Hominidae", "Pan"],
        ["Eukaryota", "Primates", "Cercopithecidae", "Macaca"],
        ["Eukaryota", "Primates", "Cercopithecidae", "Papio"],
    ]
    labels = {a.node: a.label for a in annotate_clades(tree, lineages)}
    nodes = {tree.leaves(node): node for node in tree.internal_nodes}
    assert labels[nodes[(0, 1)]] == "Hominidae"
    assert labels[nodes[(2, 3)]] == "Cercopithecidae"
    assert labels[tree.root] == "Eukaryota"


def _mutate(rng, ancestor, rate):
    """Point substitutions, each to one of the three other bases"""
    bases = "ACGT"
    return "".join(
        rng.choice([b for b in bases if b != s]) if rng.random() < rate else s
        for s in ancestor
    )


def test_synthetic_clades_are_recovered(rng):
    """Three random ACGT ancestors with 2%, 5% and 10% point mutants form three clades"""
    alphabet = Alphabet.from_string("ACGT")
    words, clades = [], []
    for _ in range(3):
        ancestor = "".join(rng.choice(list("ACGT"), size=600))
        members = [ancestor] + [_mutate(rng, ancestor, rate) for rate in (0.02, 0.05, 0.10)]
        clades.append(tuple(range(len(words), len(words) + len(members))))
        words.extend(CyclicWord.from_symbols(m, alphabet) for m in members)

    matrix = distance_matrix(words, 3, normalize=True)
    tree = linkage(matrix, "average")
    found = set(tree.clusters().values())
    for clade in clades:
        assert clade in found
