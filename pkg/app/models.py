"""
Domain types: alphabets, cyclic words, de Bruijn quivers and the corpus-level
distance matrix and linkage tree built on top of them.
"""
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.spatial.distance import squareform

from app.errors import (
    AlphabetError,
    DeBruijnError,
    DistanceMatrixError,
    LabelCountError,
    QuiverMismatchError,
    WordError,
)

KGram = Tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbols; symbol i has index i"""
    symbols: Tuple[Hashable, ...]
    _index: Dict[Hashable, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if not symbols:
            raise AlphabetError("Alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            duplicates = sorted({str(s) for s in symbols if symbols.count(s) > 1})
            raise AlphabetError(f"Alphabet has duplicate symbols: {', '.join(duplicates)}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def from_string(cls, text: str) -> "Alphabet":
        return cls(tuple(text))

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls(("0", "1"))

    @classmethod
    def inferred(cls, symbols: Iterable[Hashable]) -> "Alphabet":
        """Sorted distinct symbols of a word"""
        return cls(tuple(sorted(set(symbols), key=str)))

    @classmethod
    def of(cls, value: Union["Alphabet", str, Sequence[Hashable]]) -> "Alphabet":
        if isinstance(value, Alphabet):
            return value
        if isinstance(value, str):
            return cls.from_string(value)
        return cls(tuple(value))

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def is_textual(self) -> bool:
        return all(isinstance(s, str) and len(s) == 1 for s in self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: Hashable) -> bool:
        return symbol in self._index

    def index(self, symbol: Hashable) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise AlphabetError(f"Symbol {symbol!r} is not in alphabet {self.render(range(self.size))!r}") from None

    def encode(self, symbols: Iterable[Hashable]) -> np.ndarray:
        return np.array([self.index(s) for s in symbols], dtype=np.int64)

    def decode(self, indices: Iterable[int]) -> List[Hashable]:
        return [self.symbols[int(i)] for i in indices]

    def render(self, indices: Iterable[int]) -> str:
        """Text form of an index sequence; tokens are space separated"""
        decoded = self.decode(indices)
        if self.is_textual:
            return "".join(decoded)
        return " ".join(str(s) for s in decoded)


@dataclass(frozen=True, eq=False)
class CyclicWord:
    """Symbol-index sequence read cyclically: word[j] wraps modulo its length"""
    indices: np.ndarray
    alphabet: Alphabet

    def __post_init__(self):
        indices = np.array(self.indices, dtype=np.int64).ravel()
        if indices.size == 0:
            raise WordError("A cyclic word needs at least one symbol")
        if indices.min() < 0 or indices.max() >= self.alphabet.size:
            raise AlphabetError(f"Word indices must lie in 0..{self.alphabet.size - 1}")
        indices.flags.writeable = False
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_symbols(cls, symbols: Union[str, Sequence[Hashable]],
                     alphabet: Union[Alphabet, str, Sequence[Hashable], None] = None) -> "CyclicWord":
        resolved = Alphabet.of(alphabet) if alphabet is not None else Alphabet.inferred(symbols)
        return cls(resolved.encode(symbols), resolved)

    @property
    def length(self) -> int:
        return int(self.indices.size)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, j: int) -> int:
        return int(self.indices[j % self.length])

    def __iter__(self) -> Iterator[int]:
        # one pass over the indices; __getitem__ wraps and never ends
        return (int(i) for i in self.indices)

    @property
    def text(self) -> str:
        return self.alphabet.render(self.indices)

    def symbols(self) -> List[Hashable]:
        return self.alphabet.decode(self.indices)

    def concat(self, other: "CyclicWord") -> "CyclicWord":
        if other.alphabet != self.alphabet:
            raise AlphabetError("Cannot concatenate words over different alphabets")
        return CyclicWord(np.concatenate([self.indices, other.indices]), self.alphabet)

    def rotate(self, shift: int) -> "CyclicWord":
        return CyclicWord(np.roll(self.indices, -shift), self.alphabet)

    def canonical(self) -> "CyclicWord":
        """Lexicographically least rotation"""
        seq = tuple(int(i) for i in self.indices)
        best = min(seq[r:] + seq[:r] for r in range(len(seq)))
        return CyclicWord(np.array(best, dtype=np.int64), self.alphabet)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CyclicWord):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.indices, other.indices)

    def __hash__(self) -> int:
        return hash((self.alphabet, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"CyclicWord({self.text!r})"


@dataclass(frozen=True, eq=False)
class Quiver:
    """
    Order-k de Bruijn quiver as a sparse nonnegative integer adjacency matrix.

    With ``kgrams`` unset, vertex v is the k-gram whose radix-n digits (most
    significant first) are v. Otherwise vertex v is ``kgrams[v]``; the list is
    sorted and only holds k-grams that were discovered.
    """
    k: int
    alphabet: Alphabet
    matrix: sparse.csr_matrix
    kgrams: Optional[Tuple[KGram, ...]] = None

    def __post_init__(self):
        matrix = sparse.csr_matrix(self.matrix, dtype=np.int64, copy=True)
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        matrix.sort_indices()
        rows, cols = matrix.shape
        expected = self.alphabet.size ** self.k if self.kgrams is None else len(self.kgrams)
        if rows != cols or rows != expected:
            raise QuiverMismatchError(f"Adjacency matrix is {rows}x{cols}, expected {expected}x{expected}")
        if matrix.nnz and matrix.data.min() < 0:
            raise DeBruijnError("Quiver multiplicities must be nonnegative")
        if self.kgrams is not None:
            object.__setattr__(self, "kgrams", tuple(tuple(int(s) for s in g) for g in self.kgrams))
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def zeros(cls, k: int, alphabet: Alphabet, kgrams: Optional[Sequence[KGram]] = None) -> "Quiver":
        size = alphabet.size ** k if kgrams is None else len(kgrams)
        return cls(k, alphabet, sparse.csr_matrix((size, size), dtype=np.int64),
                   None if kgrams is None else tuple(kgrams))

    @classmethod
    def from_dense(cls, array, k: int = 1, alphabet: Optional[Alphabet] = None) -> "Quiver":
        """Wrap a square integer matrix; vertices default to the symbols 0..V-1"""
        array = np.asarray(array, dtype=np.int64)
        if alphabet is None:
            alphabet = Alphabet(tuple(range(array.shape[0])))
        return cls(k, alphabet, sparse.csr_matrix(array))

    @property
    def is_dense_scheme(self) -> bool:
        return self.kgrams is None

    @property
    def n_vertices(self) -> int:
        return self.matrix.shape[0]

    @property
    def out_degrees(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    @property
    def in_degrees(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0)).ravel()

    @property
    def total_edges(self) -> int:
        return int(self.matrix.sum())

    def is_balanced(self) -> bool:
        return bool(np.array_equal(self.out_degrees, self.in_degrees))

    def transpose(self) -> "Quiver":
        return Quiver(self.k, self.alphabet, self.matrix.transpose().tocsr(), self.kgrams)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def vertex_label(self, vertex: int) -> KGram:
        if self.kgrams is not None:
            return self.kgrams[vertex]
        n = self.alphabet.size
        digits = []
        for _ in range(self.k):
            vertex, digit = divmod(vertex, n)
            digits.append(digit)
        return tuple(reversed(digits))

    def vertex_text(self, vertex: int) -> str:
        return self.alphabet.render(self.vertex_label(vertex))

    def vertex_index(self, kgram: Sequence[int]) -> Optional[int]:
        kgram = tuple(int(s) for s in kgram)
        if len(kgram) != self.k:
            raise QuiverMismatchError(f"Expected a {self.k}-gram, got {len(kgram)} symbols")
        if self.kgrams is None:
            code = 0
            for digit in kgram:
                code = code * self.alphabet.size + digit
            return code
        try:
            return self.kgrams.index(kgram)
        except ValueError:
            return None

    def multiplicity(self, source: Sequence[Hashable], target: Sequence[Hashable]) -> int:
        """Number of edges between two k-grams given as symbol sequences"""
        u = self.vertex_index(self.alphabet.encode(source))
        v = self.vertex_index(self.alphabet.encode(target))
        if u is None or v is None:
            return 0
        return int(self.matrix[u, v])

    def edges(self) -> Iterator[Tuple[int, int, int]]:
        coo = self.matrix.tocoo()
        for u, v, m in zip(coo.row, coo.col, coo.data):
            yield int(u), int(v), int(m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Quiver):
            return NotImplemented
        if (self.k, self.alphabet, self.kgrams) != (other.k, other.alphabet, other.kgrams):
            return False
        return (self.matrix != other.matrix).nnz == 0

    __hash__ = None

    def __repr__(self) -> str:
        scheme = "radix" if self.kgrams is None else "sparse"
        return f"Quiver(k={self.k}, vertices={self.n_vertices}, edges={self.total_edges}, scheme={scheme})"


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    """Strongly connected components of the nonzero-degree part of a quiver"""
    vertices: np.ndarray
    labels: np.ndarray

    @property
    def count(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0

    def members(self, component: int) -> np.ndarray:
        return self.vertices[self.labels == component]

    def label_of(self, vertex: int) -> Optional[int]:
        hits = np.flatnonzero(self.vertices == vertex)
        return int(self.labels[hits[0]]) if hits.size else None

    def as_dict(self) -> Dict[int, int]:
        return {int(v): int(c) for v, c in zip(self.vertices, self.labels)}


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: Tuple[str, ...]
    values: np.ndarray
    k: Optional[int] = None
    normalized: bool = False
    fallback: Optional[np.ndarray] = None
    normalizers: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        labels = tuple(str(label) for label in self.labels)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DistanceMatrixError(f"Distance matrix must be square, got shape {values.shape}")
        if len(labels) != values.shape[0]:
            raise LabelCountError(f"{len(labels)} labels for a {values.shape[0]}x{values.shape[0]} matrix")
        if not np.all(np.isfinite(values)) or (values < 0).any():
            raise DistanceMatrixError("Distances must be finite and nonnegative")
        if not np.array_equal(values, values.T):
            raise DistanceMatrixError("Distance matrix is not symmetric")
        if np.any(np.diag(values) != 0):
            raise DistanceMatrixError("Distance matrix has a nonzero diagonal")
        fallback = np.zeros(values.shape, dtype=bool) if self.fallback is None else np.asarray(self.fallback, dtype=bool)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "fallback", fallback)

    @property
    def size(self) -> int:
        return len(self.labels)

    def condensed(self) -> np.ndarray:
        return squareform(self.values, checks=False)

    def fallback_pairs(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.fallback, 1))
        return [(int(i), int(j)) for i, j in zip(rows, cols)]


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class LinkageTree:
    """
    Agglomerative merge sequence. Leaves are nodes 0..N-1 and merge m creates
    node N+m; the root is node 2N-2.
    """
    n_leaves: int
    merges: Tuple[Merge, ...]
    method: str = "average"

    @property
    def root(self) -> int:
        return 2 * self.n_leaves - 2

    @property
    def internal_nodes(self) -> range:
        return range(self.n_leaves, 2 * self.n_leaves - 1)

    def is_leaf(self, node: int) -> bool:
        return node < self.n_leaves

    def merge_of(self, node: int) -> Merge:
        return self.merges[node - self.n_leaves]

    def height(self, node: int) -> float:
        return 0.0 if self.is_leaf(node) else self.merge_of(node).height

    def children(self, node: int) -> Tuple[int, int]:
        merge = self.merge_of(node)
        return merge.left, merge.right

    def leaves(self, node: int) -> Tuple[int, ...]:
        stack, found = [node], []
        while stack:
            current = stack.pop()
            if self.is_leaf(current):
                found.append(current)
            else:
                stack.extend(self.children(current))
        return tuple(sorted(found))

    def clusters(self) -> Dict[int, Tuple[int, ...]]:
        return {node: self.leaves(node) for node in self.internal_nodes}

    def to_scipy(self) -> np.ndarray:
        """Linkage matrix in the layout used by scipy.cluster.hierarchy"""
        return np.array([[m.left, m.right, m.height, m.size] for m in self.merges], dtype=np.float64)
