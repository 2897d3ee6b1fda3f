import math
import re
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, validator

FASTA_SYMBOLS = re.compile(r"^[ACGTN]+$")


class ComponentEntropy(BaseModel):
    """Contribution of one strongly connected component"""
    component: int = Field(..., ge=1, description="Component id, contiguous from 1")
    vertices: int = Field(..., ge=1)
    edges: int = Field(..., ge=0)
    nats: float = Field(..., ge=0)


class EntropyValue(BaseModel):
    """Natural-log magnitude of a class size W, with its per-component breakdown"""
    nats: float = Field(..., ge=0, description="log W in nats")
    components: List[ComponentEntropy] = Field(default_factory=list)
    base: Optional[float] = Field(None, gt=0, description="Base used for `value`")
    value: Optional[float] = Field(None, ge=0, description="nats / log(base)")
    count: Optional[int] = Field(None, ge=1, description="W when exactly recoverable")

    @validator('nats')
    def finite_nats(cls, v):
        if not math.isfinite(v):
            raise ValueError("Entropy must be finite")
        return v

    @validator('base')
    def usable_base(cls, v):
        if v is not None and v == 1:
            raise ValueError("Base 1 has no logarithm")
        return v

    def in_base(self, base: float) -> float:
        return self.nats / math.log(base)

    class Config:
        json_schema_extra = {
            "example": {
                "nats": 2.4849066497880004,
                "components": [{"component": 1, "vertices": 5, "edges": 11, "nats": 2.4849066497880004}],
                "base": 5.0,
                "value": 1.5439593106577,
                "count": 12,
            }
        }


class DivisorTerm(BaseModel):
    d: int = Field(..., ge=1)
    phi: int = Field(..., ge=1)
    log_term: float


class CountReport(BaseModel):
    """Spanning-tree, Euler-circuit and class counts of one Eulerian quiver, in logs"""
    log_spanning_trees: float
    log_euler_circuits: float
    log_W: float
    divisor_terms: List[DivisorTerm]
    spanning_trees: Optional[int] = None
    euler_circuits: Optional[int] = None
    W: Optional[int] = None


class ClassEnumeration(BaseModel):
    representative: str
    k: int = Field(..., ge=1)
    members: List[str] = Field(..., description="Least rotations, lexicographically sorted")
    count: int = Field(..., ge=1)

    @validator('count')
    def count_matches_members(cls, v, values):
        members = values.get('members')
        if members is not None and v != len(members):
            raise ValueError(f"count {v} does not match {len(members)} members")
        return v


class SpinParams(BaseModel):
    """Nearest-neighbour binary spin chain on a ring of `ell` sites"""
    J: float = Field(0.0, description="Coupling")
    K: float = Field(0.0, description="Field")
    beta: float = Field(1.0, ge=0, description="Inverse temperature")
    ell: int = Field(..., ge=2, description="Chain length")
    convention: Literal["standard", "doubled"] = Field(
        "standard", description="standard: coupling -J*s*s' (matches the closed-form energy); doubled: -2J*s*s'")

    @property
    def coupling_prefactor(self) -> float:
        return 1.0 if self.convention == "standard" else 2.0

    @property
    def effective_coupling(self) -> float:
        return self.coupling_prefactor * self.J


class FastaRecord(BaseModel):
    description: str
    sequence: str

    @validator('sequence')
    def nucleotide_sequence(cls, v):
        if not v:
            raise ValueError("Sequence must be nonempty")
        if not FASTA_SYMBOLS.match(v):
            raise ValueError("Sequence must only contain A, C, G, T and N")
        return v


class TaxaLineage(BaseModel):
    """Taxon names ordered from most general to most specific"""
    names: List[str] = Field(..., min_length=1)

    @validator('names')
    def clean_names(cls, v):
        for name in v:
            if not name or name != name.strip() or ';' in name:
                raise ValueError(f"Invalid taxon name: {name!r}")
        return v


class CladeAnnotation(BaseModel):
    node: int = Field(..., ge=0)
    label: str = ""
    leaves: List[int] = Field(default_factory=list)


# =============================================================================
# API request and response bodies
# =============================================================================

class EntropyRequest(BaseModel):
    word: str = Field(..., min_length=2)
    k: Optional[int] = Field(None, ge=1, description="Order; omitted means the informative heuristic")
    alphabet: Optional[str] = Field(None, description="Symbols in order; defaults to the word's sorted symbols")
    base: Optional[float] = Field(None, gt=0, description="Defaults to the alphabet size")

    class Config:
        json_schema_extra = {"example": {"word": "ABRACADABRA", "k": 1, "alphabet": "ABCDR"}}


class EntropyResponse(BaseModel):
    word: str
    k: int
    entropy: EntropyValue


class RelativeEntropyRequest(BaseModel):
    word_a: str = Field(..., min_length=2)
    word_b: str = Field(..., min_length=2)
    k: int = Field(1, ge=1)
    alphabet: Optional[str] = None

    class Config:
        json_schema_extra = {"example": {"word_a": "ABRACADABRA", "word_b": "ABARACARBAD", "k": 1, "alphabet": "ABCDR"}}


class LevenshteinRequest(BaseModel):
    word_a: str
    word_b: str


class LevenshteinResponse(BaseModel):
    distance: int = Field(..., ge=0)


class DistanceMatrixRequest(BaseModel):
    sequences: List[str] = Field(..., min_length=2)
    labels: Optional[List[str]] = None
    k: Optional[int] = Field(None, ge=1)
    normalize: bool = True
    alphabet: str = "ACGTN"

    @validator('labels')
    def labels_match(cls, v, values):
        sequences = values.get('sequences')
        if v is not None and sequences is not None and len(v) != len(sequences):
            raise ValueError("One label per sequence is required")
        return v


class DistanceMatrixResponse(BaseModel):
    labels: List[str]
    values: List[List[float]]
    k: int
    normalized: bool
    fallback_pairs: List[List[int]] = Field(default_factory=list)
    newick: Optional[str] = None


class W1Cell(BaseModel):
    x00: int = Field(..., ge=0)
    xstar: int = Field(..., ge=0)
    log_W: float = Field(..., ge=0)
    W: Optional[int] = None


class TableResponse(BaseModel):
    ell: int
    cells: List[W1Cell]
    total: Optional[int] = None


class SpinResponse(BaseModel):
    params: SpinParams
    ensemble: str
    log_Z: float
    log_Z_per_site: float
    log_thermodynamic_limit: float
    # None when the value overflows a float; the log fields are always set
    Z_per_site: Optional[float] = None
    thermodynamic_limit: Optional[float] = None
    transfer_matrix_log_Z: Optional[float] = None
