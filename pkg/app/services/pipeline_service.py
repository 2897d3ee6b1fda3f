import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from app.config import Settings, resolve_settings
from app.errors import DeBruijnError, LabelCountError
from app.models import Alphabet, CyclicWord, DistanceMatrix, LinkageTree
from app.schemas import CladeAnnotation, FastaRecord, TaxaLineage
from app.services.entropy_service import KMode, suggest_k
from app.services.io_service import read_fasta, read_genbank_lineages, species_label, unique_labels
from app.services.similarity_service import annotate_clades, distance_matrix, linkage, newick_export

logger = logging.getLogger(__name__)

FASTA_ALPHABET = "ACGTN"


def resolve_k(order: Union[int, str], words: List[CyclicWord], settings: Optional[Settings] = None) -> int:
    """An explicit order, or 'auto', 'auto:informative', 'auto:linear-time' on the shortest word"""
    if isinstance(order, int):
        return order
    order = str(order).strip().lower()
    if order.isdigit():
        return int(order)
    if order in ("auto", "auto:informative"):
        mode = KMode.INFORMATIVE
    elif order == "auto:linear-time":
        mode = KMode.LINEAR_TIME
    else:
        raise DeBruijnError(f"Unrecognised order {order!r}; use an integer, auto, auto:informative or auto:linear-time")
    shortest = min(w.length for w in words)
    return suggest_k(shortest, words[0].alphabet.size, mode, settings=settings)


@dataclass
class PipelineResult:
    labels: List[str]
    k: int
    matrix: DistanceMatrix
    tree: LinkageTree
    newick: str
    annotations: List[CladeAnnotation] = field(default_factory=list)


class CorpusPipeline:
    """FASTA corpus to distance matrix, linkage tree and annotated Newick"""

    def __init__(
        self,
        fasta_path: Union[str, Path],
        k: Union[int, str] = "auto",
        normalize: bool = True,
        method: str = "average",
        taxa_path: Optional[Union[str, Path]] = None,
        taxa_offset: int = 0,
        label_mode: str = "species",
        settings: Optional[Settings] = None,
    ):
        self.fasta_path = Path(fasta_path)
        self.k_order = k
        self.normalize = normalize
        self.method = method
        self.taxa_path = Path(taxa_path) if taxa_path else None
        self.taxa_offset = taxa_offset
        self.label_mode = label_mode
        self.settings = resolve_settings(settings)
        self.alphabet = Alphabet.from_string(FASTA_ALPHABET)

    def load_records(self) -> List[FastaRecord]:
        records = read_fasta(self.fasta_path)
        if len(records) < 2:
            raise DeBruijnError(f"A corpus needs at least two sequences, {self.fasta_path} has {len(records)}")
        return records

    def make_labels(self, records: List[FastaRecord]) -> List[str]:
        if self.label_mode == "species":
            raw = [species_label(r.description) for r in records]
        else:
            raw = [r.description for r in records]
        return unique_labels(raw)

    def make_words(self, records: List[FastaRecord]) -> List[CyclicWord]:
        return [CyclicWord.from_symbols(r.sequence, self.alphabet) for r in records]

    def load_taxa(self, count: int) -> List[TaxaLineage]:
        lineages = read_genbank_lineages(self.taxa_path, self.taxa_offset)
        if len(lineages) != count:
            raise LabelCountError(f"{len(lineages)} GenBank lineages for {count} FASTA records")
        return lineages

    def run(self) -> PipelineResult:
        logger.info(f"Starting corpus pipeline on {self.fasta_path}")
        records = self.load_records()
        labels = self.make_labels(records)
        words = self.make_words(records)
        k = resolve_k(self.k_order, words, self.settings)
        logger.info(f"Using k={k} for {len(words)} sequences (shortest {min(w.length for w in words)})")

        matrix = distance_matrix(words, k, self.normalize, labels, self.settings)
        tree = linkage(matrix, self.method)

        annotations: List[CladeAnnotation] = []
        internal_labels = {}
        if self.taxa_path is not None:
            lineages = self.load_taxa(len(words))
            annotations = annotate_clades(tree, [lineage.names for lineage in lineages])
            internal_labels = {a.node: a.label for a in annotations if a.label}
            logger.info(f"Annotated {len(internal_labels)} of {len(annotations)} internal nodes")

        newick = newick_export(tree, labels, internal_labels)
        logger.info("✅ Corpus pipeline completed")
        return PipelineResult(labels=labels, k=k, matrix=matrix, tree=tree, newick=newick, annotations=annotations)


__all__ = ["CorpusPipeline", "PipelineResult", "resolve_k", "FASTA_ALPHABET"]
