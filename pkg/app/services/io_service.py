"""
Reading FASTA and GenBank inputs and writing CSV and Newick outputs.
"""
import io
import logging
import re
from collections import Counter
from pathlib import Path
from typing import IO, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from app.errors import DistanceMatrixError, FastaFormatError, GenBankFormatError
from app.models import DistanceMatrix
from app.schemas import FastaRecord, SpinParams, TaxaLineage
from app.services.entropy_service import binary_w1_grid, relative_entropy_grid, snap_integer
from app.services.spin_service import spin_grid

logger = logging.getLogger(__name__)

NON_NUCLEOTIDE = re.compile(r"[^ACGT]")
WHITESPACE = re.compile(r"\s+")
ORGANISM_MARK = "  ORGANISM  "
REFERENCE_MARK = "REFERENCE   "

Source = Union[bytes, str]
Target = Union[str, Path, IO[str], None]


def _text(data: Source, error: type) -> str:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise error(f"Input is not valid UTF-8: {e}") from e
    return data.replace("\r\n", "\n").replace("\r", "\n")


def parse_fasta(data: Source) -> List[FastaRecord]:
    """One record per '>' header; residues upper-cased and non-ACGT mapped to N"""
    text = _text(data, FastaFormatError)
    records: List[FastaRecord] = []
    description: Optional[str] = None
    chunks: List[str] = []

    def flush():
        sequence = NON_NUCLEOTIDE.sub("N", WHITESPACE.sub("", "".join(chunks)).upper())
        if not sequence:
            raise FastaFormatError(f"Record {description!r} has an empty sequence")
        records.append(FastaRecord(description=description, sequence=sequence))

    for line in text.split("\n"):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith(">"):
            if description is not None:
                flush()
            description = stripped[1:].strip()
            chunks = []
        elif description is None:
            raise FastaFormatError("Sequence data found before the first '>' header")
        else:
            chunks.append(stripped)
    if description is None:
        raise FastaFormatError("No '>' header found")
    flush()
    return records


def read_fasta(path: Union[str, Path]) -> List[FastaRecord]:
    records = parse_fasta(Path(path).read_bytes())
    logger.info(f"Loaded {len(records)} FASTA records from {path}")
    return records


def render_fasta(records: Iterable[FastaRecord], width: int = 70) -> str:
    lines = []
    for record in records:
        lines.append(f">{record.description}")
        lines.extend(record.sequence[i: i + width] for i in range(0, len(record.sequence), width))
    return "\n".join(lines) + "\n"


def parse_genbank_lineages(data: Source, offset: int = 0) -> List[TaxaLineage]:
    """
    Lineages from the lines between each ORGANISM line and the next REFERENCE
    line. The first `offset` names of every lineage are dropped.
    """
    lines = _text(data, GenBankFormatError).split("\n")
    organisms = [i for i, line in enumerate(lines) if ORGANISM_MARK in line]
    references = [i for i, line in enumerate(lines) if REFERENCE_MARK in line]
    lineages = []
    for start in organisms:
        end = next((r for r in references if r > start), None)
        if end is None:
            raise GenBankFormatError(f"ORGANISM block at line {start + 1} has no following REFERENCE")
        joined = "".join(line.strip() for line in lines[start + 1: end])
        joined = joined.replace(" ", "").replace(".", "")
        names = [name for name in joined.split(";") if name]
        if not names:
            raise GenBankFormatError(f"ORGANISM block at line {start + 1} has an empty lineage")
        names = names[offset:]
        if not names:
            raise GenBankFormatError(f"Offset {offset} drops the whole lineage at line {start + 1}")
        lineages.append(TaxaLineage(names=names))
    return lineages


def read_genbank_lineages(path: Union[str, Path], offset: int = 0) -> List[TaxaLineage]:
    return parse_genbank_lineages(Path(path).read_bytes(), offset)


def species_label(description: str) -> str:
    """Genus and species: the first two tokens after the last '|'"""
    tokens = description.rsplit("|", 1)[-1].split()
    if len(tokens) < 2:
        return description
    return f"{tokens[0]} {tokens[1]}"


def unique_labels(labels: Sequence[str]) -> List[str]:
    """Suffix repeated labels with _1, _2, ... in order of appearance"""
    totals = Counter(labels)
    seen: Counter = Counter()
    result = []
    for label in labels:
        seen[label] += 1
        result.append(label if totals[label] == 1 else f"{label}_{seen[label]}")
    return result


def _emit(frame: pd.DataFrame, target: Target, **kwargs) -> Optional[str]:
    if target is None:
        return frame.to_csv(**kwargs)
    frame.to_csv(target, **kwargs)
    return None


def write_distance_matrix(matrix: DistanceMatrix, target: Target = None) -> Optional[str]:
    """Header row of labels then one row per word; returns the text when no target is given"""
    if len(set(matrix.labels)) != len(matrix.labels):
        raise DistanceMatrixError("Labels must be unique to write a distance matrix")
    frame = pd.DataFrame(matrix.values, columns=list(matrix.labels))
    return _emit(frame, target, index=False, float_format="%.17g")


def read_distance_matrix(source: Union[str, Path, IO[str]]) -> DistanceMatrix:
    frame = pd.read_csv(source, dtype=np.float64)
    if frame.shape[0] != frame.shape[1]:
        raise DistanceMatrixError(f"Expected a square matrix, got {frame.shape[0]} rows and {frame.shape[1]} columns")
    return DistanceMatrix(labels=tuple(frame.columns), values=frame.to_numpy())


def distance_matrix_from_text(text: str) -> DistanceMatrix:
    return read_distance_matrix(io.StringIO(text))


def w1_table_frame(ell: int, log: bool = False) -> pd.DataFrame:
    """Rows x*, columns x00; cells hold W1 (or log W1) and are empty where no word exists"""
    frame = pd.DataFrame(index=pd.RangeIndex(ell // 2 + 1, name="xstar"), columns=range(ell + 1), dtype=object)
    for x00, xstar, log_w in binary_w1_grid(ell):
        frame.at[xstar, x00] = log_w if log else snap_integer(log_w)
    return frame.astype("Float64") if log else frame.astype("Int64")


def write_w1_table(ell: int, target: Target = None, log: bool = False) -> Optional[str]:
    return _emit(w1_table_frame(ell, log), target, float_format="%.12g")


def relgrid_frame(ell: int, x00: int, xstar: int) -> pd.DataFrame:
    rows = relative_entropy_grid(ell, x00, xstar)
    frame = pd.DataFrame(rows, columns=["x00_prime", "xstar_prime", "H1_nats", "boxminus_sum"])
    frame["H1_bits"] = frame["H1_nats"] / np.log(2)
    frame["sum_exceeds_ell"] = frame["boxminus_sum"] > ell
    frame["entropy_exceeds_ell"] = frame["H1_bits"] > ell
    return frame[["x00_prime", "xstar_prime", "H1_nats", "H1_bits", "boxminus_sum",
                  "sum_exceeds_ell", "entropy_exceeds_ell"]]


def write_relgrid(ell: int, x00: int, xstar: int, target: Target = None) -> Optional[str]:
    return _emit(relgrid_frame(ell, x00, xstar), target, index=False, float_format="%.17g")


def spin_frame(params: SpinParams, ensemble: str = "linear") -> pd.DataFrame:
    return pd.DataFrame(spin_grid(params, ensemble))


def write_spin_grid(params: SpinParams, target: Target = None, ensemble: str = "linear") -> Optional[str]:
    return _emit(spin_frame(params, ensemble), target, index=False, float_format="%.17g")


def write_text(text: str, target: Target = None) -> Optional[str]:
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")
    return None


__all__ = [
    "parse_fasta",
    "read_fasta",
    "render_fasta",
    "parse_genbank_lineages",
    "read_genbank_lineages",
    "species_label",
    "unique_labels",
    "write_distance_matrix",
    "read_distance_matrix",
    "distance_matrix_from_text",
    "w1_table_frame",
    "write_w1_table",
    "relgrid_frame",
    "write_relgrid",
    "spin_frame",
    "write_spin_grid",
    "write_text",
]
