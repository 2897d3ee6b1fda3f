"""
Command-line entry point for the de Bruijn entropy toolkit.

    python cli.py entropy ABRACADABRA --k 1 --alphabet ABCDR
    python cli.py table --ell 16
    python cli.py matrix corpus.fasta --k auto --normalize --out matrix.csv
"""
import argparse
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

from app.config import configure_logging
from app.errors import DeBruijnError
from app.models import Alphabet, CyclicWord
from app.schemas import SpinParams
from app.services import entropy_service, oracle_service, similarity_service, spin_service
from app.services.io_service import (
    parse_fasta,
    read_distance_matrix,
    read_genbank_lineages,
    write_distance_matrix,
    write_relgrid,
    write_spin_grid,
    write_text,
    write_w1_table,
)
from app.services.pipeline_service import CorpusPipeline, resolve_k
from app.services.quiver_service import build_quiver

logger = logging.getLogger("debruijn.cli")

# --convention values; standard and doubled are accepted as aliases
CONVENTIONS = {"eq12": "standard", "text": "doubled", "standard": "standard", "doubled": "doubled"}


def _load_word(source: str, alphabet: Optional[str]) -> CyclicWord:
    """A literal word, or the first record of a FASTA file, or a plain text file"""
    path = Path(source)
    if path.is_file():
        raw = path.read_bytes()
        if raw.lstrip().startswith(b">"):
            text = parse_fasta(raw)[0].sequence
        else:
            text = "".join(raw.decode("utf-8").split())
        logger.info(f"Read a word of length {len(text)} from {path}")
    else:
        text = source
    return CyclicWord.from_symbols(text, Alphabet.from_string(alphabet) if alphabet else None)


def _pair_alphabet(first: str, second: str, alphabet: Optional[str]) -> Optional[str]:
    if alphabet:
        return alphabet
    if Path(first).is_file() or Path(second).is_file():
        return None
    return "".join(sorted(set(first) | set(second)))


def _base(choice: str, word: CyclicWord) -> Optional[float]:
    """None for nats; 'n' is the alphabet size"""
    choice = choice.strip().lower()
    if choice == "e":
        return None
    if choice == "n":
        return float(word.alphabet.size)
    try:
        value = float(choice)
    except ValueError:
        raise DeBruijnError(f"Base must be n, e or a number, got {choice!r}") from None
    if value <= 0 or value == 1:
        raise DeBruijnError(f"Base must be positive and not 1, got {value}")
    return value


def _emit(text: Optional[str]) -> None:
    if text is not None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_entropy(args) -> None:
    word = _load_word(args.word, args.alphabet)
    k = resolve_k(args.k, [word])
    base = _base(args.base, word)
    value = entropy_service.word_entropy(word, k, base=base)
    print(f"H_{k} = {value.nats:.12g} nats")
    if base is not None:
        print(f"H_{k} = {value.value:.12g} (base {value.base:g})")
    if value.count is not None:
        print(f"W = {value.count}")


def cmd_relent(args) -> None:
    alphabet = _pair_alphabet(args.word_a, args.word_b, args.alphabet)
    u = _load_word(args.word_a, alphabet)
    v = _load_word(args.word_b, alphabet or "".join(map(str, u.alphabet.symbols)))
    k = resolve_k(args.k, [u, v])
    value = entropy_service.relative_entropy(u, v, k, base=_base(args.base, u))
    print(f"H_{k}(u||v) = {value.nats:.12g} nats")
    if value.base is not None:
        print(f"H_{k}(u||v) = {value.value:.12g} (base {value.base:g})")


def cmd_matrix(args) -> None:
    pipeline = CorpusPipeline(args.fasta, k=args.k, normalize=args.normalize, label_mode=args.labels)
    records = pipeline.load_records()
    words = pipeline.make_words(records)
    k = resolve_k(args.k, words, pipeline.settings)
    matrix = similarity_service.distance_matrix(words, k, args.normalize, pipeline.make_labels(records))
    fallback = matrix.fallback_pairs()
    if fallback:
        logger.info(f"{len(fallback)} pairs kept their raw entropy for want of a normalizer")
    _emit(write_distance_matrix(matrix, args.out))
    if fallback and args.out:
        print(f"Kept raw entropy for {len(fallback)} pair(s) with a zero normalizer")


def cmd_tree(args) -> None:
    source = Path(args.source)
    if source.suffix.lower() == ".csv":
        matrix = read_distance_matrix(source)
        tree = similarity_service.linkage(matrix, args.method)
        labels = list(matrix.labels)
        internal = {}
        if args.taxa:
            lineages = read_genbank_lineages(args.taxa, args.taxa_offset)
            annotations = similarity_service.annotate_clades(tree, [lineage.names for lineage in lineages])
            internal = {a.node: a.label for a in annotations if a.label}
        newick = similarity_service.newick_export(tree, labels, internal)
    else:
        result = CorpusPipeline(
            source, k=args.k, normalize=args.normalize, method=args.method,
            taxa_path=args.taxa, taxa_offset=args.taxa_offset, label_mode=args.labels,
        ).run()
        newick = result.newick
    _emit(write_text(newick + "\n", args.out))


def cmd_table(args) -> None:
    _emit(write_w1_table(args.ell, args.out, log=args.log))


def cmd_relgrid(args) -> None:
    _emit(write_relgrid(args.ell, args.x00, args.xstar, args.out))


def _print_scaled(name: str, log_value: float) -> None:
    """The value itself, or its log when it overflows a float"""
    value = spin_service.exp_or_inf(log_value)
    if math.isfinite(value):
        print(f"{name} = {value:.12g}")
    else:
        print(f"log {name} = {log_value:.12g}")


def cmd_spin(args) -> None:
    convention = CONVENTIONS[args.convention]
    params = SpinParams(J=args.J, K=args.K, beta=args.beta, ell=args.ell, convention=convention)
    if args.grid:
        _emit(write_spin_grid(params, args.out, args.ensemble))
        return
    log_z = spin_service.partition_function(params, args.ensemble)
    print(f"log Z = {log_z:.12g}")
    _print_scaled("Z^(1/ell)", log_z / params.ell)
    _print_scaled("limit", spin_service.log_thermodynamic_limit(params))


def cmd_levenshtein(args) -> None:
    print(similarity_service.levenshtein(args.word_a, args.word_b))


def cmd_oracle(args) -> None:
    alphabet = Alphabet.from_string(args.alphabet) if args.alphabet else None
    if args.what == "class":
        result = oracle_service.enumerate_class(CyclicWord.from_symbols(args.word, alphabet), args.k)
        for member in result.members:
            print(member)
        print(f"count = {result.count}")
    elif args.what == "circuits":
        quiver = build_quiver(CyclicWord.from_symbols(args.word, alphabet), args.k)
        print(oracle_service.count_euler_circuits(quiver))
    else:
        n = alphabet.size if alphabet else int(args.word)
        print(oracle_service.burnside_necklaces(n, args.ell))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="debruijn", description="De Bruijn entropy of cyclic words")
    parser.add_argument("--verbose", action="store_true", help="Log progress and warnings to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="H_k of one cyclic word")
    p.add_argument("word", help="Literal word or path to a FASTA/text file")
    p.add_argument("--k", default="auto", help="Order: integer, auto, auto:informative or auto:linear-time")
    p.add_argument("--alphabet", help="Symbols in order; defaults to the word's sorted symbols")
    p.add_argument("--base", default="e", help="n, e, 2 or any number")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("relent", help="Relative entropy of two words")
    p.add_argument("word_a")
    p.add_argument("word_b")
    p.add_argument("--k", default="1")
    p.add_argument("--alphabet")
    p.add_argument("--base", default="e")
    p.set_defaults(func=cmd_relent)

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("--k", default="auto")
    corpus.add_argument("--normalize", action="store_true")
    corpus.add_argument("--labels", choices=("species", "description"), default="species")
    corpus.add_argument("--out", help="Output path; stdout when omitted")

    p = sub.add_parser("matrix", parents=[corpus], help="Distance matrix of a FASTA corpus as CSV")
    p.add_argument("fasta")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("tree", parents=[corpus], help="Linkage tree as Newick")
    p.add_argument("source", help="Distance-matrix CSV or FASTA corpus")
    p.add_argument("--method", choices=similarity_service.LINKAGE_METHODS, default="average")
    p.add_argument("--taxa", help="GenBank flat file with one ORGANISM block per sequence")
    p.add_argument("--taxa-offset", type=int, default=0, help="Leading lineage names to drop")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("table", help="Binary order-1 class sizes as CSV")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--log", action="store_true", help="Emit log W instead of W")
    p.add_argument("--out")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("relgrid", help="Binary order-1 relative entropy grid as CSV")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--x00", type=int, required=True)
    p.add_argument("--xstar", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_relgrid)

    p = sub.add_parser("spin", help="Binary spin-chain partition function")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--J", type=float, default=0.0)
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--convention", choices=tuple(CONVENTIONS), default="eq12",
                   help="eq12: coupling -J*s*s'; text: -2J*s*s'")
    p.add_argument("--ensemble", choices=spin_service.ENSEMBLES, default="linear")
    p.add_argument("--grid", action="store_true", help="Emit the per-class grid as CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spin)

    p = sub.add_parser("levenshtein", help="Edit distance of two linear words")
    p.add_argument("word_a")
    p.add_argument("word_b")
    p.set_defaults(func=cmd_levenshtein)

    p = sub.add_parser("oracle", help=argparse.SUPPRESS)
    p.add_argument("what", choices=("class", "circuits", "necklaces"))
    p.add_argument("word", help="Word, or alphabet size for necklaces")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alphabet")
    p.add_argument("--ell", type=int, default=1)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # stderr stays empty on success unless --verbose asks for the log
    configure_logging("INFO" if args.verbose else "ERROR")
    try:
        args.func(args)
    except (ValueError, OSError, OverflowError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
