# tests/test_cli.py
import io

import pandas as pd
import pytest

from app.models import DistanceMatrix
from cli import main

FASTA = """>gi|1|ref| Alpha one strain A
ACACACCAACCACAACACCA
>gi|2|ref| Alpha one strain B
ACACACCAACCACAACACCC
>gi|3|ref| Beta two
GTGTTGGTTGTGGTGTTTGG
"""


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_entropy_reports_class_size(capsys):
    """ABRACADABRA over ABCDR has W = 12"""
    code, out, err = run(capsys, "entropy", "ABRACADABRA", "--k", "1", "--alphabet", "ABCDR")
    assert code == 0
    assert "W = 12" in out
    assert out.startswith("H_1 = 2.48490664979 nats")
    assert err == ""


def test_entropy_in_alphabet_base(capsys):
    code, out, _ = run(capsys, "entropy", "ABRACADABRA", "--k", "1", "--alphabet", "ABCDR", "--base", "n")
    assert code == 0
    assert "(base 5)" in out


def test_entropy_reads_fasta_file(capsys, tmp_path):
    path = tmp_path / "one.fasta"
    path.write_text(">seq\nACGTACGTTGCA\n")
    code, out, _ = run(capsys, "entropy", str(path), "--k", "1", "--alphabet", "ACGT")
    assert code == 0
    assert out.startswith("H_1 = ")


def test_relent_of_shared_quiver_pair(capsys):
    code, out, _ = run(capsys, "relent", "ABRACADABRA", "ABARACARBAD", "--k", "1", "--alphabet", "ABCDR")
    assert code == 0
    assert out.strip() == "H_1(u||v) = 0 nats"


def test_levenshtein(capsys):
    code, out, _ = run(capsys, "levenshtein", "ABRACADABRA", "ABARACARBAD")
    assert (code, out.strip()) == (0, "5")


def test_table_sums_to_necklace_count(capsys):
    code, out, _ = run(capsys, "table", "--ell", "16")
    assert code == 0
    frame = pd.read_csv(io.StringIO(out), index_col="xstar")
    assert int(frame.sum().sum()) == 4116
    assert frame.loc[4, "4"] == 309


def test_relgrid_writes_file(capsys, tmp_path):
    target = tmp_path / "grid.csv"
    code, out, _ = run(capsys, "relgrid", "--ell", "16", "--x00", "2", "--xstar", "4", "--out", str(target))
    assert code == 0 and out == ""
    frame = pd.read_csv(target)
    assert "sum_exceeds_ell" in frame.columns


def test_spin_prints_limit(capsys):
    code, out, _ = run(capsys, "spin", "--ell", "64", "--beta", "1", "--J", "0.5", "--K", "0.2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("log Z = ")
    assert lines[2].startswith("limit = 2.373")


def test_spin_strong_coupling_prints_logs(capsys):
    """Values past the float range are printed as logs with exit status 0"""
    code, out, err = run(capsys, "spin", "--ell", "8", "--beta", "1000", "--J", "1")
    assert (code, err) == (0, "")
    lines = out.splitlines()
    assert lines[1].startswith("log Z^(1/ell) = 1000.08")
    assert float(lines[2].split("=")[1]) == pytest.approx(1000.0)
    assert lines[2].startswith("log limit = ")


def test_spin_conventions(capsys):
    """text doubles the coupling that eq12 applies"""
    _, doubled, _ = run(capsys, "spin", "--ell", "12", "--J", "0.25", "--K", "0.1", "--convention", "text")
    _, plain, _ = run(capsys, "spin", "--ell", "12", "--J", "0.5", "--K", "0.1", "--convention", "eq12")
    _, default, _ = run(capsys, "spin", "--ell", "12", "--J", "0.5", "--K", "0.1")
    _, alias, _ = run(capsys, "spin", "--ell", "12", "--J", "0.25", "--K", "0.1", "--convention", "doubled")
    assert doubled == plain == default == alias


def test_matrix_fallback_notice_is_not_a_diagnostic(capsys, tmp_path, monkeypatch):
    """Zero-normalizer pairs are reported on stdout and stderr stays empty"""
    monkeypatch.setattr(DistanceMatrix, "fallback_pairs", lambda self: [(0, 1)])
    fasta = tmp_path / "corpus.fasta"
    fasta.write_text(FASTA)
    code, out, err = run(capsys, "matrix", str(fasta), "--k", "2", "--normalize", "--out", str(tmp_path / "m.csv"))
    assert (code, err) == (0, "")
    assert "Kept raw entropy for 1 pair(s)" in out


def test_matrix_and_tree(capsys, tmp_path):
    fasta = tmp_path / "corpus.fasta"
    fasta.write_text(FASTA)
    matrix_path = tmp_path / "matrix.csv"
    code, _, _ = run(capsys, "matrix", str(fasta), "--k", "2", "--normalize", "--out", str(matrix_path))
    assert code == 0
    frame = pd.read_csv(matrix_path)
    assert list(frame.columns) == ["Alpha one_1", "Alpha one_2", "Beta two"]

    code, out, _ = run(capsys, "tree", str(matrix_path), "--method", "average")
    assert code == 0
    assert out.strip().endswith(";")
    assert "'Beta two'" in out

    code, out, _ = run(capsys, "tree", str(fasta), "--k", "2", "--normalize", "--labels", "description")
    assert code == 0
    assert out.count(":") == 4


def test_hidden_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "class", "BARBARA", "--alphabet", "ABR")
    assert code == 0
    assert out.splitlines()[-1] == "count = 2"
    code, out, _ = run(capsys, "oracle", "necklaces", "2", "--ell", "16")
    assert out.strip() == "4116"


def test_errors_exit_nonzero(capsys):
    """One diagnostic line on stderr and nothing on stdout"""
    code, out, err = run(capsys, "entropy", "ABC", "--k", "5")
    assert code == 1
    assert out == ""
    assert err.startswith("error: ")
    assert len(err.strip().splitlines()) == 1


def test_missing_file_is_reported(capsys, tmp_path):
    code, _, err = run(capsys, "matrix", str(tmp_path / "absent.fasta"))
    assert code == 1
    assert err.startswith("error: ")


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        main(["nonsense"])
