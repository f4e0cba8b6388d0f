from pathlib import Path

import pytest

from blindbench.cli import main
from blindbench.report import as_strings, read_report, render

FORMULAS = Path(__file__).resolve().parent.parent / "demos" / "formulas"
XOR = str(FORMULAS / "xor.qbf")
EXISTS_X = str(FORMULAS / "exists.qbf")
FORALL_X = str(FORMULAS / "forall.qbf")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_ip_run_true_formula(capsys):
    code, out, _ = run(capsys, "ip-run", "--formula", XOR, "--runs", "30", "--format", "jsonl")
    assert code == 0
    (row,) = read_report(out, "jsonl")
    assert row["accepted"] == 30 and row["truth"] is True and row["p"] == 17


def test_ip_run_qbf_file(tmp_path, capsys):
    f = tmp_path / "ex1.qbf"
    f.write_text("p qbf 1\ne 1 0\n1 0\n")
    code, out, _ = run(capsys, "ip-run", "--formula", str(f), "--runs", "5", "--seed", "0", "--format", "csv")
    assert code == 0
    assert read_report(out, "csv")[0]["acceptance_rate"] == "1.0"


def test_missing_file(capsys):
    code, _, err = run(capsys, "ip-run", "--formula", "no/such.qbf")
    assert code == 2 and "no/such.qbf" in err


def test_parse_error_exit(tmp_path, capsys):
    f = tmp_path / "bad.qbf"
    f.write_text("e 1 0\n(and 1\n")
    code, _, err = run(capsys, "ip-run", "--formula", str(f))
    assert code == 2 and err


def test_small_field_warning(capsys):
    code, _, err = run(capsys, "ip-run", "--gen", "3,7", "--p", "17", "--runs", "2")
    assert code == 2 and "warning" in err and "n^4" in err
    code, _, _ = run(capsys, "ip-run", "--gen", "3,7", "--p", "17", "--runs", "2", "--allow-small-field")
    assert code == 0


def test_non_prime_field(capsys):
    code, _, err = run(capsys, "ip-run", "--formula", XOR, "--p", "21")
    assert code == 2


def test_missing_source(capsys):
    code, _, err = run(capsys, "ip-run")
    assert code == 2


def test_output_is_reproducible(capsys):
    argv = ("sim-equiv", "--formula", XOR, "--runs", "10", "--servers", "3")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0


def test_seed_from_environment(monkeypatch, capsys):
    argv = ("leak-replay", "--formula", XOR, "--runs", "5", "--oracle", "predicate:r1<8", "--format", "jsonl")
    monkeypatch.setenv("BLINDBENCH_SEED", "11")
    from_env = run(capsys, *argv)
    monkeypatch.delenv("BLINDBENCH_SEED")
    explicit = run(capsys, *argv, "--seed", "11")
    default = run(capsys, *argv)
    assert from_env == explicit
    assert from_env[0] == 0 and default[0] == 0


def test_bad_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("BLINDBENCH_SEED", "abc")
    code, _, err = run(capsys, "ip-run", "--formula", XOR, "--runs", "1")
    assert code == 2 and "BLINDBENCH_SEED" in err


def test_leak_replay_agrees(capsys):
    code, out, _ = run(
        capsys, "leak-replay", "--formula", XOR, "--runs", "40", "--servers", "3", "--oracle", "predicate:r1<8", "--format", "jsonl"
    )
    (row,) = read_report(out, "jsonl")
    assert code == 0
    assert row["coincidence_rate"] == 1.0
    assert 0 < row["single_leak_rate"] == row["collusion_leak_rate"] < 1


def test_audit_exit_codes(capsys):
    code, out, _ = run(capsys, "audit", "--protocol", "pad", "--formula", EXISTS_X, "--formula", FORALL_X)
    assert code == 0 and "BLIND_AT_SCALE" in out
    code, out, _ = run(capsys, "audit", "--protocol", "S", "--formula", EXISTS_X, "--formula", FORALL_X)
    assert code == 3 and "NOT_BLIND" in out


def test_audit_leakage_mismatch(capsys):
    code, _, err = run(capsys, "audit", "--formula", EXISTS_X, "--formula", XOR)
    assert code == 2 and "leakage" in err


def test_soundness_sweep(capsys):
    code, out, _ = run(capsys, "soundness-sweep", "--n-values", "1,2", "--runs", "300", "--exact", "--format", "jsonl")
    rows = read_report(out, "jsonl")
    assert code == 0 and len(rows) == 4
    assert all(r["within_bound"] for r in rows)


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.csv"
    code, out, _ = run(capsys, "ip-run", "--formula", XOR, "--runs", "3", "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    assert read_report(target.read_text(), "csv")[0]["runs"] == "3"


@pytest.mark.parametrize("fmt", ["table", "csv", "jsonl"])
def test_report_roundtrip(fmt):
    rows = [
        {"name": "a", "count": 3, "rate": 0.25, "ok": True},
        {"name": "b c", "count": 10, "rate": 1.0, "ok": False},
    ]
    back = read_report(render(rows, fmt), fmt)
    assert back == (rows if fmt == "jsonl" else as_strings(rows))


def test_unknown_command():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
