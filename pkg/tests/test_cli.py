"""Tests for the command line surface: formats, exit codes, config plumbing."""

import json

import pytest

from symlen import cli
from symlen.errors import VerificationFailure


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_sl_json_output(capsys):
    code, out = run_cli(capsys, "sl", "--scheme", "laurent(F2)", "--n", "2",
                        "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["dim_kn"] == 1
    assert data["sl"] == 1
    assert data["anisotropic_classes"] == 1


def test_json_output_is_byte_identical(capsys):
    args = ("bounds", "--scheme", "laurent(laurent(laurent(QC)))",
            "--n", "2", "--format", "json")
    code1, out1 = run_cli(capsys, *args)
    code2, out2 = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    assert out1.endswith("\n")


def test_bounds_reports_dominance(capsys):
    code, out = run_cli(capsys, "bounds", "--scheme",
                        "laurent(laurent(laurent(QC)))", "--n", "2",
                        "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["bounds"]["binomial"] == 3
    assert data["exact_sl"] == 1
    assert data["dominance"] == "pass"


def test_invariants_table_format(capsys):
    code, out = run_cli(capsys, "invariants", "--scheme", "laurent(F2)",
                        "--format", "table")
    assert code == 0
    assert "pythagoras" in out
    assert "3" in out


def test_csv_format_has_header(capsys):
    code, out = run_cli(capsys, "sl", "--scheme", "RC", "--n", "2",
                        "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "key,value"
    assert any(line.startswith("sl,") for line in lines)


def test_decompose_bitstring_form(capsys):
    code, out = run_cli(capsys, "decompose", "--scheme",
                        "laurent(laurent(laurent(QC)))", "--n", "2",
                        "--form", "011,100", "--no-merge", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["input"] == [[3, 4]]
    assert data["output"] == [[1, 4], [2, 4]]
    assert data["passed"] is True


def test_decompose_merge_default(capsys):
    code, out = run_cli(capsys, "decompose", "--scheme",
                        "laurent(laurent(laurent(QC)))", "--n", "2",
                        "--form", "011,100", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["output"] == [[3, 4]]


def test_exit_code_invalid_input(capsys):
    assert run_cli(capsys, "sl", "--scheme", "bogus(")[0] == 1
    assert run_cli(capsys, "decompose", "--scheme", "RC", "--n", "2",
                   "--form", "xy")[0] == 1
    assert run_cli(capsys, "sl", "--scheme", "RC", "--n", "1")[0] == 1
    assert run_cli(capsys, "decompose", "--scheme", "RC", "--n", "2")[0] == 1


def test_exit_code_cap_exceeded(capsys):
    code, _ = run_cli(capsys, "sl", "--scheme", "laurent(laurent(RC))",
                      "--n", "2", "--cap-tensor", "4")
    assert code == 2


def test_exit_code_verification_failure(capsys, monkeypatch):
    def boom(cfg):
        raise VerificationFailure("forced")
    monkeypatch.setitem(cli.COMMANDS, "bounds", boom)
    assert run_cli(capsys, "bounds", "--scheme", "RC")[0] == 3


def test_unsafe_table_accepted(capsys, tmp_path):
    path = tmp_path / "rc.json"
    path.write_text(json.dumps(
        {"name": "rc-copy", "d": 1, "minus_one": 1, "rows": [1, 3]}
    ))
    code, out = run_cli(capsys, "invariants", "--unsafe-table", str(path),
                        "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["scheme"] == "rc-copy"
    assert data["is_real"] is True
    via_builder = run_cli(capsys, "invariants", "--scheme", "RC",
                          "--format", "json")[1]
    ref = json.loads(via_builder)
    for key in ("d", "is_real", "pythagoras", "d_seq", "chain"):
        assert data[key] == ref[key]


def test_unsafe_table_rejected(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"d": 1, "minus_one": 0, "rows": [1, 3]}))
    assert run_cli(capsys, "build", "--unsafe-table", str(path))[0] == 1
    missing = tmp_path / "missing.json"
    assert run_cli(capsys, "build", "--unsafe-table", str(missing))[0] == 1
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    assert run_cli(capsys, "build", "--unsafe-table", str(garbage))[0] == 1


def test_build_prints_table(capsys):
    code, out = run_cli(capsys, "build", "--scheme", "RC", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["d"] == 1
    assert data["minus_one"] == 1
    assert data["table"] == ["01", "11"]
    assert data["validated"] is True


def test_config_file_flags_win(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\nscheme=laurent(F2)\nn=2\nformat=json\n")
    code, out = run_cli(capsys, "sl", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["n"] == 2
    code, out = run_cli(capsys, "invariants", "--config", str(cfg),
                        "--scheme", "RC")
    assert code == 0
    assert json.loads(out)["scheme"] == "RC"


def test_config_file_rejects_garbage(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n: 3\n")
    assert run_cli(capsys, "sl", "--config", str(cfg))[0] == 1
    cfg.write_text("n=three\n")
    assert run_cli(capsys, "sl", "--config", str(cfg))[0] == 1


def test_missing_scheme_rejected(capsys):
    assert run_cli(capsys, "sl", "--n", "2")[0] == 1
