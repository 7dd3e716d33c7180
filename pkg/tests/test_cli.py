import json
import subprocess
import sys

import pytest

from fourierlaplace.cli import (EXIT_CONSISTENCY, EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED, RunConfig, main,
                                parse_truncation, run)
from fourierlaplace.errors import ParseError


def test_transform_lists_four_regular_points(capsys):
    assert main(["--case", "JKTVI"]) == EXIT_OK
    out = capsys.readouterr().out
    points = [line for line in out.splitlines() if line.startswith("point ")]
    assert len(points) == 4 and all(line.endswith("regular") for line in points)


def test_verify_mode(capsys):
    assert main(["--mode", "verify"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6 and all(line.endswith("PASS") for line in lines)


def test_structured_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["--case", "JKTII", "--format", "structured", "--seed", "3", "--out", str(path)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["rank_hat"] == 2


def test_raising_truncation_keeps_known_fields(tmp_path):
    outs = []
    for trunc in ("8,16", "14,28"):
        path = tmp_path / f"{trunc}.json"
        main(["--case", "JKTIVb", "--format", "structured", "--truncation", trunc, "--out", str(path)])
        outs.append(path.read_text())
    assert outs[0] == outs[1]


def test_rank_zero_file_is_a_parse_error(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text('{"germs": [{"point": "inf", "rank": 0, "coefficients": []}]}')
    assert main(["--file", str(f)]) == EXIT_PARSE
    assert "rank" in capsys.readouterr().err


def test_file_input_with_parameter(tmp_path, capsys):
    f = tmp_path / "g.json"
    f.write_text('{"germs": [{"point": "inf", "rank": 1, "coefficients": [{"k": -3, "matrix": [["a"]]}]}]}')
    assert main(["--file", str(f), "--param", "a=2"]) == EXIT_OK
    assert "Swan 2" in capsys.readouterr().out


def test_unsupported_germ_exit_code(tmp_path):
    f = tmp_path / "g.json"
    f.write_text('{"germs": [{"point": "inf", "rank": 1, "coefficients": [{"k": -2, "matrix": [["1"]]}]},'
                 ' {"point": "1", "rank": 1, "coefficients": [{"k": -2, "matrix": [["1"]]}]}]}')
    assert main(["--file", str(f)]) == EXIT_UNSUPPORTED


def test_constraint_violation_exit_code():
    assert main(["--case", "JKTII", "--param", "b=0"]) == EXIT_PARSE


@pytest.mark.parametrize("bad", ["4,4", "8", "a,b", "8,15"])
def test_truncation_floor(bad):
    with pytest.raises(ParseError):
        parse_truncation(bad)


def test_consistency_failure_exit_code(monkeypatch):
    from fourierlaplace import cli
    from fourierlaplace.errors import ConsistencyFailure

    def boom(*a, **kw):
        raise ConsistencyFailure("rank mismatch")

    monkeypatch.setattr(cli, "fourier_transform", boom)
    status, text = run(RunConfig(case="JKTI"))
    assert status == EXIT_CONSISTENCY and "rank mismatch" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fourierlaplace", "--case", "JKTI"], capture_output=True, text=True)
    assert proc.returncode == 0 and "Swan 5" in proc.stdout
