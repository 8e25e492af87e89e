import json
import os

import jsonschema
import pytest
from support import differences, load_output

from monocorr import cli
from monocorr.schema import OUTPUT_SCHEMAS, validate_document


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_exponents_output(capsys):
    code, out, _ = run(["exponents", "--d", "100", "--n", "5", "--m", "0"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["L"] == "53/5"
    assert doc["d_ell_for_n"] == 10**20
    assert doc["threshold"] is False
    validate_document(doc)


def test_count_positive_definite(capsys):
    code, out, _ = run(["count", "--a", "1,1,1,1", "--d", "2", "--B", "10"], capsys)
    assert code == 0 and json.loads(out)["total"] == 0


def test_zero_coefficient_rejected(capsys):
    code, _, err = run(["count", "--a", "1,0,1", "--d", "3", "--B", "5"], capsys)
    assert code == 2
    assert "coefficients must be nonzero" in err


def test_unknown_command_and_missing_option(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 2 and "usage" in err
    code, _, err = run(["count", "--d", "3"], capsys)
    assert code == 2 and "--a" in err and "--B" in err


def test_resource_error_exit_code(capsys):
    code, _, err = run(["count", "--a", "1,1,1,1,1,1", "--d", "3", "--B", "100", "--budget", "1000"], capsys)
    assert code == 3 and "budget" in err


def test_precision_deficit_is_validation_error(capsys):
    code, _, err = run(["correlate", "--alpha", "dec:0.5", "--d", "3", "--N", "100", "--ell", "2"], capsys)
    assert code == 2 and "requires at least" in err


def test_support_outside_range_is_validation_error(capsys):
    code, _, _ = run(["correlate", "--d", "2", "--N", "4", "--ell", "2", "--support", "-3,3"], capsys)
    assert code == 2


ALL_COMMANDS = [
    ["exponents", "--d", "40", "--n", "4", "--m", "1"],
    ["correlate", "--d", "3", "--N", "200", "--ell", "3", "--support", "-1,1;-2,2"],
    ["gaps", "--d", "3", "--N", "300", "--s-grid", "0.5:2:0.5", "--format", "json"],
    ["count", "--a", "1,-1,1,-1", "--d", "5", "--B", "8"],
    ["fourier-check", "--d", "2", "--ell", "3", "--N", "12", "--A", "1"],
    ["mc", "--mode", "mean", "--d", "3", "--ell", "2", "--N", "100", "--trials", "30"],
    ["mc", "--mode", "var", "--d", "3", "--ell", "2", "--N", "100", "--trials", "30"],
]


@pytest.mark.parametrize("argv", ALL_COMMANDS, ids=lambda a: "-".join(a[:3]))
def test_schema_and_config_roundtrip(argv, capsys, tmp_path):
    code, out, _ = run(argv + ["--seed", "3"], capsys)
    assert code == 0
    doc = json.loads(out)
    validate_document(doc)
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    restored = cli.ExperimentConfig.from_dict(doc["config"])
    assert restored == cli.resolve_config(argv + ["--seed", "3"])
    # rerunning the embedded config reproduces the document
    again = load_output(cli.render(restored, cli.COMMANDS[restored.command](restored)))
    assert differences(doc, again) == []


def test_schema_rejects_malformed():
    doc = {"schema_version": cli.SCHEMA_VERSION, "command": "count", "config": {}}
    with pytest.raises(jsonschema.ValidationError):
        validate_document(doc)
    assert set(OUTPUT_SCHEMAS) >= {"exponents", "sequence", "correlate", "gaps", "count", "fourier-check"}


def test_sequence_writes_values(capsys, tmp_path):
    target = tmp_path / "values.txt"
    code, out, _ = run(["sequence", "--alpha", "rat:1/2", "--d", "3", "--N", "3", "--out", str(target)], capsys)
    assert code == 0
    assert target.read_text().split() == ["0.5", "0", "0.5"]
    validate_document(json.loads(out))


def test_sequence_requires_out(capsys):
    code, _, err = run(["sequence", "--d", "2", "--N", "3"], capsys)
    assert code == 2 and "--out" in err


def test_gaps_csv(capsys):
    code, out, _ = run(["gaps", "--d", "2", "--N", "100", "--s-grid", "0.5,1", "--K", "2"], capsys)
    assert code == 0
    assert out.startswith("# schema_version=")
    parsed = load_output(out)
    assert parsed["columns"] == ["s", "P_N", "lower", "upper", "exp_ref"]
    assert [r[0] for r in parsed["rows"]] == [0.5, 1.0]
    assert parsed["config"]["params"]["K"] == 2


def test_csv_refused_for_non_tabular(capsys):
    code, _, err = run(["exponents", "--d", "10", "--n", "3", "--format", "csv"], capsys)
    assert code == 2 and "json" in err


def test_config_file_merged_under_flags(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nd = 3\nN=80\nell=2\nsupport=-1,1\nseed=4\nnaive=true\n")
    code, out, _ = run(["correlate", "--config", str(cfg), "--N", "90"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["N"] == 90 and doc["config"]["params"]["d"] == 3
    assert doc["config"]["seed"] == 4 and doc["config"]["params"]["naive"] is True
    cfg.write_text("bogus=1\n")
    code, _, err = run(["correlate", "--config", str(cfg)], capsys)
    assert code == 2 and "bogus" in err
    cfg.write_text("no equals sign\n")
    code, _, _ = run(["correlate", "--config", str(cfg)], capsys)
    assert code == 2


def test_out_file_written(capsys, tmp_path):
    target = tmp_path / "o.json"
    code, out, _ = run(["count", "--a", "1,-1", "--d", "2", "--B", "5", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["total"] == 2


def test_emit_points(capsys, tmp_path):
    pts = tmp_path / "pts.txt"
    code, _, _ = run(["count", "--a", "1,-1", "--d", "2", "--B", "5", "--emit-points", str(pts)], capsys)
    assert code == 0
    assert pts.read_text().splitlines() == ["1,-1", "1,1"]


def test_atomic_write_leaves_no_partial_file(tmp_path, monkeypatch):
    target = tmp_path / "result.json"
    target.write_text("previous")

    def interrupted(src, dst):
        raise KeyboardInterrupt

    monkeypatch.setattr(os, "replace", interrupted)
    with pytest.raises(KeyboardInterrupt):
        cli.write_atomic(str(target), "x" * 10000)
    assert target.read_text() == "previous"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["result.json"]


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run(
        [sys.executable, "-m", "monocorr", "exponents", "--d", "11", "--n", "4"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["L"] == "7/3"
