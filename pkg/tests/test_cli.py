import json
import subprocess
import sys

import pytest

from kahlercone.cli import main
from kahlercone.corpus import builtin, serialize


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_fs(capsys):
    code, out, _ = run(capsys, "analyze", "--potential", "fs:2", "--order", "4")
    assert code == 0
    assert "ConsistentUpTo(4)" in out and "rank lower bound: 2" in out


def test_analyze_quartic(capsys):
    code, out, _ = run(capsys, "analyze", "--potential", "perturbed_quartic", "--order", "3")
    assert code == 1
    assert "NotInduced(3)" in out and "-1/12" in out


def test_bridge(capsys):
    code, out, _ = run(capsys, "bridge", "--psi", "fs:1", "--a", "1", "--order", "4")
    assert code == 0
    assert "c*psi: 4" in out and "cone Ricci-flat: true" in out


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["multiple", "--potential", "fs:1:1/2", "--max-k", "4", "--order", "4"], 0),
        (["multiple", "--potential", "perturbed_quartic", "--max-k", "2", "--order", "6"], 1),
        (["lift", "--psi", "fs:1", "--a", "2"], 0),
        (["homothety", "--psi", "fs:1:1/2", "--a", "2"], 0),
        (["homothety", "--psi", "fs:1", "--a", "1/2"], 1),
        (["blocks", "--psi", "fs:2", "--c", "1", "--K", "3", "--order", "3"], 0),
        (["blocks", "--psi", "fs:1", "--c", "1/2", "--K", "2"], 1),
        (["epsilon", "--psi", "fs:1", "--epsilon", "1/10", "--order", "3"], 0),
        (["ricci", "--psi", "fs:2", "--order", "3"], 0),
        (["ricci", "--potential", "hyp:1"], 1),
        (["einstein", "--potential", "fs:3", "--order", "3"], 0),
        (["einstein", "--potential", "perturbed_quartic"], 1),
        (["bridge", "--psi", "hyp:1", "--a", "1"], 1),
        (["flatness", "--psi", "fs:3", "--a", "1", "--order", "3"], 0),
        (["flatness", "--psi", "flat:1", "--a", "1"], 1),
    ],
)
def test_exit_codes(capsys, argv, expected):
    assert run(capsys, *argv)[0] == expected


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["analyze"],
        ["analyze", "--potential", "sphere:1"],
        ["analyze", "--potential", "fs:1", "--order", "0"],
        ["lift", "--psi", "fs:1", "--a", "0.5"],
        ["lift", "--psi", "fs:1", "--a", "2", "--c", "1"],
        ["epsilon", "--psi", "fs:1", "--c", "1/4", "--epsilon", "1/10"],
        ["ricci", "--psi", "fs:1", "--c", "1/2"],
        ["homothety", "--psi", "fs:1"],
    ],
)
def test_usage_errors(capsys, argv, tmp_path):
    report = tmp_path / "r.json"
    assert run(capsys, *argv, "--json", str(report))[0] == 2
    assert not report.exists()


def test_missing_command(capsys):
    assert main([]) == 2


def test_degenerate_potential_is_usage_error(capsys, tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"version": 1, "n": 1, "d": 4, "terms": [{"m": [2], "k": [2], "re": "1"}]}))
    assert run(capsys, "analyze", "--potential", str(f))[0] == 2


def test_order_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("KAHLERCONE_ORDER", "3")
    code, out, _ = run(capsys, "analyze", "--potential", "perturbed_quartic")
    assert code == 1 and "NotInduced(3)" in out
    monkeypatch.setenv("KAHLERCONE_ORDER", "x")
    assert run(capsys, "analyze", "--potential", "fs:1")[0] == 2


def test_json_report_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "analyze", "--potential", "perturbed_quartic", "--order", "3", "--json", str(a))
    run(capsys, "analyze", "--potential", "perturbed_quartic", "--order", "3", "--json", str(b))
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["schema"] == "kahlercone.report/1"
    assert rep["result"]["witness"] == ["0", "0", "0", "1"]
    assert rep["result"]["witness_value"] == "-1/12"
    assert "monomial_order" in rep["conventions"]
    assert "timing_seconds" not in rep


def test_json_timing_opt_in(capsys, tmp_path):
    a = tmp_path / "a.json"
    run(capsys, "analyze", "--potential", "fs:1", "--json", str(a), "--timing")
    assert "timing_seconds" in json.loads(a.read_text())


def test_input_hash_tracks_content(capsys, tmp_path):
    f = tmp_path / "p.json"
    f.write_text(serialize(builtin("fs:1", 4)))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "analyze", "--potential", str(f), "--json", str(a))
    run(capsys, "analyze", "--potential", "fs:1", "--json", str(b))
    assert json.loads(a.read_text())["input_sha256"] == json.loads(b.read_text())["input_sha256"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "kahlercone", "analyze", "--potential", "fs:1", "--order", "3"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "ConsistentUpTo(3)" in proc.stdout
