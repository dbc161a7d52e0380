import json
import subprocess
import sys

import pytest

from moebiuslab import __version__
from moebiuslab.cli import main
from moebiuslab.qspace import extend_with_infinity, line_space
from moebiuslab.spaceio import dumps_space, load_space


@pytest.fixture
def grid(tmp_path):
    path = tmp_path / "grid.json"
    path.write_text(dumps_space(line_space([0, 1, 2, 3, 4])))
    return path


@pytest.fixture
def s0124_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(dumps_space(line_space([0, 1, 2, 4])))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    try:
        return code, json.loads(out)
    except json.JSONDecodeError:
        return code, out


def test_validate_good(capsys, grid):
    code, out = run(capsys, "validate", grid)
    assert code == 0 and out["ok"] is True
    assert out["tool"] == "moebiuslab" and out["version"] == __version__
    assert len(out["inputs"][str(grid)]) == 64


def test_validate_bad(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"points": ["a", "b"], "dist": [["0", "1"], ["2", "0"]]}))
    code, out = run(capsys, "validate", bad)
    assert code == 1 and out["ok"] is False
    assert "symmetry" in json.dumps(out)


def test_usage_errors(capsys, grid, tmp_path):
    assert main(["crt"]) == 2
    assert main(["validate", str(grid), "--bogus"]) == 2
    assert main(["transform", "rescale", str(grid)]) == 2
    (tmp_path / "junk.json").write_text("{not json")
    assert main(["validate", str(tmp_path / "junk.json")]) == 2
    assert main(["crt", str(grid), "0", "0", "0", "1"]) == 2
    capsys.readouterr()


def test_crt_example(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(dumps_space(line_space([0, 1, 2, 4])))
    code, out = run(capsys, "crt", path, "0", "1", "2", "4")
    assert code == 0 and out["crt"] == "1:3:2"


def test_axioms_corner_equiv(capsys, grid, tmp_path):
    code, out = run(capsys, "axioms", grid)
    assert code == 0 and out["ok"]
    code, out = run(capsys, "corner", grid)
    assert code == 0 and out["holds"] and out["bound"] == "1/4"
    other = tmp_path / "o.json"
    other.write_text(dumps_space(line_space([0, 2, 4, 6, 8])))
    fmap = tmp_path / "map.json"
    fmap.write_text(json.dumps({str(k): str(2 * k) for k in range(5)}))
    code, out = run(capsys, "equiv", grid, other, "--map", fmap)
    assert code == 0 and out["equivalent"]
    fmap.write_text(json.dumps({"0": "2", "1": "0", "2": "4", "3": "6", "4": "8"}))
    code, out = run(capsys, "equiv", grid, other, "--map", fmap)
    assert code == 1 and out["witness"]


def test_involution_round_trip_is_byte_identical(grid):
    exe = [sys.executable, "-m", "moebiuslab"]
    ext = subprocess.run(exe + ["transform", "extend", str(grid)], capture_output=True, check=True).stdout
    a = subprocess.run(exe + ["transform", "involute", "--o", "2"], input=ext, capture_output=True, check=True).stdout
    b = subprocess.run(exe + ["transform", "involute", "--o", "inf"], input=a, capture_output=True, check=True).stdout
    assert b == ext and a != ext


def test_transform_rescale_and_normalize(capsys, grid):
    code, out = run(capsys, "transform", "rescale", grid, "--lam", "2")
    assert code == 0 and out["dist"][0][4] == "8"
    code, out = run(capsys, "transform", "normalize", grid, "--A", "0", "1", "2")
    assert code == 0 and out["infinity"] == "0"


def test_nagata_verify_failure_reports_witness(capsys, s0124_file, tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"sets": [["0", "1"], ["2"], ["4"]], "s": "1", "c": "1"}))
    code, out = run(capsys, "nagata", "verify", s0124_file, "--cover", fam, "--m", "1")
    assert code == 1 and out["command"] == "nagata verify"
    assert sorted(out["witness"]) == ["1", "2"]
    code, out = run(capsys, "nagata", "verify", s0124_file, "--cover", fam, "--m", "2")
    assert code == 0


def test_nagata_split_hier_brute_transport(capsys, s0124_file, grid, tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"sets": [["0", "1"], ["2"], ["4"]], "s": "1/4"}))
    code, out = run(capsys, "nagata", "split", s0124_file, "--cover", fam, "--n", "1")
    assert code == 0 and out["ok"] and len(out["families"]) == 2
    code, out = run(capsys, "nagata", "split", s0124_file, "--cover", fam, "--n", "0", "--s", "1")
    assert code == 1 and "precondition" in out
    code, out = run(capsys, "nagata", "hier", s0124_file, "--r", "16", "--n", "1", "--c", "256")
    assert code == 0 and out["ok"]
    code, out = run(capsys, "nagata", "brute", s0124_file, "--s", "1", "--c", "1")
    assert code == 0 and out["m"] == 2
    code, out = run(capsys, "nagata", "transport", grid, "--o", "2", "--s", "1/1000000")
    assert code == 0 and out["ok"]


def test_hausdorff_commands(capsys, tmp_path):
    path = tmp_path / "line.json"
    path.write_text(dumps_space(line_space(range(33))))
    code, out = run(capsys, "hausdorff-dim", path)
    assert code == 0 and abs(out["dimension"] - 1) < 0.2
    code, out = run(capsys, "--threads", "2", "hausdorff-dim", path)
    assert code == 0
    code, out = run(capsys, "transport-hausdorff", path, "--o", "5", "--eps", "4", "--delta", "1/2")
    assert code == 0 and out["uncovered"] == []


def test_generate_and_corpus(capsys, tmp_path):
    out_path = tmp_path / "c.json"
    code, out = run(capsys, "generate", "cantor", "--depth", "3", "-o", out_path)
    assert code == 0 and load_space(out_path).n == 8
    code, out = run(capsys, "generate", "snowflake", "--from", out_path, "--eps", "2")
    assert code == 0 and isinstance(out, dict) and len(out["points"]) == 8
    code, first = run(capsys, "--seed", "3", "generate", "tree-ultrametric", "--depth", "2", "--branching", "3")
    code, again = run(capsys, "--seed", "3", "generate", "tree-ultrametric", "--depth", "2", "--branching", "3")
    assert first == again
    code, out = run(capsys, "generate", "snowflake")
    assert code == 2
    code, out = run(capsys, "corpus", "emit", tmp_path / "corpus")
    assert code == 0 and out["written"] >= 50
    assert (tmp_path / "corpus" / "manifest.json").exists()


def test_env_threads_default(monkeypatch, capsys, grid):
    monkeypatch.setenv("MOEBIUSLAB_THREADS", "3")
    from moebiuslab.cli import build_parser
    assert build_parser().parse_args(["validate", str(grid)]).threads == 3
