import json

import pytest

from avseq import cli

EX35_SPEC_DOC = {
    "curve": ["0", "0", "0", "-21", "-20"],
    "m": 2,
    "H": [
        [["-1", "0"], ["-1", "0"]],
        [["5", "0"], ["5", "0"]],
        [["-1", "0"], ["5", "0"]],
    ],
    "L": [["8", "18"], ["-3", "4"]],  # (U' + T1, U')
}


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_reproduce_ex31_table(capsys):
    code, out, _ = run_cli(capsys, "reproduce", "ex31", "--no-timing", "--format", "json")
    assert code == 0
    rows = [json.loads(line) for line in out.strip().splitlines()]
    quotient = [r["quotient"] for r in rows]
    assert quotient == [
        "1", "1", "7*17*41", "13*29*101", "103*113*1087*2377",
        "7*11*17*41*89*2713*8329", "23*23497*156671*48883577521",
    ]
    assert [r["elliptic"] for r in rows] == quotient


def test_reproduce_ex35_table(capsys):
    code, out, _ = run_cli(capsys, "reproduce", "ex35", "--s", "2,3",
                           "--no-timing", "--format", "json")
    assert code == 0
    rows = [json.loads(line) for line in out.strip().splitlines()]
    assert [r["quotient"] for r in rows] == [
        "1", "5*11*13", "1", "5*11*13*67*197*19249*21649", "1",
        "5*7*11*13*17*19*23*191*251*263*311*16103*1786451*385044001",
    ]
    for r in rows:
        if r["n"] % 2 == 0:
            assert r["elliptic"] == r["quotient"]
        else:
            assert r["elliptic"] is None


def test_eds_identity_point_is_input_error(capsys):
    code, _, err = run_cli(capsys, "eds", "--curve", "0,8,0,-9,0", "--point", "O")
    assert code == 2
    assert "error (input)" in err


def test_eds_torsion_point_is_input_error(capsys):
    code, _, _ = run_cli(capsys, "eds", "--curve", "0,8,0,-9,0", "--point", "0,0")
    assert code == 2


def test_cseq_quotient_json_round_trip(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(EX35_SPEC_DOC))
    args = ("cseq-quotient", "--spec", str(spec_path), "--range", "1:6",
            "--s", "2,3", "--format", "json", "--no-timing")
    code, out, _ = run_cli(capsys, *args)
    assert code == 0
    golden = [json.loads(line) for line in out.strip().splitlines()]
    code2, out2, _ = run_cli(capsys, *args)
    assert code2 == 0
    assert [json.loads(line) for line in out2.strip().splitlines()] == golden
    # schema check
    for rec in golden:
        assert set(rec) == {"n", "radical", "factors", "primitive"}
        assert isinstance(rec["radical"], str)
        for p, e in rec["factors"]:
            assert isinstance(p, str) and isinstance(e, int)


def test_cache_cold_and_warm_runs_byte_identical(tmp_path, capsys):
    cache_path = tmp_path / "factors.json"
    args = ("reproduce", "ex31", "--no-timing", "--cache", str(cache_path))
    code, cold, err = run_cli(capsys, *args)
    assert code == 0 and cache_path.exists()
    code2, warm, _ = run_cli(capsys, *args)
    assert code2 == 0
    assert warm == cold


def test_corrupted_cache_is_ignored_with_warning(tmp_path, capsys):
    cache_path = tmp_path / "factors.json"
    cache_path.write_text("{broken")
    code, out, err = run_cli(capsys, "eds", "--curve=0,0,0,-21,-20",
                             "--point=-3,4", "--range", "1:3",
                             "--cache", str(cache_path), "--no-timing")
    assert code == 0
    assert "warning" in err


def test_velu_json_schema(capsys):
    code, out, _ = run_cli(capsys, "velu", "--curve", "0,8,0,-9,0",
                           "--point", "0,0", "--format", "json", "--no-timing")
    assert code == 0
    doc = json.loads(out.strip().splitlines()[0])
    assert doc["degree"] == 2
    assert doc["codomain"] == ["0", "8", "0", "36", "288"]
    assert doc["kernel_polynomial"] == ["0", "1"]


def test_pipeline_json_schema(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(EX35_SPEC_DOC))
    code, out, _ = run_cli(capsys, "pipeline", "--spec", str(spec_path),
                           "--validate", "8", "--format", "json", "--no-timing")
    assert code == 0
    doc = json.loads(out.strip().splitlines()[0])
    assert set(doc) >= {"n1", "u", "d", "E0", "Q0", "S", "checks"}
    assert doc["n1"] == 2
    assert all(set(c) == {"n", "lhs", "rhs", "ok"} for c in doc["checks"])
    assert all(c["ok"] for c in doc["checks"])


def test_torsion_lift_degeneracy_exit_code(tmp_path, capsys):
    spec_path = tmp_path / "degenerate.json"
    spec_path.write_text(json.dumps({
        "curve": ["0", "0", "0", "-21", "-20"],
        "m": 1, "H": [], "L": [["-1", "0"]],
    }))
    code, _, err = run_cli(capsys, "cseq-quotient", "--spec", str(spec_path),
                           "--range", "2:2", "--no-timing")
    assert code == 3
    assert "degenerate" in err


def test_budget_exhaustion_exit_code(capsys):
    code, _, err = run_cli(capsys, "cseq-ec", "--curve", "0,8,0,36,288",
                           "--point", "8,-40", "--range", "7:7", "--s", "2",
                           "--budget", "1", "--no-timing")
    assert code == 4
    assert "budget" in err


def test_bad_range_exit_code(capsys):
    code, _, _ = run_cli(capsys, "eds", "--curve", "0,8,0,-9,0",
                         "--point", "9,-36", "--range", "5:1")
    assert code == 2


def test_missing_spec_file_exit_code(capsys):
    code, _, _ = run_cli(capsys, "pipeline", "--spec", "/nonexistent.json")
    assert code == 2


def test_parallel_jobs_produce_ordered_identical_output(tmp_path, capsys):
    args = ("cseq-ec", "--curve", "0,8,0,36,288", "--point", "8,-40",
            "--range", "1:6", "--s", "2", "--format", "json", "--no-timing")
    _, serial, _ = run_cli(capsys, *args)
    _, parallel, _ = run_cli(capsys, *args, "--jobs", "3")
    assert serial == parallel


def test_selftest_passes(capsys):
    code, out, _ = run_cli(capsys, "selftest")
    assert code == 0
    assert "all checks passed" in out
