import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

from fqdyn.cli import dumps, main
from fqdyn.geometry import build_model, model_to_json
from fqdyn.harness import random_model, symmetric_group_3
from fqdyn.verify import Job, exit_code, run_verification

from conftest import A1_F4, X16, variety

SPECS = Path(__file__).resolve().parent.parent / "specs"


def strip_timings(report):
    return {k: v for k, v in report.items() if k != "timings"}


def test_build_a1(tmp_path, capsys):
    out = tmp_path / "model.json"
    assert main(["build", str(SPECS / "a1_f4.json"), "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["kind"] == "model" and data["points"] == 4


def test_build_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["build", str(SPECS / "x16_f4.json"), "-o", str(a)])
    main(["build", str(SPECS / "x16_f4.json"), "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_build_commutation_failure(capsys):
    assert main(["build", str(SPECS / "bad_commute.json")]) == 3
    err = capsys.readouterr().err
    assert "'ta'" in err and "endomorphism" in err


def test_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "variety", ')
    assert main(["build", str(bad)]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2


def test_bad_polynomial_is_parse_error(write_json):
    assert main(["build", write_json("p.json", {**A1_F4, "equations": ["x**2"]})]) == 2


def test_cap_exceeded(capsys):
    assert main(["build", str(SPECS / "a1_f4_w12.json"), "--cap-points", "1000"]) == 4


def test_relations_klein(capsys, tmp_path):
    out = tmp_path / "rel.json"
    assert main(["relations", str(SPECS / "x16_f4.json"), "-o", str(out)]) == 0
    text = capsys.readouterr().out
    assert "[1, -1, -1, -1, 2]" in text
    data = json.loads(out.read_text())
    assert data["relations"] == [[1, -1, -1, -1, 2]]
    assert [s["name"] for s in data["subgroups"]] == ["1", "<t1>", "<ta>", "<ta*t1>", "G"]


def test_relations_trivial_group(write_json, capsys):
    path = write_json("t.json", {"kind": "abstract", "points": 2, "frobenius": [1, 0]})
    assert main(["relations", path]) == 0
    assert "no nontrivial relations" in capsys.readouterr().out


def test_relations_s3(write_json, capsys, tmp_path):
    path = write_json("s3.json", random_model(random.Random(3), symmetric_group_3()))
    out = tmp_path / "rel.json"
    assert main(["relations", path, "-o", str(out)]) == 0
    assert len(json.loads(out.read_text())["relations"]) == 3


def test_relations_invalid_model(write_json):
    path = write_json("bad.json", {"kind": "abstract", "points": 2, "frobenius": [0, 0]})
    assert main(["relations", path]) == 3


def test_verify_x16_all_checks(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", str(SPECS / "x16_f4.json"), "-o", str(out)]) == 0
    report = json.loads(out.read_text())
    assert set(report) >= {"version", "spec_hash", "model", "group", "subgroups", "relations", "checks", "exactness", "timings"}
    kinds = {r["check"] for r in report["checks"]}
    assert kinds == {"A", "B", "C", "D", "bounds", "iH", "lemma"}
    assert all(r["passed"] for r in report["checks"])
    assert all(c["certified"] for c in report["exactness"])
    assert exit_code(report) == 0
    assert main(["report", str(out)]) == 0


def test_verify_refuses_inexact_request(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", str(SPECS / "a1_f4.json"), "--checks", "A", "--n", "1", "-o", str(out)]) == 4
    report = json.loads(out.read_text())
    assert report["error"]["type"] == "ExactnessError"
    assert main(["report", str(out)]) == 4


def test_verify_non_relation_requires_force(tmp_path):
    spec = str(SPECS / "x16_f4.json")
    assert main(["verify", spec, "--checks", "A", "--relation", "1,-1,0,0,0"]) == 3
    out = tmp_path / "r.json"
    code = main(["verify", spec, "--checks", "A", "--n", "2", "--relation", "1,-1,0,0,0", "--force", "-o", str(out)])
    assert code == 0
    forced = [r for r in json.loads(out.read_text())["checks"] if r["forced"]]
    assert forced and forced[0]["residual"] == 8 and forced[0]["passed"] is None


def test_verify_endomorphism_required(write_json):
    path = write_json("m.json", {"kind": "abstract", "points": 2, "frobenius": [1, 0]})
    assert main(["verify", path, "--checks", "B"]) == 3
    assert main(["verify", path]) == 0


def test_unknown_check(tmp_path):
    assert main(["verify", str(SPECS / "x16_f4.json"), "--checks", "Z"]) == 3


def test_exit_code_is_function_of_report(tmp_path):
    out = tmp_path / "r.json"
    main(["verify", str(SPECS / "x16_f4.json"), "--checks", "A", "-o", str(out)])
    report = json.loads(out.read_text())
    report["checks"][0]["passed"] = False
    report["checks"][0]["residual"] = 1
    out.write_text(json.dumps(report))
    assert main(["report", str(out)]) == 1


def test_round_trip_matches_in_memory(tmp_path):
    model_path, report_path = tmp_path / "model.json", tmp_path / "report.json"
    assert main(["build", str(SPECS / "x16_f4.json"), "-o", str(model_path)]) == 0
    assert main(["verify", str(model_path), "--n", "1,2,3,4", "--nmax", "8", "-o", str(report_path)]) == 0
    from_disk = json.loads(report_path.read_text())
    in_memory = run_verification(build_model(variety(X16)), Job(n_values=(1, 2, 3, 4), n_max=8))
    assert dumps(strip_timings(from_disk)) == dumps(strip_timings(json.loads(json.dumps(in_memory))))


def test_threads_flag_gives_same_report(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", str(SPECS / "x16_f4.json"), "-o", str(a)])
    main(["verify", str(SPECS / "x16_f4.json"), "--threads", "4", "-o", str(b)])
    assert strip_timings(json.loads(a.read_text())) == strip_timings(json.loads(b.read_text()))


def test_console_entry_point(tmp_path):
    out = tmp_path / "m.json"
    proc = subprocess.run([sys.executable, "-m", "fqdyn", "build", str(SPECS / "a1_f4.json"), "-o", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    spec = variety(json.loads((SPECS / "a1_f4.json").read_text()))
    assert out.read_text() == dumps(model_to_json(build_model(spec)))


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
