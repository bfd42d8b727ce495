import json
from pathlib import Path

import numpy as np
import pytest

from charfunc.cli import main
from charfunc.io import build_model, load_spec, parse_spec, spec_to_dict
from charfunc.errors import ModelSpecError

SPECS = Path(__file__).resolve().parents[1] / "demos" / "specs"


def run_analyze(tmp_path, spec, **extra):
    if isinstance(spec, dict):
        p = tmp_path / "spec.json"
        p.write_text(json.dumps(spec))
        spec = p
    out = tmp_path / "report.json"
    args = ["analyze", "--spec", str(spec), "--out", str(out)]
    for k, v in extra.items():
        args += [f"--{k}", str(v)]
    code = main(args)
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_scalar_atom_model(tmp_path):
    code, rep = run_analyze(tmp_path, SPECS / "scalar_atom.json")
    assert code == 0 and rep["passed"]
    assert set(rep["profile"]["rank_delta"]) == {0}
    assert all(c["status"] == "pass" for c in rep["checks"])


def test_scalar_lebesgue_model(tmp_path):
    code, rep = run_analyze(tmp_path, SPECS / "scalar_lebesgue.json", grid=256)
    assert code == 0
    assert set(rep["profile"]["rank_delta"]) == {1} == set(rep["profile"]["n_u"])
    names = {c["check_name"]: c["status"] for c in rep["checks"]}
    assert names["theorem_rank_identity"] == "pass"
    assert len(rep["profile"]["angles"]) == 256


def test_matrix_spec_with_file_refs(tmp_path):
    code, rep = run_analyze(tmp_path, SPECS / "rotation_3x3.json")
    assert code == 0
    assert rep["gamma_form"]["d"] == 3 and rep["gamma_form"]["k"] == 1
    assert rep["split"]["dim_cnu"] + rep["split"]["dim_unitary"] == 3


def test_report_round_trip(tmp_path):
    _, rep = run_analyze(tmp_path, SPECS / "rank_one_ac.json", grid=64)
    again = parse_spec(json.loads(json.dumps(rep["model"])))
    assert again.equivalent(load_spec(str(SPECS / "rank_one_ac.json")))


def test_round_trip_sampled_ac():
    M = 8
    samples = [[[1 + 0.5 * np.cos(2 * np.pi * j / M)]] for j in range(M)]
    spec = parse_spec({"measure_input": {"gamma": [[0.2]], "ac": {"grid": M, "samples": samples}}})
    assert parse_spec(spec_to_dict(spec)).equivalent(spec)
    m = build_model(spec)
    assert m.mu.M == M and np.allclose(m.mu.total_mass, 1.0)


@pytest.mark.parametrize("bad", [
    "{not json",
    json.dumps({"options": {}}),
    json.dumps({"matrix_input": {"U": [[1]], "K": [[0]]}, "measure_input": {"gamma": [[0.5]]}}),
    json.dumps({"matrix_input": {"U": [[1]], "K": [[0.5]]}}),  # not a contraction
    json.dumps({"matrix_input": {"U": [[1]], "K": [["x"]]}}),
    json.dumps({"measure_input": {"gamma": [[0.5]], "atoms": [{"angle_turns": 1.2, "weight": [[1]]}]}}),
    json.dumps({"measure_input": {"gamma": [[1.0]], "atoms": [{"angle_turns": 0.1, "weight": [[1]]}]}}),
    json.dumps({"measure_input": {"gamma": [[0.5]], "ac": {"constant": [[2]]}}}),  # mass 2
    json.dumps({"matrix_input": {"U": [[1]], "K": [[-0.5]]}, "options": {"grid": 0}}),
    json.dumps({"matrix_input": {"U": "missing.json", "K": [[-0.5]]}}),
])
def test_input_errors_exit_2(tmp_path, bad, capsys):
    p = tmp_path / "bad.json"
    p.write_text(bad)
    code, _ = run_analyze(tmp_path, p)
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_normalize_mass_option(tmp_path):
    spec = {"measure_input": {"gamma": [[0.5]], "ac": {"constant": [[2]]}},
            "options": {"normalize_mass": True, "grid": 64}}
    code, rep = run_analyze(tmp_path, spec)
    assert code == 0 and set(rep["profile"]["rank_delta"]) == {1}


def test_complex_entries_parse():
    spec = parse_spec({"matrix_input": {"U": [[[0, 1]]], "K": [[[0, -0.5]]]}})
    assert spec.matrix_input["U"][0, 0] == 1j
    with pytest.raises(ModelSpecError):
        parse_spec({"matrix_input": {"U": [[1, 0], [0]], "K": [[0]]}})


def test_verify_zero_seeds_runs_closed_form(capsys):
    assert main(["verify", "--suite", "all", "--seeds", "0"]) == 0
    out = capsys.readouterr().out
    assert "scalar_closed_form" in out and "theorem[lebesgue]" in out


def test_verify_corollaries_table(capsys):
    assert main(["verify", "--suite", "corollaries", "--seeds", "5"]) == 0
    out = capsys.readouterr().out
    assert "co-inner" in out and "stability_innerness" in out


def test_usage_errors():
    assert main(["verify", "--suite", "nope"]) == 2
    assert main(["sweep", "--dims", "a,b", "--seeds", "1", "--out", "x"]) == 2
    assert main([]) == 2


def test_sweep_rows_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--dims", "2,4,8", "--seeds", "10", "--out", str(a)]) in (0, 1)
    main(["sweep", "--dims", "2,4,8", "--seeds", "10", "--out", str(b), "--jobs", "2"])
    lines = a.read_text().splitlines()
    assert len(lines) == 31
    assert a.read_bytes() == b.read_bytes()
    assert main(["sweep", "--dims", "17", "--seeds", "1", "--out", str(a)]) == 2


def test_sweep_rows_pass(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--dims", "2,3", "--ranks", "1,2", "--seeds", "4", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 16  # (2,1) (2,2) (3,1) (3,2) x 4 seeds
    assert all(r.endswith("pass,pass,pass") for r in rows)
