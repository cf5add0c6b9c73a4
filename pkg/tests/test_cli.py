import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from hybrid_bracket.algebra import generators, random_observable
from hybrid_bracket.cli import InputError, load_observable, main, save_observable


def run(argv, capsys):
    status = main(argv)
    out, err = capsys.readouterr()
    return status, out, err


@pytest.fixture
def spin_hamiltonian(tmp_path):
    path = tmp_path / "H.json"
    H = generators("k", 2) * generators("pauli_z", 2) * 1.5
    save_observable(H, path)
    return path


def test_check_identities_passes(capsys):
    status, out, _ = run(["check-identities", "--seed", "42", "--trials", "200", "--tolerance", "1e-12"], capsys)
    assert status == 0
    rep = json.loads(out)
    names = {r["identity"] for r in rep["identities"]}
    assert {
        "anderson_product_rule_left",
        "anderson_product_rule_right",
        "abt_product_rule",
        "abt_symmetric_product_rule",
        "abt_antisymmetry",
        "abt_self_bracket",
    } <= names
    assert all(r["passed"] and r["trial_count"] == 200 for r in rep["identities"])


def test_check_identities_exit_2_when_tolerance_exceeded(capsys):
    status, out, _ = run(
        ["check-identities", "--trials", "10", "--tolerance", "1e-30", "--identity", "abt_product_rule"], capsys
    )
    assert status == 2
    assert json.loads(out)["passed"] is False


def test_determinism(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert main(["check-identities", "--seed", "7", "--trials", "30", "-o", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_seed_env_override(tmp_path, monkeypatch):
    paths = [tmp_path / n for n in ("a.json", "b.json")]
    monkeypatch.setenv("HYBRID_BRACKET_SEED", "99")
    main(["check-identities", "--seed", "1", "--trials", "10", "-o", str(paths[0])])
    monkeypatch.delenv("HYBRID_BRACKET_SEED")
    main(["check-identities", "--seed", "99", "--trials", "10", "-o", str(paths[1])])
    assert json.loads(paths[0].read_text())["seed"] == 99
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_bad_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("HYBRID_BRACKET_SEED", "abc")
    status, _, err = run(["check-identities", "--trials", "1"], capsys)
    assert status == 1 and "HYBRID_BRACKET_SEED" in err


def test_scenario_spin(capsys):
    status, out, _ = run(["scenario-spin", "--c", "1", "--t", "2", "--x0", "0", "--epsilon", "0.5"], capsys)
    assert status == 0
    rep = json.loads(out)
    assert [b["value"] for b in rep["branches"]] == pytest.approx([-2.0, 2.0], abs=1e-12)
    assert [b["prob"] for b in rep["branches"]] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert rep["resolved"] is True
    assert rep["terminated_early"] is True


def test_scenario_spin_unresolved_csv(capsys):
    status, out, _ = run(["scenario-spin", "--c", "1", "--t", "0.1", "--epsilon", "0.5", "--format", "csv"], capsys)
    assert status == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    bins = [r for r in rows if r["kind"] == "bin"]
    assert len(bins) == 1 and float(bins[0]["prob"]) == pytest.approx(1.0)


def test_scenario_momentum_zero_coupling(capsys):
    status, out, _ = run(["scenario-momentum", "--c", "0", "--t", "5", "--x0", "1.5"], capsys)
    assert status == 0
    for b in json.loads(out)["branches"]:
        assert b["x_quantum"] == b["x_quasiclassical"] == b["x_meanfield"] == pytest.approx(1.5)


def test_scenario_momentum_csv(capsys):
    status, out, _ = run(["scenario-momentum", "--c", "1", "--p-bar", "2", "--t", "1", "--format", "csv"], capsys)
    assert status == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["x_quasiclassical"]) for r in rows] == pytest.approx([2.0, -2.0])


def test_evolve_command(tmp_path, spin_hamiltonian, capsys):
    A = tmp_path / "A.json"
    save_observable(generators("x", 2), A)
    status, out, _ = run(
        ["evolve", "--observable", str(A), "--hamiltonian", str(spin_hamiltonian), "--order", "3", "--t", "2"], capsys
    )
    assert status == 0
    rep = json.loads(out)
    assert rep["terminated_early"] is True and rep["order"] == 3
    assert rep["remainder_bound"] == 0.0
    value = {(t["a"], t["b"]): np.array(t["matrix"]) for t in rep["value"]["terms"]}
    np.testing.assert_allclose(value[(0, 0)][..., 0], np.diag([3.0, -3.0]))


def test_evolve_dimension_mismatch(tmp_path, spin_hamiltonian, capsys):
    A = tmp_path / "A.json"
    save_observable(generators("x", 3), A)
    status, _, err = run(["evolve", "--observable", str(A), "--hamiltonian", str(spin_hamiltonian)], capsys)
    assert status == 1 and "dimension" in err


def test_canonical_scan_command(spin_hamiltonian, capsys):
    status, out, _ = run(["canonical-scan", "--hamiltonian", str(spin_hamiltonian), "--order", "3"], capsys)
    assert status == 0
    rep = json.loads(out)
    assert len(rep["residuals"]) == 6
    assert all(max(r["per_order"]) < 1e-12 for r in rep["residuals"])


def test_canonical_scan_csv(spin_hamiltonian, capsys):
    status, out, _ = run(
        ["canonical-scan", "--hamiltonian", str(spin_hamiltonian), "--order", "2", "--format", "csv"], capsys
    )
    assert status == 0
    assert len(list(csv.DictReader(io.StringIO(out)))) == 6 * 3


@pytest.mark.parametrize(
    "argv",
    [
        ["check-identities", "--tolerance", "0"],
        ["check-identities", "--trials", "0"],
        ["scenario-spin", "--epsilon", "-1"],
        ["scenario-momentum", "--amp-plus", "0", "--amp-minus", "0"],
        ["scenario-momentum", "--width", "-1"],
        ["evolve", "--observable", "/nonexistent.json", "--hamiltonian", "/nonexistent.json"],
    ],
)
def test_input_errors_exit_1(argv, capsys):
    status, _, err = run(argv, capsys)
    assert status == 1
    assert err.startswith("error:")


# -- load_observable ------------------------------------------------------------------


def test_load_spin_hamiltonian(spin_hamiltonian):
    H = load_observable(spin_hamiltonian)
    assert H == generators("k", 2) * generators("pauli_z", 2) * 1.5


def test_load_mismatched_matrix_names_term(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(
        json.dumps(
            {
                "dim": 2,
                "hbar": 1.0,
                "terms": [
                    {"a": 1, "b": 0, "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]},
                    {"a": 0, "b": 0, "matrix": [[[1, 0]]]},
                ],
            }
        )
    )
    with pytest.raises(InputError, match=r"terms\[1\]"):
        load_observable(path)


def test_load_invalid_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "dim": 2,\n  "terms": [\n')
    with pytest.raises(InputError, match="line"):
        load_observable(path)


def test_load_nan_rejected(tmp_path):
    path = tmp_path / "nan.json"
    path.write_text('{"dim": 1, "terms": [{"a": 0, "b": 0, "matrix": [[[NaN, 0]]]}]}')
    with pytest.raises(InputError, match="NaN"):
        load_observable(path)


def test_load_empty_terms_is_zero(tmp_path):
    path = tmp_path / "zero.json"
    path.write_text('{"dim": 3, "hbar": 1.0, "terms": []}')
    A = load_observable(path)
    assert A.is_zero() and A.dim == 3


def test_round_trip_random(tmp_path, rng):
    for i in range(25):
        A = random_observable(rng, (2, 3, 4)[i % 3], 3, hbar=0.5 + i)
        path = tmp_path / f"A{i}.json"
        save_observable(A, path)
        B = load_observable(path)
        assert B.hbar == A.hbar and (A - B).norm() <= 1e-14


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "hybrid_bracket", "scenario-momentum", "--c", "0", "--t", "1"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["command"] == "scenario-momentum"
