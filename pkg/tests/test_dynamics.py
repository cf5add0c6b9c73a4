import json
import math

import numpy as np
import pytest

import dense_oracle as dz
from hybrid_bracket.algebra import PAULI, generators, random_observable
from hybrid_bracket.dynamics import (
    CANONICAL_PAIRS,
    TaylorSolution,
    canonical_scan,
    evaluate_trajectory,
    taylor_evolve,
)


def rotation_closed_form(n, omega):
    """n-th time derivative at 0 of sx cos(wt) - sy sin(wt)."""
    cos_d = [1, 0, -1, 0][n % 4] * omega**n
    sin_d = [0, 1, 0, -1][n % 4] * omega**n
    return cos_d * PAULI["pauli_x"] - sin_d * PAULI["pauli_y"]


def heisenberg_exact(A, H, t, hbar=1.0):
    """exp(iHt/hbar) A exp(-iHt/hbar) via eigendecomposition of H."""
    w, V = np.linalg.eigh(H)
    U = V @ np.diag(np.exp(-1j * w * t / hbar)) @ V.conj().T
    return U.conj().T @ A @ U


def test_spin_example_terminates(spin):
    c = 0.8
    H = spin["k"] * spin["pauli_z"] * c
    sol = taylor_evolve(spin["x"], H, 3)
    assert sol.terminated_early
    assert sol.coefficients[0] == spin["x"]
    assert sol.coefficients[1] == spin["pauli_z"] * c
    assert all(cf.is_zero() for cf in sol.coefficients[2:])
    assert len(sol.coefficients) == 4

    t = 1.7
    traj = evaluate_trajectory(sol, t)
    assert traj.value == spin["x"] + spin["pauli_z"] * (c * t)
    assert traj.remainder_bound == 0.0

    k_sol = taylor_evolve(spin["k"], H, 3)
    assert k_sol.terminated_early and k_sol.coefficients[1].is_zero()


def test_spin_example_sigma_observables_terminate_early(spin):
    H = spin["k"] * spin["pauli_z"] * 0.5
    sol = taylor_evolve(spin["pauli_z"], H, 4)
    assert sol.terminated_early and sol.coefficients[1].is_zero()


def test_free_classical_particle(spin):
    H = spin["k"] * spin["k"] * 0.5
    sol = taylor_evolve(spin["x"], H, 4)
    assert sol.coefficients[1] == spin["k"]
    assert all(c.is_zero() for c in sol.coefficients[2:])
    assert evaluate_trajectory(sol, 2.0).value == spin["x"] + spin["k"] * 2.0


@pytest.mark.parametrize("omega,hbar", [(1.0, 1.0), (2.3, 0.7)])
def test_rotation_coefficients(omega, hbar):
    sx = generators("pauli_x", 2, hbar)
    H = generators("pauli_z", 2, hbar) * (hbar * omega / 2)
    sol = taylor_evolve(sx, H, 8)
    assert not sol.terminated_early
    for n, c in enumerate(sol.coefficients):
        np.testing.assert_allclose(c.coefficient(0, 0), rotation_closed_form(n, omega), atol=1e-9)


def test_rotation_trajectory_small_t():
    sx = generators("pauli_x", 2)
    sol = taylor_evolve(sx, generators("pauli_z", 2) * 0.5, 8)
    t = 0.1
    traj = evaluate_trajectory(sol, t)
    exact = PAULI["pauli_x"] * math.cos(t) - PAULI["pauli_y"] * math.sin(t)
    err = np.linalg.norm(traj.value.coefficient(0, 0) - exact)
    assert err < 1e-9
    assert err <= traj.remainder_bound


def test_trajectory_at_zero_is_initial(rng):
    A, H = random_observable(rng, 3, 2), random_observable(rng, 3, 2, hermitian=True)
    sol = taylor_evolve(A, H, 5)
    assert evaluate_trajectory(sol, 0.0).value == A


def test_hamiltonian_is_conserved(rng):
    for i in range(20):
        H = random_observable(rng, (2, 3)[i % 2], 1 + i % 3, hermitian=True)
        sol = taylor_evolve(H, H, 4)
        assert sol.terminated_early
        assert all(c.is_zero() for c in sol.coefficients[1:])


def test_linearity(rng):
    H = random_observable(rng, 2, 2, hermitian=True)
    A, B = random_observable(rng, 2, 2), random_observable(rng, 2, 2)
    alpha, beta = 0.3 - 1.1j, 2.0
    combo = taylor_evolve(A * alpha + B * beta, H, 4)
    sa, sb = taylor_evolve(A, H, 4), taylor_evolve(B, H, 4)
    for c, a, b in zip(combo.coefficients, sa.coefficients, sb.coefficients):
        assert (c - (a * alpha + b * beta)).norm() < 1e-10 * max(1.0, c.norm())


def test_quantum_sector_matches_matrix_exponential(rng):
    for _ in range(10):
        A = random_observable(rng, 3, 0, kind="quantum")
        H = random_observable(rng, 3, 0, kind="quantum", hermitian=True) * 0.5
        sol = taylor_evolve(A, H, 8)
        for t in (0.2, 0.5):
            traj = evaluate_trajectory(sol, t)
            exact = heisenberg_exact(A.coefficient(0, 0), H.coefficient(0, 0), t)
            err = np.linalg.norm(traj.value.coefficient(0, 0) - exact)
            # rounding floor once the bound reaches machine precision
            assert err <= traj.remainder_bound + 1e-13


def test_explicit_time_dependence(spin):
    # A(t) = x + t * sz under H = c k sz: dA/dt = c sz + sz
    c = 0.5
    H = spin["k"] * spin["pauli_z"] * c
    sol = taylor_evolve([spin["x"], spin["pauli_z"]], H, 3)
    assert sol.coefficients[1] == spin["pauli_z"] * (c + 1)
    assert sol.terminated_early


def test_taylor_errors(spin):
    with pytest.raises(ValueError):
        taylor_evolve(spin["x"], spin["k"], -1)
    with pytest.raises(ValueError):
        taylor_evolve(spin["x"], generators("k", 3), 2)


def test_solution_serialization(spin):
    sol = taylor_evolve(spin["x"], spin["k"] * spin["pauli_z"], 3)
    data = json.loads(json.dumps(sol.to_dict()))
    assert data["order"] == 3 and data["terminated_early"] is True
    assert len(data["coefficients"]) == 4
    back = TaylorSolution.from_dict(data)
    assert all(a == b for a, b in zip(back.coefficients, sol.coefficients))


# -- canonical scan ---------------------------------------------------------------


def test_spin_hamiltonian_preserves_relations(spin):
    rep = canonical_scan(spin["k"] * spin["pauli_z"] * 1.1, 5)
    for name, vals in rep.residuals.items():
        assert len(vals) == 6
        assert max(vals) < 1e-12, name
    assert rep.initial_defect["x,k"] == 0.0
    # the dim-2 boson pair has [[q, p]] = sz rather than 1
    assert rep.initial_defect["q,p"] > 0


def test_purely_quantum_hamiltonian(rng):
    H = random_observable(rng, 3, 0, kind="quantum", hermitian=True)
    rep = canonical_scan(H, 4)
    assert max(rep.residuals["x,k"]) == 0.0
    for vals in rep.residuals.values():
        assert vals[0] == 0.0


def test_order_zero_residuals_vanish(rng):
    for _ in range(5):
        H = random_observable(rng, 3, 2, hermitian=True)
        rep = canonical_scan(H, 2)
        assert all(v[0] == 0.0 for v in rep.residuals.values())


def test_coupled_boson_scan_against_brute_force():
    dim, c, c2 = 4, 0.7, -0.4
    x, k = generators("x", dim), generators("k", dim)
    q, p = generators("boson_q", dim), generators("boson_p", dim)
    H = x * q * c + k * p * c2
    order = 3
    rep = canonical_scan(H, order)

    Hd = dz.dense(H)
    series = {n: dz.evolve(dz.dense(v), Hd, order) for n, v in zip("xkqp", (x, k, q, p))}
    for u, v in CANONICAL_PAIRS:
        ref = dz.bracket_orders(series[u], series[v], order)
        expected = [0.0] + [dz.norm(r) for r in ref[1:]]
        np.testing.assert_allclose(rep.residuals[f"{u},{v}"], expected, rtol=1e-9, atol=1e-12)
    # this coupling is not of the special form; some relation drifts
    assert rep.max_residual() > 1e-6


def test_scan_serialization(spin):
    rep = canonical_scan(spin["k"] * spin["pauli_z"], 2)
    d = json.loads(json.dumps(rep.to_dict()))
    assert [r["pair"] for r in d["residuals"]] == [f"{u},{v}" for u, v in CANONICAL_PAIRS]
    assert all(len(r["per_order"]) == 3 for r in d["residuals"])


def test_scan_rejects_bad_order(spin):
    with pytest.raises(ValueError):
        canonical_scan(spin["k"], 0)
