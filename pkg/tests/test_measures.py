import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gatedist.experiments import weyl_grid
from gatedist.gates import (
    GateFamilySpec,
    PAULI,
    canonical_two_qubit,
    random_cue,
    random_dual,
    swap,
    u_cz,
)
from gatedist.linalg import DomainError, realign, unitarity_deficit
from gatedist.measures import (
    SchmidtData,
    entangling_power,
    gate_typicality,
    kd_bounds,
    linear_entropy,
    operator_entanglement,
    operator_schmidt,
    renyi_half,
    stability_check,
)
from oracles import haar, mc_entangling_power, pauli_schmidt

GATES = {
    "identity": lambda: np.eye(9),
    "cz3": lambda: u_cz(3),
    "cue3": lambda: random_cue(9, 1),
    "dual3": lambda: random_dual(3, 2),
    "canon": lambda: canonical_two_qubit(0.6, 0.3, 0.2),
    "swap2": lambda: swap(2),
    "chm4": lambda: GateFamilySpec("chm_diagonal", 4).matrix(),
}


@pytest.mark.parametrize("name", GATES)
def test_schmidt_reconstruction_and_normalization(name):
    u = GATES[name]()
    sd = operator_schmidt(u)
    assert np.linalg.norm(u - sd.reconstruct()) <= 1e-8
    assert sd.lambdas.sum() == pytest.approx(1, abs=1e-10)
    assert np.all(sd.lambdas >= 0)
    assert np.all(np.diff(sd.lambdas) <= 1e-15)
    d = sd.d
    gram_a = np.einsum("nij,mij->nm", sd.basis_a, sd.basis_a.conj())
    np.testing.assert_allclose(gram_a, d * np.eye(d * d), atol=1e-10)


def test_schmidt_product_gate(rng):
    u = np.kron(haar(3, rng), haar(3, rng))
    np.testing.assert_allclose(operator_schmidt(u).lambdas, [1] + [0] * 8, atol=1e-12)


def test_schmidt_swap_and_cz():
    np.testing.assert_allclose(operator_schmidt(swap(2)).lambdas, [0.25] * 4, atol=1e-14)
    lam = operator_schmidt(u_cz(2)).lambdas
    np.testing.assert_allclose(lam, pauli_schmidt(u_cz(2)), atol=1e-14)
    np.testing.assert_allclose(lam, [0.5, 0.5, 0, 0], atol=1e-14)


@pytest.mark.parametrize("name", GATES)
def test_lambda1_lower_limit_iff_dual(name):
    u = GATES[name]()
    sd = operator_schmidt(u)
    d = sd.d
    assert sd.lambdas[0] >= 1 / d**2 - 1e-12
    dual = unitarity_deficit(realign(u)) < 1e-8
    assert dual == (abs(sd.lambdas[0] - 1 / d**2) < 1e-9)


def test_bounds_identity():
    b = kd_bounds(np.eye(4))
    assert b.kd_star == pytest.approx(0, abs=1e-12)
    assert b.kd_upper == pytest.approx(0, abs=1e-12)


def test_bounds_swap_with_unitary_schmidt_basis():
    # SWAP = (1/2) sum_k sigma_k (x) sigma_k; Paulis satisfy tr(m m^dagger) = 2.
    sd = SchmidtData(np.full(4, 0.25), np.array(PAULI), np.array(PAULI), 2)
    np.testing.assert_allclose(sd.reconstruct(), swap(2), atol=1e-14)
    b = kd_bounds(swap(2), schmidt=sd)
    assert b.kd_star == pytest.approx(2)
    assert b.kd_upper == pytest.approx(2)


def test_bounds_cz():
    b = kd_bounds(u_cz(2))
    assert b.kd_star == pytest.approx(np.sqrt(8 - 8 / np.sqrt(2)), abs=1e-12)
    assert b.kd_star == pytest.approx(1.5307337, abs=1e-6)


@pytest.mark.parametrize("name", GATES)
def test_bounds_ordering(name):
    u = GATES[name]()
    b = kd_bounds(u)
    d = operator_schmidt(u).d
    assert 0 <= b.kd_star <= b.kd_upper
    assert b.kd_star <= np.sqrt(2 * d * d - 2 * d) + 1e-9


def test_operator_entanglement_values(rng):
    assert operator_entanglement(np.kron(haar(2, rng), haar(2, rng))) == pytest.approx(0, abs=1e-12)
    assert operator_entanglement(swap(2)) == pytest.approx(0.75)


def test_entangling_power_and_typicality_of_products(rng):
    u = np.kron(haar(2, rng), haar(2, rng))
    assert entangling_power(u) == pytest.approx(0, abs=1e-12)
    assert gate_typicality(u) == pytest.approx(0, abs=1e-12)
    assert entangling_power(swap(2)) == pytest.approx(0, abs=1e-12)
    assert gate_typicality(swap(2)) == pytest.approx(1)


def test_entangling_power_cnot():
    assert entangling_power(u_cz(2)) == pytest.approx(2 / 9)


@pytest.mark.parametrize("which", ["cz", "random"])
def test_entangling_power_matches_state_sampling(which):
    rng = np.random.default_rng(99)
    u = u_cz(2) if which == "cz" else haar(4, rng)
    mean, se = mc_entangling_power(u, 4000, rng)
    assert abs(entangling_power(u) - mean) < 4 * se


def test_typicality_maximal_at_swap_corner():
    grid = [(c, gate_typicality(canonical_two_qubit(*c))) for c in weyl_grid(9)]
    best = max(grid, key=lambda x: x[1])
    np.testing.assert_allclose(best[0], [np.pi / 4] * 3)
    others = [g for c, g in grid if not np.allclose(c, np.pi / 4)]
    assert max(others) < best[1]


def test_local_invariance_of_ep_gt():
    rng = np.random.default_rng(5)
    for d in (2, 3):
        u = random_cue(d * d, rng)
        dressed = np.kron(haar(d, rng), haar(d, rng)) @ u @ np.kron(haar(d, rng), haar(d, rng))
        assert entangling_power(dressed) == pytest.approx(entangling_power(u), abs=1e-8)
        assert gate_typicality(dressed) == pytest.approx(gate_typicality(u), abs=1e-8)


def test_entropies():
    assert linear_entropy(np.eye(3) / 3) == pytest.approx(2 / 3)
    pure = np.zeros((3, 3))
    pure[0, 0] = 1
    assert linear_entropy(pure) == pytest.approx(0, abs=1e-15)
    assert renyi_half(pure) == pytest.approx(0, abs=1e-15)
    assert renyi_half(np.diag([0.5, 0.5, 0])) == pytest.approx(np.log(2))


def test_entropy_input_validation():
    with pytest.raises(DomainError):
        linear_entropy(np.eye(3))
    with pytest.raises(DomainError):
        renyi_half(np.diag([1.5, -0.5]))
    with pytest.raises(DomainError):
        renyi_half(np.array([[0.5, 0.5], [0.0, 0.5]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_entropy_ranges(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    assert -1e-12 <= linear_entropy(rho) <= 1 - 1 / d + 1e-12
    assert -1e-12 <= renyi_half(rho) <= np.log(d) + 1e-12


def test_stability_cz():
    assert stability_check(u_cz(2), 2) == pytest.approx(2, abs=1e-3)


def test_stability_dual():
    assert stability_check(random_dual(2, 8), 2) == pytest.approx(2, abs=1e-3)


def test_stability_product(rng):
    assert stability_check(np.kron(haar(2, rng), haar(2, rng)), 2) == 0.0
