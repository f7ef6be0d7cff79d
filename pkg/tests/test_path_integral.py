import numpy as np
import pytest

from oracles import dense_lindblad_trajectory, path_sum_reference
from pild import BathSpec, BudgetError, SpectralDensity, ValidationError, eta_table
from pild.liouville import Generator, JumpOperator, SystemHamiltonian, choi_matrix
from pild.models import build_dimer, build_spin_boson
from pild.path_integral import brute_force_pi, direct_pild, dynamical_maps, iterative_pi
from pild.propagator import propagator_series

SD = SpectralDensity(0.16, 7.5)


def spin_boson_setup(n, dt=0.1, scheme="trailing", rate=0.3, k_max=None):
    m = build_spin_boson()
    bath = BathSpec(SD, 1.0, m.couplings["sigma_z"])
    jumps = [JumpOperator(m.jumps["lower"], rate)]
    Ks = propagator_series(Generator(m.hamiltonian, jumps), dt, n)
    etas = [eta_table(bath, dt, k_max or n, scheme=scheme)]
    return m, bath, Ks, etas


@pytest.mark.parametrize("scheme", ["trailing", "centered"])
def test_brute_force_against_explicit_path_loop(scheme):
    m, bath, Ks, etas = spin_boson_setup(3, scheme=scheme)
    rho0 = m.basis_state("up")
    bf = brute_force_pi(Ks, etas, [bath], rho0, 3)
    for n in (1, 2, 3):
        ref = path_sum_reference(Ks, [etas[0].matrix(n)], [bath.coupling_values], rho0, n)
        assert np.max(np.abs(bf[n] - ref)) <= 1e-13


@pytest.mark.parametrize("scheme", ["trailing", "centered"])
def test_iterative_full_memory_equals_brute_force(scheme):
    m, bath, Ks, etas = spin_boson_setup(5, scheme=scheme)
    rho0 = m.basis_state("up")
    it = iterative_pi(Ks, etas, [bath], rho0, 5, k_max=5)
    bf = brute_force_pi(Ks, etas, [bath], rho0, 5)
    assert np.max(np.abs(it - bf)) <= 1e-12


def test_iterative_truncated_memory_equals_truncated_brute_force():
    # a table truncated at k_max is exactly what iterative_pi computes
    m, bath, Ks, _ = spin_boson_setup(5)
    trunc = eta_table(bath, 0.1, 2)
    rho0 = m.basis_state("up")
    it = iterative_pi(Ks, [trunc], [bath], rho0, 5, k_max=2)
    for n in range(1, 6):
        ref = path_sum_reference(Ks, [trunc.matrix(n)], [bath.coupling_values], rho0, n)
        assert np.max(np.abs(it[n] - ref)) <= 1e-12


def test_two_baths_dimer():
    m = build_dimer()
    baths = [BathSpec(SD, 1.0, m.couplings[k]) for k in ("monomer1", "monomer2")]
    jumps = [JumpOperator(m.jumps["pump"]), JumpOperator(m.jumps["drain"])]
    Ks = propagator_series(Generator(m.hamiltonian, jumps), 0.1, 3)
    etas = [eta_table(b, 0.1, 3) for b in baths]
    rho0 = m.basis_state("gg")
    it = iterative_pi(Ks, etas, baths, rho0, 3, k_max=3)
    bf = brute_force_pi(Ks, etas, baths, rho0, 3)
    assert np.max(np.abs(it - bf)) <= 1e-12


def test_zero_coupling_reduces_to_lindblad():
    m = build_dimer()
    baths = [BathSpec(SpectralDensity(0.0, 7.5), 1.0, m.couplings["monomer1"])]
    jumps = [JumpOperator(m.jumps["pump"]), JumpOperator(m.jumps["drain"])]
    rho0 = m.basis_state("gg")
    _, rhos = direct_pild(m.hamiltonian, jumps, baths, rho0, 0.05, 40, k_max=2)
    ref = dense_lindblad_trajectory(m.hamiltonian.static, [(j.matrix, 1.0) for j in jumps], rho0, 0.05, 40)
    assert np.max(np.abs(rhos - ref)) <= 1e-10


def test_trace_and_hermiticity_preserved():
    m, bath, Ks, etas = spin_boson_setup(30, k_max=4)
    rhos = iterative_pi(Ks, etas, [bath], m.basis_state("up"), 30, k_max=4)
    assert np.max(np.abs(np.trace(rhos, axis1=1, axis2=2) - 1)) <= 1e-12
    assert np.max(np.abs(rhos - rhos.conj().transpose(0, 2, 1))) <= 1e-12


def test_memory_convergence():
    m, bath, Ks, etas = spin_boson_setup(20, k_max=6)
    rho0 = m.basis_state("up")
    runs = {k: iterative_pi(Ks, etas, [bath], rho0, 20, k_max=k) for k in (2, 4, 6)}
    d24 = np.max(np.abs(runs[2] - runs[4]))
    d46 = np.max(np.abs(runs[4] - runs[6]))
    assert d46 < d24


def test_dynamical_maps_reproduce_trajectory():
    m, bath, Ks, etas = spin_boson_setup(8, k_max=3)
    maps = dynamical_maps(Ks, etas, [bath], 8, k_max=3)
    rho0 = np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
    direct = iterative_pi(Ks, etas, [bath], rho0, 8, k_max=3)
    assert np.max(np.abs(maps.apply(rho0) - direct)) <= 1e-13
    assert maps.dt == 0.1 and len(maps) == 8
    trace_row = np.eye(2).reshape(-1)
    for E in maps.maps:
        assert np.max(np.abs(trace_row @ E - trace_row)) <= 1e-12


def test_budget_refusal_names_fitting_kmax():
    m, bath, Ks, etas = spin_boson_setup(6)
    with pytest.raises(BudgetError, match="largest k_max that fits"):
        iterative_pi(Ks, etas, [bath], m.basis_state("up"), 6, k_max=6, memory_budget=10_000)
    with pytest.raises(BudgetError):
        brute_force_pi(Ks, etas, [bath], m.basis_state("up"), 6, memory_budget=10_000)


def test_input_validation():
    m, bath, Ks, etas = spin_boson_setup(4, k_max=2)
    with pytest.raises(ValidationError):
        iterative_pi(Ks, etas, [bath], m.basis_state("up"), 4, k_max=3)
    with pytest.raises(ValidationError):
        brute_force_pi(Ks, etas, [bath], m.basis_state("up"), 4)
    with pytest.raises(ValidationError):
        iterative_pi(Ks, etas, [bath, bath], m.basis_state("up"), 4)
    with pytest.raises(ValidationError):
        iterative_pi(Ks, etas, [bath], np.eye(3) / 3, 4)
    with pytest.raises(ValidationError):
        iterative_pi(Ks[:2], etas, [bath], m.basis_state("up"), 4)


def test_maps_remain_positive_with_memory():
    m, bath, Ks, etas = spin_boson_setup(10, k_max=3)
    maps = dynamical_maps(Ks, etas, [bath], 10, k_max=3)
    for E in maps.maps:
        assert np.linalg.eigvalsh(0.5 * (choi_matrix(E) + choi_matrix(E).conj().T))[0] >= -1e-3
