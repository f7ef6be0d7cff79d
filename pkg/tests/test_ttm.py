import numpy as np
import pytest
from scipy.linalg import expm

from oracles import dense_lindblad_trajectory
from pild import BathSpec, SpectralDensity, ValidationError, eta_table
from pild.liouville import Generator, JumpOperator, build_L0, build_lindbladian
from pild.models import build_dimer, build_spin_boson
from pild.path_integral import dynamical_maps, iterative_pi
from pild.propagator import propagator_series
from pild.ttm import (TransferTensorSet, extract_transfer_tensors, load_transfer_tensors, memory_kernel_view,
                      propagate_ttm_lindblad, reconstruct_maps, save_transfer_tensors)


def bath_maps(n=12, k_max=3, dt=0.1, xi=0.16):
    m = build_spin_boson()
    bath = BathSpec(SpectralDensity(xi, 7.5), 1.0, m.couplings["sigma_z"])
    Ks = propagator_series(Generator(m.hamiltonian), dt, n)
    return m, dynamical_maps(Ks, [eta_table(bath, dt, k_max)], [bath], n, k_max)


def test_markovian_input(rng):
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    M = expm(0.1 * (A - A.conj().T))
    maps = np.array([np.linalg.matrix_power(M, n) for n in range(1, 9)])
    tt = extract_transfer_tensors(maps, dt=0.1)
    assert np.max(np.abs(tt.tensors[0] - M)) <= 1e-12
    assert np.max(tt.norms()[1:]) <= 1e-12


def test_reconstruction_of_path_integral_maps():
    _, maps = bath_maps()
    tt = extract_transfer_tensors(maps)
    assert tt.dt == maps.dt
    assert np.max(np.abs(reconstruct_maps(tt, len(maps)) - maps.maps)) <= 1e-10


def test_tensors_decay_beyond_memory():
    _, maps = bath_maps(n=14, k_max=2)
    norms = extract_transfer_tensors(maps).norms()
    assert norms[-1] < 1e-2 * norms[1]


def test_zero_coupling_gives_single_tensor():
    _, maps = bath_maps(n=6, xi=0.0)
    tt = extract_transfer_tensors(maps, tail_threshold=1e-12)
    assert len(tt) == 1


def test_plain_propagation_reproduces_maps():
    _, maps = bath_maps()
    tt = extract_transfer_tensors(maps, L_mem=6)
    rho0 = np.array([[0.7, 0.1j], [-0.1j, 0.3]])
    d = 2
    out = propagate_ttm_lindblad(tt, np.zeros((4, 4)), rho0, 6)
    assert np.max(np.abs(out - maps.apply(rho0)[:7])) <= 1e-12
    assert np.array_equal(out, propagate_ttm_lindblad(tt, None, rho0, 6))
    assert out.shape == (7, d, d)


def test_strang_splitting_is_second_order():
    # without a bath the split scheme approximates the joint Lindblad flow
    m = build_spin_boson(eps=0.3)
    jumps = [JumpOperator(m.jumps["lower"], 0.5)]
    L = build_lindbladian(jumps)
    H = m.hamiltonian.static
    rho0 = m.basis_state("up")
    errs = []
    for dt, n in ((0.1, 20), (0.05, 40)):
        tt = TransferTensorSet(dt, expm(-1j * dt * build_L0(H))[None])
        split = propagate_ttm_lindblad(tt, L, rho0, n)
        exact = dense_lindblad_trajectory(H, [(jumps[0].matrix, 0.5)], rho0, dt, n)
        errs.append(np.max(np.abs(split[-1] - exact[-1])))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_memory_kernel_view_markovian_limit():
    m = build_spin_boson(eps=0.2)
    L0 = build_L0(m.hamiltonian.static)
    dt = 1e-3
    tt = TransferTensorSet(dt, expm(-1j * dt * L0)[None])
    kern = memory_kernel_view(tt, L0)
    assert np.max(np.abs(kern[0] + 0.5 * L0 @ L0)) <= 1e-2
    with pytest.raises(ValidationError):
        memory_kernel_view(tt, np.eye(9))


def test_archive_roundtrip(tmp_path):
    _, maps = bath_maps(n=5)
    tt = extract_transfer_tensors(maps)
    path = save_transfer_tensors(tmp_path / "tt.npz", tt, {"note": "spin-boson"})
    back = load_transfer_tensors(path)
    assert np.array_equal(back.tensors, tt.tensors) and back.dt == tt.dt
    assert back.metadata["note"] == "spin-boson"
    np.savez(tmp_path / "other.npz", tensors=tt.tensors, dt=0.1, metadata=np.array("{}"))
    with pytest.raises(ValidationError):
        load_transfer_tensors(tmp_path / "other.npz")


def test_validation():
    _, maps = bath_maps(n=4)
    with pytest.raises(ValidationError):
        extract_transfer_tensors(maps, L_mem=5)
    tt = extract_transfer_tensors(maps)
    with pytest.raises(ValidationError):
        propagate_ttm_lindblad(tt, None, np.eye(3) / 3, 3)
    with pytest.raises(ValidationError):
        propagate_ttm_lindblad(tt, np.zeros((9, 9)), np.eye(2) / 2, 3)


def test_split_gap_shrinks_when_memory_is_short():
    # with a bath whose memory fits in one step, the remaining gap to direct
    # propagation is the splitting error and falls off as dt**2
    m = build_dimer()
    baths = [BathSpec(SpectralDensity(0.16, 100.0), 0.05, m.couplings[k]) for k in ("monomer1", "monomer2")]
    jumps = [JumpOperator(m.jumps["pump"]), JumpOperator(m.jumps["drain"])]
    rho0 = m.basis_state("gg")
    gaps = []
    for dt in (0.1, 0.05):
        n = int(round(0.5 / dt))
        etas = [eta_table(b, dt, 1) for b in baths]
        maps = dynamical_maps(propagator_series(Generator(m.hamiltonian), dt, n), etas, baths, n, 1)
        split = propagate_ttm_lindblad(extract_transfer_tensors(maps), build_lindbladian(jumps), rho0, n)
        Ks = propagator_series(Generator(m.hamiltonian, jumps), dt, n)
        direct = iterative_pi(Ks, etas, baths, rho0, n, 1)
        gaps.append(np.max(np.abs(np.diagonal(split - direct, axis1=1, axis2=2))))
    assert gaps[0] / gaps[1] > 3.0, gaps
