import numpy as np
import pytest

from spinqtm.closedform import n2_f4
from spinqtm.cycle import TWO_STROKE, CycleConfig, _model, _propagator, assemble_limit_cycle
from spinqtm.lowtemp import (
    LowTempParams,
    chi_coefficients,
    conservation_defect,
    delta_rho_star,
    f2_lowtemp,
    lowtemp_thermo,
    one_excitation_hamiltonian,
    one_excitation_unitary,
    zero_temp_channel_1ex,
)
from spinqtm.spinchain import ChainSpec, random_chain_spec
from spinqtm.thermo import limit_cycle_thermo


def _one_ex_indices(N):
    # site k up, all others down (down is bit value 1, site 1 most significant)
    return [(2 ** N - 1) - 2 ** (N - k) for k in range(1, N + 1)]


def test_sector_matches_full_propagator(rng):
    for N in (2, 3, 4):
        spec = random_chain_spec(rng, N)
        tau = rng.uniform(0.1, 3)
        U = _propagator(_model(spec), tau)
        sec = one_excitation_unitary(spec, tau)
        idx = _one_ex_indices(N)
        assert np.abs(U[np.ix_(idx, idx)] - sec.U1).max() < 1e-12
        assert abs(U[-1, -1] - sec.vacuum_phase) < 1e-12


def test_one_excitation_hamiltonian_hermitian(rng):
    h, _ = one_excitation_hamiltonian(random_chain_spec(rng, 6))
    assert np.allclose(h, h.conj().T)


def test_sector_unitary(rng):
    sec = one_excitation_unitary(random_chain_spec(rng, 9), 2.3)
    assert np.allclose(sec.U1 @ sec.U1.conj().T, np.eye(9), atol=1e-12)
    assert abs(abs(sec.vacuum_phase) - 1) < 1e-14


def test_no_hopping_gives_diagonal_block():
    spec = ChainSpec(5, [1.0, 0.5, 0.2, 0.9, 1.3], 0.0, 0.0, 0.4)
    U1 = one_excitation_unitary(spec, 1.7).U1
    assert np.abs(U1 - np.diag(np.diag(U1))).max() < 1e-15


def test_sector_channel_fixes_vacuum_and_trace(rng):
    spec = random_chain_spec(rng, 6)
    ch = zero_temp_channel_1ex(spec, 0.9)
    vac = np.zeros((5, 5), complex)
    vac[0, 0] = 1
    assert np.allclose(ch(vac), vac, atol=1e-15)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    m = m @ m.conj().T
    m /= np.trace(m)
    assert abs(np.trace(ch(m)) - 1) < 1e-13


def test_delta_rho_properties(rng):
    spec = random_chain_spec(rng, 7)
    for j in (1, 2):
        c = delta_rho_star(spec, 1.2, j)
        assert abs(np.trace(c.delta_rho)) < 1e-12
        assert c.gamma >= 0
        assert np.all(c.p_l > -1e-12)
        assert np.allclose(c.delta_rho, c.delta_rho.conj().T)
        assert abs(c.p_l.sum() - 1) < 1e-12
        # solves the fixed-point equation with the injected source
        ch = zero_temp_channel_1ex(spec, 1.2)
        sec = one_excitation_unitary(spec, 1.2)
        psi = sec.U1[1:-1, 0 if j == 1 else -1]
        src = np.zeros_like(c.delta_rho)
        src[1:, 1:] = np.outer(psi, psi.conj())
        src[0, 0] = -np.vdot(psi, psi).real
        assert np.abs(c.delta_rho - ch(c.delta_rho) - src).max() < 1e-11


def test_gamma_matches_full_fixed_point():
    # gamma counts cycles spent in C and can exceed 1
    spec = ChainSpec(4, [0.62847375, 0.85521576, 1.7019117, 1.37324305],
                     [0.64119296, 1.14969041, 1.21857695], [0.73960837, 1.60186573, 0.67050803],
                     [1.08684229, 1.27511027, 1.14594203])
    gamma = delta_rho_star(spec, 1.2, 1).gamma
    assert gamma > 1
    b1, b2 = 12 / spec.E1, 40 / spec.EN
    lc = assemble_limit_cycle(spec, CycleConfig(b1, b2, 1.2, 0.0, TWO_STROKE))
    p = np.diag(lc.rho_C_star.matrix).real
    one = p[[1, 2]].sum()  # C states |01>, |10> (0 = up)
    assert abs(one / np.exp(-12) - gamma) < 1e-3 * gamma


def test_solve_and_series_agree(rng):
    spec = random_chain_spec(rng, 12)
    a = delta_rho_star(spec, 0.8, 1, method="solve")
    b = delta_rho_star(spec, 0.8, 1, method="series")
    assert np.abs(a.delta_rho - b.delta_rho).max() < 1e-10
    assert b.iterations > 0


def test_unknown_method_and_bad_j():
    spec = ChainSpec(4, 1.0, 0.5)
    with pytest.raises(ValueError):
        delta_rho_star(spec, 1.0, 3)
    with pytest.raises(ValueError):
        delta_rho_star(spec, 1.0, 1, method="magic")


def test_f2_zero_tau():
    spec = ChainSpec(6, np.linspace(1, 2, 6), 1.0)
    for method in ("solve", "spectral"):
        assert abs(f2_lowtemp(spec, 0.0, method).f2) < 1e-14


def test_f2_two_sites_matches_closed_form(rng):
    spec = random_chain_spec(rng, 2, low=0.2)
    for tau in (0.3, 1.1, 2.9):
        assert abs(f2_lowtemp(spec, tau).f2 - n2_f4(spec, tau, 0.0)) < 1e-12


def test_dense_and_spectral_agree(rng):
    spec = random_chain_spec(rng, 20, low=0.5, couplings=("J", "K", "F"))
    for tau in (0.4, 1.5, 5.0):
        a = f2_lowtemp(spec, tau, "solve")
        b = f2_lowtemp(spec, tau, "spectral")
        assert abs(a.f2 - b.f2) < 1e-10
        assert -1e-12 <= a.f2 <= 1 + 1e-12
        assert abs(b.absorbed_A + b.absorbed_B - 1) < 1e-7


def test_conservation_identity(rng):
    spec = random_chain_spec(rng, 50)
    for tau in (0.0, 0.7, 13.0):
        assert conservation_defect(spec, tau) < 1e-12


def test_chi_symmetry(rng):
    spec = random_chain_spec(rng, 5, low=0.3)
    chi = chi_coefficients(spec, 1.4)
    assert abs(chi["A1"] + chi["A2"]) < 1e-12
    assert abs(chi["B1"] + chi["B2"]) < 1e-12
    assert abs(chi["A1"] + chi["B1"]) < 1e-12


def test_params_validation():
    with pytest.raises(ValueError):
        LowTempParams(1.0, 0.1)
    with pytest.raises(ValueError):
        LowTempParams.from_betas(-1.0, 1.0, 1.0, 1.0)
    p = LowTempParams.from_betas(1.0, 2.0, 3.0, 4.0)
    assert np.allclose(p.betas(1.0, 2.0), (3.0, 4.0))


def test_equal_x_gives_zero_heats():
    spec = ChainSpec(4, [1.0, 1.2, 1.4, 1.6], 1.0)
    th = lowtemp_thermo(spec, 1.0, LowTempParams(1e-4, 1e-4))
    assert th.Q_H_star == 0 and th.Q_C_star == 0


def test_lowtemp_heats_track_full_numerics():
    spec = ChainSpec(4, [1.0, 1.3, 1.6, 2.0], 1.0, 0.3, 0.2)
    b1, b2 = 8.0, 7.0  # x1 ~ 3e-4, x2 ~ 8e-7
    cfg = CycleConfig(b1, b2, 0.9, 0.0, TWO_STROKE)
    full = limit_cycle_thermo(assemble_limit_cycle(spec, cfg))
    lt = lowtemp_thermo(spec, 0.9, LowTempParams.from_betas(spec.E1, spec.EN, b1, b2))
    x1 = np.exp(-b1 * spec.E1)
    assert abs(lt.Q_C_star - full.Q_C_star) < 10 * x1 * abs(full.Q_C_star)
    assert abs(lt.Q_H_star - full.Q_H_star) < 10 * x1 * abs(full.Q_H_star)
    assert np.sign(lt.Q_C_star) == np.sign(full.Q_C_star) == 1
