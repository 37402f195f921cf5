import numpy as np
import pytest

from spinqtm import closedform
from spinqtm.closedform import (
    COUPLING_SCALE,
    calibrate_coupling_scale,
    n2_constants,
    n2_f4,
    n2_fixed_point,
    n2_thermo,
    n3_blocks,
    n3_twostroke_f2,
    nosym_constants,
    nosym_fixed_point,
    nosym_printed_display,
    nosym_regime_scan,
    nosym_thermo,
)
from spinqtm.cycle import TWO_STROKE, CycleConfig, assemble_limit_cycle
from spinqtm.spinchain import ChainSpec, NoSymPairSpec, gibbs_populations, random_chain_spec
from spinqtm.thermo import extract_ansatz, heat_symmetry_residual, limit_cycle_thermo


def _random_pair(rng):
    return ChainSpec(2, rng.uniform(-2, 2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2))


def _random_nosym(rng, **kw):
    d = dict(zip(("E1", "E2", "J_R", "J_I", "K_R", "K_I", "F"), rng.uniform(-2, 2, 7)))
    d.update(kw)
    return NoSymPairSpec(**d)


def test_coupling_scale_frozen():
    assert COUPLING_SCALE == 4.0


def test_calibration_selects_four(rng):
    errs = calibrate_coupling_scale(rng, n=8)
    assert errs[4.0] < 1e-10
    assert errs[1.0] > 1e-3 and errs[2.0] > 1e-3
    assert closedform.COUPLING_SCALE == 4.0


def test_n2_f4_zero_durations():
    spec = ChainSpec(2, [1.0, 0.3], 0.8, 0.4)
    assert n2_f4(spec, 0.0, 0.0) == 0.0


def test_n2_f4_resonant_half_period():
    J = 0.7
    spec = ChainSpec(2, [1.0, 1.0], J)
    omega = n2_constants(spec, 0.0).omega
    assert np.isclose(omega, 2 * J)
    assert abs(n2_f4(spec, np.pi / 2 / omega, 0.0) - 1.0) < 1e-12


def test_n2_f4_stroke_symmetry(rng):
    for _ in range(10):
        spec = _random_pair(rng)
        t = rng.uniform(0, 5)
        assert abs(n2_f4(spec, t, 0.0) - n2_f4(spec, 0.0, t)) < 1e-14


def test_n2_constants_unitarity(rng):
    for _ in range(10):
        c = n2_constants(_random_pair(rng), rng.uniform(0, 5))
        assert abs(abs(c.C_H) ** 2 + abs(c.S_H) ** 2 - 1) < 1e-13


def test_n2_zero_omega_limit():
    spec = ChainSpec(2, [0.5, 0.5], 0.0, 0.0)
    c = n2_constants(spec, 1.3)
    assert c.omega == 0 and c.S_H == 0 and abs(c.C_H - 1) < 1e-15


def test_n2_fixed_point_matches_numerics(rng):
    worst = 0.0
    for _ in range(100):
        spec = _random_pair(rng)
        cfg = CycleConfig(*rng.uniform(0.1, 5, 2), *rng.uniform(0, 5, 2))
        lc = assemble_limit_cycle(spec, cfg)
        worst = max(worst, np.abs(lc.rho_CB_star.matrix - n2_fixed_point(spec, cfg).matrix).max())
    assert worst < 1e-10


def test_n2_fixed_point_trivial_and_symmetric():
    spec = ChainSpec(2, [1.0, 0.5], 0.9, 0.1)
    cfg = CycleConfig(0.5, 1.0, 0.0, 0.0)
    p = np.diag(n2_fixed_point(spec, cfg).matrix).real
    assert np.allclose(p, gibbs_populations(0.5, 1.0), atol=1e-15)
    cfg = CycleConfig(0.5, 1.0, 0.7, 1.1)  # beta1 E1 = beta2 E2
    p = np.diag(n2_fixed_point(spec, cfg).matrix).real
    assert np.allclose(p, gibbs_populations(1.0, 0.5), atol=1e-14)


def test_n2_thermo_matches_numerics(rng):
    for _ in range(20):
        spec = _random_pair(rng)
        cfg = CycleConfig(*rng.uniform(0.1, 5, 2), *rng.uniform(0, 5, 2))
        a, b = n2_thermo(spec, cfg), limit_cycle_thermo(assemble_limit_cycle(spec, cfg))
        assert abs(a.Q_H_star - b.Q_H_star) < 1e-8 and abs(a.Q_C_star - b.Q_C_star) < 1e-8


def test_n3_modulus_constraints_and_f2(rng):
    for _ in range(10):
        spec = random_chain_spec(rng, 3, couplings=("J",))
        tau = rng.uniform(0.1, 4)
        U1, U2 = n3_blocks(spec, tau)
        assert np.allclose(U1 @ U1.conj().T, np.eye(3), atol=1e-12)
        f2 = n3_twostroke_f2(spec, tau)
        assert -1e-12 <= f2 <= 1 + 1e-12
        cfg = CycleConfig(0.3, 1.2, tau, 0.0, TWO_STROKE)
        th = limit_cycle_thermo(assemble_limit_cycle(spec, cfg))
        an = extract_ansatz(th, spec.E1, spec.EN, cfg.beta1, cfg.beta2)
        assert abs(an.f4_value - f2) < 1e-8


def test_n3_zero_tau_and_preconditions():
    spec = ChainSpec(3, [1.0, 0.2, 0.7], 0.5)
    assert n3_twostroke_f2(spec, 0.0) == 0.0
    with pytest.raises(ValueError):
        n3_twostroke_f2(ChainSpec(3, 1.0, 0.5, 0.2), 1.0)
    with pytest.raises(ValueError):
        n3_blocks(ChainSpec(4, 1.0, 0.5), 1.0)


def test_nosym_constants_bounds(rng):
    for _ in range(20):
        c = nosym_constants(_random_nosym(rng), rng.uniform(0, 5))
        assert -1 <= c.S_of_tau <= 1
        assert abs(abs(c.C_J) ** 2 + abs(c.S_J) ** 2 - 1) < 1e-13
        assert abs(abs(c.C_K) ** 2 + abs(c.S_K) ** 2 - 1) < 1e-13


def test_nosym_fixed_point_and_heats_match_numerics(rng):
    worst_fp = worst_q = 0.0
    for _ in range(100):
        spec = _random_nosym(rng)
        cfg = CycleConfig(*np.sort(rng.uniform(0.1, 3, 2)), *rng.uniform(0, 4, 2))
        _, _, rep = nosym_thermo(spec, cfg)
        worst_fp = max(worst_fp, rep["fixed_point"])
        worst_q = max(worst_q, rep["Q_H"], rep["Q_C"])
        assert rep["closure"] < 1e-12
    assert worst_fp < 1e-8 and worst_q < 1e-8


def test_nosym_reduces_to_symmetric(rng):
    spec = _random_nosym(rng, K_R=0.0, K_I=0.0, F=0.0)
    cfg = CycleConfig(0.4, 1.1, 0.8, 1.7)
    th, _, _ = nosym_thermo(spec, cfg)
    assert heat_symmetry_residual(th, spec.E1, spec.E2) < 1e-12
    pair = ChainSpec(2, [spec.E1, spec.E2], spec.J_R, spec.J_I)
    ref = n2_thermo(pair, cfg)
    assert abs(th.Q_H_star - ref.Q_H_star) < 1e-12 and abs(th.Q_C_star - ref.Q_C_star) < 1e-12


def test_nosym_breaks_heat_symmetry():
    spec = NoSymPairSpec(1.0, 0.6, J_R=1.5, K_R=0.3)
    th, _, _ = nosym_thermo(spec, CycleConfig(0.3, 0.6, 1.0, 1.0))
    assert heat_symmetry_residual(th, 1.0, 0.6) > 1e-3


def test_printed_entropy_display_disagrees_with_numerics(rng):
    # the printed form weights every term by beta1; the measured Clausius sum
    # uses beta2 on the cold heat, so the two differ whenever beta1 != beta2
    spec = _random_nosym(rng)
    cfg = CycleConfig(0.4, 1.5, 1.1, 0.6)
    th, _, _ = nosym_thermo(spec, cfg)
    printed = nosym_printed_display(spec, cfg)
    assert abs(printed["dS_T"] - th.clausius_star) > 1e-3
    assert th.clausius_star > -1e-10


def test_regime_scan_fig4_bands():
    specs = [NoSymPairSpec(1.0, r, J_R=1.5, K_R=0.3) for r in np.arange(-2, 3.01, 0.25)]
    grid = np.linspace(0.1, 3, 8)
    scan = nosym_regime_scan(specs, 0.3, 0.6, grid, grid)
    assert scan.violations == []
    assert scan.observed["R-band"] <= {"R", "H"}
    assert scan.observed["A-band"] <= {"A", "H"}
