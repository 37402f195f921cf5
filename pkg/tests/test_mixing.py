import numpy as np
import pytest

from spinqtm.cycle import TWO_STROKE, CycleConfig, apply_channel, fixed_point, make_channel, spectral_gap
from spinqtm.harness.acceptance import mixing_specs
from spinqtm.mixing import (
    MonotonicityError,
    contraction_norm,
    convex_decomposition,
    factorized_eigenvector_test,
    recombine,
    survival_profile,
    zero_temperature_channel,
)
from spinqtm.quantumstate import DensityMatrix, random_density_matrix, trace_distance
from spinqtm.spinchain import ChainSpec, build_hamiltonian, random_chain_spec

CFG = CycleConfig(0.7, 1.9, 1.3, 0.7)


def _vacuum(n_sites):
    m = np.zeros((2 ** n_sites,) * 2, complex)
    m[-1, -1] = 1
    return m


def _top(n_sites):
    m = np.zeros((2 ** n_sites,) * 2, complex)
    m[0, 0] = 1
    return m


def test_convex_decomposition_recombines(rng):
    spec = random_chain_spec(rng, 4, low=0.3)
    h = make_channel(spec, CFG)
    terms = convex_decomposition(h)
    assert len(terms) == 4
    w = np.array([t[0] for t in terms])
    assert abs(w.sum() - 1) < 1e-14 and np.all(w >= 0)
    rho = random_density_matrix(rng, h.sites)
    assert trace_distance(recombine(terms, rho), apply_channel(h, rho)) < 1e-12
    # each sub-channel is trace preserving
    for _, sub in terms:
        assert abs(np.trace(sub(rho).matrix) - 1) < 1e-12


def test_ground_state_term_dominates(rng):
    spec = random_chain_spec(rng, 3, low=0.3)
    terms = convex_decomposition(make_channel(spec, CFG))
    weights = {(s.i, s.jp): w for w, s in terms}
    assert max(weights, key=weights.get) == (1, 1)


def test_zero_temperature_needs_finite_beta_for_decomposition():
    h = zero_temperature_channel(ChainSpec(3, 1.0, 1.0), CFG)
    with pytest.raises(ValueError):
        convex_decomposition(h)


def test_zero_temperature_fixed_point_is_vacuum():
    connected, _ = mixing_specs()
    for spec in connected:
        h = zero_temperature_channel(spec, CFG)
        fp, _ = fixed_point(h)
        assert np.abs(fp.matrix - _vacuum(len(h.sites))).max() < 1e-9
        assert spectral_gap(h) > 1e-3


def test_factorized_eigenvectors():
    connected, disconnected = mixing_specs()
    for spec in connected:
        assert not factorized_eigenvector_test(build_hamiltonian(spec)).found
    for spec in disconnected:
        rep = factorized_eigenvector_test(build_hamiltonian(spec))
        assert rep.found
        H = build_hamiltonian(spec).matrix
        for v, e in zip(rep.witnesses.T, rep.energies):
            assert np.abs(H @ v - e * v).max() < 1e-9


def test_single_interior_cut_still_mixing():
    # cutting one bond leaves every segment attached to a bath
    spec = ChainSpec(4, [1.0, 1.3, 0.8, 1.5], [1.0, 0.0, 0.7])
    assert not factorized_eigenvector_test(build_hamiltonian(spec)).found
    assert spectral_gap(zero_temperature_channel(spec, CFG)) > 1e-3


def test_disconnected_chain_has_no_gap():
    _, disconnected = mixing_specs()
    for spec in disconnected:
        assert spectral_gap(zero_temperature_channel(spec, CFG)) < 1e-9


def test_survival_profile_monotone():
    connected, _ = mixing_specs()
    spec = connected[1]
    prof = survival_profile(spec, CFG, DensityMatrix(_top(spec.N - 1), (2, 3, 4)), 200)
    assert prof.P.shape == (spec.N, 201)
    assert np.all(prof.P[0] == 1)
    dn, dm = prof.monotonicity_defect()
    assert dn <= 1e-12 and dm <= 1e-12
    assert prof.P[1, -1] < 1e-3


def test_survival_profile_trapped_excitation():
    _, disconnected = mixing_specs()
    spec = disconnected[0]
    prof = survival_profile(spec, CFG, DensityMatrix(_top(spec.N - 1), (2, 3, 4)), 100)
    assert prof.P[1, -1] > 0.1


def test_survival_rejects_bad_input():
    spec = ChainSpec(3, [-1.0, 1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        survival_profile(spec, CFG, DensityMatrix(_top(2), (2, 3)), 5)
    spec = ChainSpec(3, 1.0, 1.0)
    with pytest.raises(ValueError):
        survival_profile(spec, CFG, DensityMatrix(_top(3), (1, 2, 3)), 5)
    assert issubclass(MonotonicityError, ArithmeticError)


def test_contraction_norm():
    connected, disconnected = mixing_specs()
    for spec in connected:
        q = [contraction_norm(spec, CFG, 1, d) for d in (0, 1, 4, 16, 64, 256)]
        assert q[0] == 1.0
        assert all(b <= a + 1e-10 for a, b in zip(q, q[1:]))
        assert q[-1] < 1e-3
    spec = disconnected[0]
    assert contraction_norm(spec, CFG, 1, 256) > 0.99
    with pytest.raises(ValueError):
        contraction_norm(spec, CFG, 0, 1)
    with pytest.raises(ValueError):
        contraction_norm(spec, CFG, 1, -1)


def test_finite_temperature_gap_two_stroke(rng):
    spec = random_chain_spec(rng, 4, low=0.3)
    cfg = CycleConfig(0.5, 1.5, 1.1, 0.0, TWO_STROKE)
    assert spectral_gap(make_channel(spec, cfg)) > 1e-4
