import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinqtm.spinchain import (
    DENSE_MAX_SITES,
    ChainSpec,
    NoSymPairSpec,
    SizeError,
    bond_hamiltonian,
    build_hamiltonian,
    build_nosym_hamiltonian,
    excitation_blocks,
    local_gibbs,
    magnetization_operator,
    random_chain_spec,
    site_hamiltonian,
    up_counts,
)


def test_noninteracting_pair_is_diagonal():
    H = build_hamiltonian(ChainSpec(2, [1, 1], 0.0)).matrix
    assert np.allclose(H, np.diag([1, 0, 0, -1]))


def test_exchange_matrix_element():
    H = build_hamiltonian(ChainSpec(2, [0, 0], 1.0)).matrix
    expected = np.zeros((4, 4))
    expected[1, 2] = expected[2, 1] = 2
    assert np.allclose(H, expected)


def test_dm_coupling_phase():
    # <10|H|01> = 2(J + iK) with the bond convention XY - YX
    H = build_hamiltonian(ChainSpec(2, [0, 0], 0.0, 1.0)).matrix
    assert np.isclose(H[1, 2], 2j)
    assert np.isclose(H[2, 1], -2j)


def test_ising_term_has_factor_four():
    H = build_hamiltonian(ChainSpec(2, [0, 0], 0.0, 0.0, 1.0)).matrix
    assert np.allclose(np.diag(H).real, [1, -1, -1, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_commutes_with_magnetization(N, seed):
    spec = random_chain_spec(np.random.default_rng(seed), N)
    H = build_hamiltonian(spec).matrix
    S = magnetization_operator(range(1, N + 1), N)
    assert np.abs(H @ S - S @ H).max() == 0
    assert build_hamiltonian(spec).is_hermitian


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2 ** 32 - 1))
def test_matches_kron_construction(N, seed):
    spec = random_chain_spec(np.random.default_rng(seed), N)
    H = sum(site_hamiltonian(spec, i) for i in range(1, N + 1))
    H = H + sum(bond_hamiltonian(spec, b) for b in range(1, N))
    assert np.abs(build_hamiltonian(spec).matrix - H).max() < 1e-12


def test_zero_couplings_give_local_energies(rng):
    spec = ChainSpec(4, rng.uniform(-2, 2, 4), 0.0)
    H = build_hamiltonian(spec).matrix
    bits = (np.arange(16)[:, None] >> np.arange(3, -1, -1)) & 1
    diag = ((0.5 - bits) * spec.E).sum(1)
    assert np.allclose(H, np.diag(diag))


def test_nosym_reduces_to_chain():
    a = NoSymPairSpec(0.7, -0.3, J_R=0.4, J_I=0.9, F=0.8)
    b = ChainSpec(2, [0.7, -0.3], 0.4, 0.9, 0.2)  # F enters without the factor 4
    assert np.allclose(build_nosym_hamiltonian(a).matrix, build_hamiltonian(b).matrix)


def test_counter_rotating_term_couples_extremes():
    H = build_nosym_hamiltonian(NoSymPairSpec(0, 0, K_R=1.0)).matrix
    nz = np.argwhere(np.abs(H) > 0)
    assert {tuple(x) for x in nz} == {(0, 3), (3, 0)}
    assert np.isclose(H[0, 3], 2)


def test_nosym_breaks_magnetization():
    H = build_nosym_hamiltonian(NoSymPairSpec(1, 0.5, 0.3, 0.1, 0.4, 0.2, 0.1)).matrix
    S = magnetization_operator([1, 2], 2)
    assert np.abs(H @ S - S @ H).max() > 0.1


def test_magnetization_operator_examples():
    assert np.allclose(magnetization_operator([1], 1), np.diag([0.5, -0.5]))
    assert np.allclose(magnetization_operator([1, 2], 2), np.diag([1, 0, 0, -1]))
    assert magnetization_operator([1, 2, 3], 3)[0, 0] == 1.5
    with pytest.raises(ValueError):
        magnetization_operator([4], 3)


def test_excitation_blocks():
    assert [len(b) for b in excitation_blocks([1, 2, 3], 3).blocks] == [1, 3, 3, 1]
    assert [len(b) for b in excitation_blocks([2], 2).blocks] == [1, 1]
    blocks = excitation_blocks(range(1, 9), 8).blocks
    assert len(blocks[4]) == 70
    allidx = np.sort(np.concatenate(blocks))
    assert np.array_equal(allidx, np.arange(256))


def test_up_counts():
    assert up_counts(2).tolist() == [2, 1, 1, 0]


def test_local_gibbs():
    assert np.allclose(local_gibbs(1.0, 0.0).matrix, np.eye(2) / 2)
    assert np.allclose(local_gibbs(1.0, np.inf).matrix, np.diag([0, 1]))
    assert np.allclose(local_gibbs(-1.0, np.inf).matrix, np.diag([1, 0]))
    assert np.allclose(local_gibbs(0.0, np.inf).matrix, np.eye(2) / 2)
    assert np.allclose(np.diag(local_gibbs(1.0, np.log(3)).matrix).real, [0.25, 0.75])


def test_size_cap():
    with pytest.raises(SizeError):
        build_hamiltonian(ChainSpec(DENSE_MAX_SITES + 1, 1.0, 1.0))


def test_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        ChainSpec(1, [1.0], [])
    with pytest.raises(ValueError):
        ChainSpec(3, [1, 2], 1.0)
    with pytest.raises(ValueError):
        ChainSpec(2, [1, np.nan], 1.0)
    s = ChainSpec(3, [1, 2, 3], [0.5, 0.25], 0.1, [0.0, 1.0])
    assert ChainSpec.from_dict(s.to_dict()) == s
    assert hash(ChainSpec.from_dict(s.to_dict())) == hash(s)
    n = NoSymPairSpec(1, 2, 3, 4, 5, 6, 7)
    assert NoSymPairSpec.from_dict(n.to_dict()) == n
