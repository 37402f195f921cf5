"""Spin-chain Hamiltonians and the excitation-number block structure.

Basis convention used throughout the package: the computational basis of N
spins-1/2 with site 1 as the most significant bit. Within a single site the
matrix index 0 is spin-up (label |1>, S^Z = +1/2) and index 1 is spin-down
(label |0>, S^Z = -1/2). Hence the basis label |b_1 ... b_N> sits at matrix
index sum_i (1 - b_i) 2^(N - i), and for N = 2 the ordering is
|11>, |10>, |01>, |00>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DENSE_MAX_SITES",
    "SizeError",
    "ChainSpec",
    "NoSymPairSpec",
    "Hamiltonian",
    "MagnetizationBlocks",
    "SX",
    "SY",
    "SZ",
    "build_hamiltonian",
    "build_nosym_hamiltonian",
    "bond_hamiltonian",
    "site_hamiltonian",
    "magnetization_operator",
    "excitation_blocks",
    "up_counts",
    "local_gibbs",
    "gibbs_populations",
    "random_chain_spec",
]

DENSE_MAX_SITES = 12

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2


class SizeError(ValueError):
    """Raised when a dense object would exceed the supported size."""


def _vector(x, n, name):
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = np.full(n, float(a))
    a = np.array(a, dtype=float).reshape(-1)
    if a.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """Parameters of a magnetization-preserving open chain.

    H = sum_i E_i S^Z_i
        + sum_i 4 J_i (S^X_i S^X_{i+1} + S^Y_i S^Y_{i+1})
        + sum_i 4 K_i (S^X_i S^Y_{i+1} - S^Y_i S^X_{i+1})
        + sum_i 4 F_i S^Z_i S^Z_{i+1}

    Scalars are broadcast to the right length.
    """

    N: int
    E: np.ndarray
    J: np.ndarray
    K: np.ndarray = 0.0
    F: np.ndarray = 0.0

    def __post_init__(self):
        N = int(self.N)
        if N < 2:
            raise ValueError("a chain needs N >= 2 sites")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "E", _vector(self.E, N, "E"))
        for name in ("J", "K", "F"):
            object.__setattr__(self, name, _vector(getattr(self, name), N - 1, name))

    def __eq__(self, other):
        if not isinstance(other, ChainSpec):
            return NotImplemented
        return self.N == other.N and all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in "EJKF"
        )

    def __hash__(self):
        return hash((self.N,) + tuple(tuple(getattr(self, k)) for k in "EJKF"))

    @property
    def E1(self) -> float:
        return float(self.E[0])

    @property
    def EN(self) -> float:
        return float(self.E[-1])

    def replace(self, **kw) -> "ChainSpec":
        d = self.to_dict()
        d.update(kw)
        return ChainSpec(**d)

    def to_dict(self) -> dict:
        return {"N": self.N, **{k: getattr(self, k).tolist() for k in "EJKF"}}

    @classmethod
    def from_dict(cls, d: dict) -> "ChainSpec":
        return cls(N=d["N"], E=d["E"], J=d.get("J", 0.0), K=d.get("K", 0.0), F=d.get("F", 0.0))


@dataclass(frozen=True)
class NoSymPairSpec:
    """Two-site model with counter-rotating couplings.

    H = E1 S^Z_1 + E2 S^Z_2 + 4 J_R (XX + YY) + 4 J_I (XY - YX)
        + 4 K_R (XX - YY) - 4 K_I (XY + YX) + F S^Z_1 S^Z_2

    with XY standing for S^X_1 S^Y_2 and so on. Note the Ising term has no
    factor 4 here, unlike :class:`ChainSpec`.
    """

    E1: float
    E2: float
    J_R: float = 0.0
    J_I: float = 0.0
    K_R: float = 0.0
    K_I: float = 0.0
    F: float = 0.0

    def __post_init__(self):
        for k, v in self.to_dict().items():
            v = float(v)
            if not np.isfinite(v):
                raise ValueError(f"{k} must be finite")
            object.__setattr__(self, k, v)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("E1", "E2", "J_R", "J_I", "K_R", "K_I", "F")}

    @classmethod
    def from_dict(cls, d: dict) -> "NoSymPairSpec":
        return cls(**d)

    def replace(self, **kw) -> "NoSymPairSpec":
        d = self.to_dict()
        d.update(kw)
        return NoSymPairSpec(**d)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Dense Hermitian matrix over ``site_count`` spins."""

    matrix: np.ndarray
    site_count: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_hermitian(self) -> bool:
        return np.abs(self.matrix - self.matrix.conj().T).max() <= 1e-12


@dataclass(frozen=True)
class MagnetizationBlocks:
    """Subsystem basis indices grouped by the number of up spins.

    ``blocks[n]`` holds the indices (in the 2^|sites| subsystem space) with
    exactly n spins up.
    """

    sites: tuple
    blocks: tuple = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 ** len(self.sites)

    def labels(self) -> np.ndarray:
        """Excitation number of every subsystem basis index."""
        return up_counts(len(self.sites))


def up_counts(n_sites: int) -> np.ndarray:
    """Number of up spins for every basis index of ``n_sites`` spins."""
    idx = np.arange(2 ** n_sites)
    down = np.zeros_like(idx)
    for k in range(n_sites):
        down += (idx >> k) & 1
    return n_sites - down


def _spins(N: int) -> np.ndarray:
    """s[k, i] = S^Z eigenvalue of site i+1 in basis state k."""
    idx = np.arange(2 ** N)[:, None]
    shift = N - 1 - np.arange(N)[None, :]
    return 0.5 - ((idx >> shift) & 1)


def _check_size(N: int):
    if N > DENSE_MAX_SITES:
        raise SizeError(f"dense construction is capped at {DENSE_MAX_SITES} sites, got {N}")


def build_hamiltonian(spec: ChainSpec) -> Hamiltonian:
    """Dense Hamiltonian of a :class:`ChainSpec`.

    The hopping term acts on pairs of antiparallel neighbours:
    <up,down| H |down,up> = 2 (J + iK) for the bond (i, i+1).
    """
    N = spec.N
    _check_size(N)
    dim = 2 ** N
    s = _spins(N)
    diag = s @ spec.E + 4 * (s[:, :-1] * s[:, 1:]) @ spec.F
    H = np.diag(diag.astype(complex))
    idx = np.arange(dim)
    for i in range(N - 1):
        hop = 2 * (spec.J[i] + 1j * spec.K[i])
        if hop == 0:
            continue
        # site i up, site i+1 down  <->  site i down, site i+1 up
        sel = (s[:, i] > 0) & (s[:, i + 1] < 0)
        rows = idx[sel]
        mask = (1 << (N - 1 - i)) | (1 << (N - 2 - i))
        cols = rows ^ mask
        H[rows, cols] = hop
        H[cols, rows] = np.conj(hop)
    return Hamiltonian(H, N)


def _kron_site(op, i, N):
    out = np.eye(1, dtype=complex)
    for k in range(N):
        out = np.kron(out, op if k == i else np.eye(2))
    return out


def _kron_pair(a, b, i, N):
    return _kron_site(a, i, N) @ _kron_site(b, i + 1, N)


def site_hamiltonian(spec: ChainSpec, site: int) -> np.ndarray:
    """Local term E_site S^Z on the full chain (sites are 1-based)."""
    return spec.E[site - 1] * _kron_site(SZ, site - 1, spec.N)


def bond_hamiltonian(spec: ChainSpec, bond: int) -> np.ndarray:
    """Coupling between sites ``bond`` and ``bond + 1`` on the full chain."""
    N, i = spec.N, bond - 1
    if not 0 <= i < N - 1:
        raise ValueError(f"bond {bond} out of range for N={N}")
    J, K, F = spec.J[i], spec.K[i], spec.F[i]
    return (
        4 * J * (_kron_pair(SX, SX, i, N) + _kron_pair(SY, SY, i, N))
        + 4 * K * (_kron_pair(SX, SY, i, N) - _kron_pair(SY, SX, i, N))
        + 4 * F * _kron_pair(SZ, SZ, i, N)
    )


def build_nosym_hamiltonian(spec: NoSymPairSpec) -> Hamiltonian:
    """4x4 Hamiltonian of the two-site model without magnetization symmetry."""
    def p(a, b):
        return np.kron(a, b)

    one = np.eye(2)
    H = (
        spec.E1 * p(SZ, one)
        + spec.E2 * p(one, SZ)
        + 4 * spec.J_R * (p(SX, SX) + p(SY, SY))
        + 4 * spec.J_I * (p(SX, SY) - p(SY, SX))
        + 4 * spec.K_R * (p(SX, SX) - p(SY, SY))
        - 4 * spec.K_I * (p(SX, SY) + p(SY, SX))
        + spec.F * p(SZ, SZ)
    )
    return Hamiltonian(H, 2)


def _site_tuple(sites: Iterable[int], N: int) -> tuple:
    out = tuple(sorted(set(int(s) for s in sites)))
    if any(s < 1 or s > N for s in out):
        raise ValueError(f"site indices must lie in 1..{N}, got {out}")
    return out


def magnetization_operator(sites: Iterable[int], N: int) -> np.ndarray:
    """Diagonal matrix sum_{i in sites} S^Z_i on N spins."""
    sel = _site_tuple(sites, N)
    s = _spins(N)
    cols = [i - 1 for i in sel]
    return np.diag(s[:, cols].sum(axis=1).astype(complex))


def excitation_blocks(sites: Iterable[int], N: int) -> MagnetizationBlocks:
    """Group the basis of the subsystem ``sites`` by excitation number."""
    sel = _site_tuple(sites, N)
    n = up_counts(len(sel))
    blocks = tuple(np.flatnonzero(n == k) for k in range(len(sel) + 1))
    assert all(b.size == comb(len(sel), k) for k, b in enumerate(blocks))
    return MagnetizationBlocks(sel, blocks)


def gibbs_populations(E: float, beta: float) -> np.ndarray:
    """Populations (p_up, p_down) of a single spin with H = E S^Z."""
    if np.isinf(beta):
        if E > 0:
            return np.array([0.0, 1.0])
        if E < 0:
            return np.array([1.0, 0.0])
        return np.array([0.5, 0.5])
    if beta < 0:
        raise ValueError("beta must be >= 0")
    from scipy.special import expit

    up = expit(-beta * E)
    return np.array([up, expit(beta * E)])


def local_gibbs(E_site: float, beta: float):
    """Thermal state of one spin as a :class:`~spinqtm.quantumstate.DensityMatrix`.

    The returned state carries the placeholder site label 1; callers relabel
    it with :meth:`DensityMatrix.relabel`.
    """
    from .quantumstate import DensityMatrix

    return DensityMatrix(np.diag(gibbs_populations(E_site, beta)).astype(complex), (1,))


def random_chain_spec(
    rng: np.random.Generator,
    N: int,
    low: float = -2.0,
    high: float = 2.0,
    couplings: Sequence[str] = ("J", "K", "F"),
    min_hop: float = 0.1,
) -> ChainSpec:
    """Uniformly random chain; every bond keeps |J|+|K| >= ``min_hop``."""
    E = rng.uniform(low, high, N)
    vals = {k: (rng.uniform(low, high, N - 1) if k in couplings else np.zeros(N - 1)) for k in "JKF"}
    hop = np.abs(vals["J"]) + np.abs(vals["K"])
    if "J" in couplings or "K" in couplings:
        key = "J" if "J" in couplings else "K"
        small = hop < min_hop
        vals[key][small] = np.where(vals[key][small] >= 0, min_hop, -min_hop)
    return ChainSpec(N, E, vals["J"], vals["K"], vals["F"])
