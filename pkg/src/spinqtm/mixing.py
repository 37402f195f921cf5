"""Mixing diagnostics for the cycle channels.

The finite-temperature channel is a convex mixture of sub-channels in which
the baths hand over fixed basis states; the one with both bath spins in their
ground state is the zero-temperature channel. That channel pumps excitations
out of the chain and, unless some eigenvector of H never touches the two end
sites, converges to the all-down state.

Throughout, "excitation" means a spin up and the end-site energies are taken
positive, so the bath ground state is spin down (local index 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cycle import (
    FOUR_STROKE,
    ChannelHandle,
    CycleConfig,
    _apply_kraus,
    _kraus_stack,
    apply_channel,
    make_channel,
    _model,
)
from .quantumstate import DensityMatrix
from .spinchain import ChainSpec, Hamiltonian, up_counts

__all__ = [
    "MONOTONE_SLACK",
    "PURITY_TOL",
    "MonotonicityError",
    "SubChannel",
    "SurvivalProfile",
    "FactorizationReport",
    "convex_decomposition",
    "recombine",
    "zero_temperature_channel",
    "factorized_eigenvector_test",
    "survival_profile",
    "contraction_norm",
]

MONOTONE_SLACK = 1e-12
PURITY_TOL = 1e-10


class MonotonicityError(ArithmeticError):
    """Survival probabilities increased beyond the numerical slack."""


@dataclass(frozen=True, eq=False)
class SubChannel:
    """The channel with bath A fed |i> and bath B fed |j'> (0 = up, 1 = down)."""

    i: int
    jp: int
    sites: tuple
    kraus: np.ndarray

    def __call__(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.sites != self.sites:
            raise ValueError(f"state lives on {rho.sites}, sub-channel acts on {self.sites}")
        return DensityMatrix(_apply_kraus(self.kraus, rho.matrix), self.sites)


def convex_decomposition(handle: ChannelHandle) -> list:
    """[(weight, SubChannel)] with weights p_A(i) p_B(j') summing to 1.

    Terms with zero weight are kept so the list always has four entries.
    """
    if not handle.finite_temperature:
        raise ValueError("the convex decomposition needs finite beta")
    out = []
    for i in range(2):
        for jp in range(2):
            eA, eB = np.eye(2)[i], np.eye(2)[jp]
            R = _kraus_stack(handle, eA, eB)
            out.append((float(handle.pA[i] * handle.pB[jp]), SubChannel(i, jp, handle.sites, R)))
    return out


def recombine(terms: list, rho: DensityMatrix) -> DensityMatrix:
    """Sum_k w_k Phi_k(rho)."""
    m = sum(w * sub(rho).matrix for w, sub in terms)
    return DensityMatrix(m, rho.sites)


def zero_temperature_channel(spec: ChainSpec, config: CycleConfig, target: str | None = None) -> ChannelHandle:
    """The channel with both baths at zero temperature (ground state fed in every cycle)."""
    return make_channel(spec, config.replace(beta1=np.inf, beta2=np.inf), target)


class FactorizationReport(NamedTuple):
    found: bool
    witnesses: np.ndarray  # columns: eigenvectors of the form |0>_A |phi>_C |0>_B
    energies: np.ndarray
    max_overlap: float  # largest squared overlap of an eigenspace with the factorized subspace


def factorized_eigenvector_test(H: Hamiltonian, tol: float = PURITY_TOL, degeneracy_tol: float = 1e-9) -> FactorizationReport:
    """Search for eigenvectors |0>_A |phi>_C |0>_B other than the all-down state.

    Each (numerically) degenerate eigenspace V is intersected with the
    subspace F of states with both end spins down and orthogonal to the
    all-down vector: the singular values of P_F V equal to 1 within ``tol``
    mark directions of V lying in F, so the answer does not depend on how the
    eigensolver mixes degenerate vectors.
    """
    N = H.site_count
    if N < 3:
        return FactorizationReport(False, np.zeros((2 ** N, 0), complex), np.zeros(0), 0.0)
    dim = 2 ** N
    idx = np.arange(dim)
    ends_down = ((idx >> (N - 1)) & 1 == 1) & (idx & 1 == 1)
    ends_down[dim - 1] = False  # drop the all-down vector
    w, V = np.linalg.eigh(H.matrix)
    groups = np.split(np.arange(dim), np.flatnonzero(np.diff(w) > degeneracy_tol) + 1)
    witnesses, energies = [], []
    best = 0.0
    for g in groups:
        B = V[:, g]
        s_vecs, s, _ = np.linalg.svd(B[ends_down], full_matrices=False)
        best = max(best, float(s[0] ** 2)) if s.size else best
        for k in np.flatnonzero(s ** 2 > 1 - tol):
            v = np.zeros(dim, complex)
            v[ends_down] = s_vecs[:, k]
            witnesses.append(v)
            energies.append(float(w[g].mean()))
    W = np.array(witnesses).T if witnesses else np.zeros((dim, 0), complex)
    return FactorizationReport(bool(witnesses), W, np.array(energies), best)


@dataclass(frozen=True)
class SurvivalProfile:
    """P[n, m]: probability of at least n excitations after m zero-temperature cycles."""

    P: np.ndarray
    sites: tuple

    @property
    def m_max(self) -> int:
        return self.P.shape[1] - 1

    def monotonicity_defect(self) -> tuple:
        """(worst increase along n, worst increase along m for n >= 1)."""
        dn = np.diff(self.P, axis=0).max(initial=0.0)
        dm = np.diff(self.P[1:], axis=1).max(initial=0.0)
        return float(dn), float(dm)


def _require_positive_ends(spec):
    m = _model(spec)
    if not m.preserves_magnetization:
        raise ValueError("excitation counting needs a magnetization-preserving chain")
    if m.E1 <= 0 or m.EN <= 0:
        raise ValueError("zero-temperature diagnostics assume E1 > 0 and EN > 0 (bath ground state down)")


def survival_profile(spec: ChainSpec, config: CycleConfig, rho0: DensityMatrix, m_max: int,
                     slack: float = MONOTONE_SLACK) -> SurvivalProfile:
    """Iterate the zero-temperature channel and record P_n^(m) for n = 0..|sites|.

    Only the block-diagonal part of rho0 matters for the populations, so the
    coherences between excitation numbers are dropped first. Raises
    :class:`MonotonicityError` if P grows along either index by more than
    ``slack``.
    """
    _require_positive_ends(spec)
    handle = zero_temperature_channel(spec, config)
    if rho0.sites != handle.sites:
        raise ValueError(f"rho0 must live on {handle.sites}")
    n_sites = len(handle.sites)
    labels = up_counts(n_sites)
    bd = np.where(labels[:, None] == labels[None, :], rho0.matrix, 0)
    rho = DensityMatrix(bd, rho0.sites)
    P = np.zeros((n_sites + 1, m_max + 1))
    for m in range(m_max + 1):
        if m:
            rho = apply_channel(handle, rho)
        q = np.bincount(labels, weights=np.diag(rho.matrix).real, minlength=n_sites + 1)
        P[:, m] = np.cumsum(q[::-1])[::-1]
    P[0] = 1.0
    prof = SurvivalProfile(P, handle.sites)
    dn, dm = prof.monotonicity_defect()
    if max(dn, dm) > slack:
        raise MonotonicityError(f"survival probabilities increase by {max(dn, dm):.3e} (slack {slack:.1e})")
    return prof


def _block_indices(N: int, n: int) -> np.ndarray:
    return np.flatnonzero(up_counts(N) == n)


def contraction_norm(spec: ChainSpec, config: CycleConfig, n: int, delta_m: int) -> float:
    """Largest squared singular value of (P2 P1)^delta_m on the n-excitation block.

    P1 = |0><0|_B U(tau1) and P2 = |0><0|_A U(tau2), acting on states with
    spin A down. This bounds the population that can stay in the n-excitation
    block over delta_m zero-temperature cycles.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta_m < 0:
        raise ValueError("delta_m must be >= 0")
    _require_positive_ends(spec)
    handle = make_channel(spec, config, "CB" if config.mode == FOUR_STROKE else "C")
    N = handle.N
    idx = _block_indices(N, n)
    first = (idx >> (N - 1)) & 1 == 1  # spin A down
    last = idx & 1 == 1  # spin B down
    if delta_m == 0:
        return 1.0
    U1 = handle.U1[np.ix_(idx, idx)]
    U2 = handle.U2[np.ix_(idx, idx)]
    P1 = last[:, None] * U1
    P2 = first[:, None] * U2
    step = P2 @ P1
    M = np.linalg.matrix_power(step, delta_m)[:, first]
    if M.size == 0:
        return 0.0
    # rounding in the matrix power can push a true 1 slightly above it
    return min(1.0, float(np.linalg.norm(M, 2) ** 2))
