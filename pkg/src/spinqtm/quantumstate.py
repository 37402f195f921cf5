"""Density matrices over labeled spin sites."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .spinchain import MagnetizationBlocks, SZ, gibbs_populations

__all__ = [
    "DensityMatrix",
    "partial_trace",
    "tensor",
    "von_neumann_entropy",
    "EntropyJump",
    "entropy_jump_bounds",
    "BlockParts",
    "block_decompose",
    "off_block_norm",
    "expectation",
    "trace_distance",
    "random_density_matrix",
    "product_state",
]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A d x d state over the sorted site labels ``sites`` (d = 2^len(sites)).

    Subsystem layout follows the site order: the smallest label is the most
    significant tensor factor.
    """

    matrix: np.ndarray
    sites: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        sites = tuple(int(s) for s in self.sites)
        if list(sites) != sorted(set(sites)):
            raise ValueError(f"sites must be strictly increasing, got {sites}")
        d = 2 ** len(sites)
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match {len(sites)} sites")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "sites", sites)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def relabel(self, sites: Iterable[int]) -> "DensityMatrix":
        return DensityMatrix(self.matrix, tuple(sites))

    def violations(self) -> dict:
        """Hermiticity, trace and positivity defects."""
        m = self.matrix
        herm = float(np.abs(m - m.conj().T).max()) if m.size else 0.0
        ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
        return {
            "hermiticity": herm,
            "trace": float(abs(np.trace(m) - 1)),
            "min_eigenvalue": float(ev.min()),
        }

    def is_valid(self, herm_tol=1e-12, trace_tol=1e-12, psd_tol=1e-10) -> bool:
        v = self.violations()
        return v["hermiticity"] <= herm_tol and v["trace"] <= trace_tol and v["min_eigenvalue"] >= -psd_tol


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the sites in ``keep``."""
    keep = tuple(sorted(set(int(s) for s in keep)))
    missing = set(keep) - set(rho.sites)
    if missing:
        raise ValueError(f"sites {sorted(missing)} are not part of the state")
    n = len(rho.sites)
    kpos = [rho.sites.index(s) for s in keep]
    rpos = [i for i in range(n) if i not in kpos]
    dk, dr = 2 ** len(kpos), 2 ** len(rpos)
    t = rho.matrix.reshape([2] * (2 * n))
    t = t.transpose(kpos + rpos + [n + i for i in kpos] + [n + i for i in rpos])
    t = t.reshape(dk, dr, dk, dr)
    return DensityMatrix(np.einsum("ajbj->ab", t), keep)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Product state a (x) b with tensor factors sorted by site label."""
    if set(a.sites) & set(b.sites):
        raise ValueError(f"overlapping sites {sorted(set(a.sites) & set(b.sites))}")
    sites = a.sites + b.sites
    m = np.kron(a.matrix, b.matrix)
    order = sorted(range(len(sites)), key=lambda i: sites[i])
    if order != list(range(len(sites))):
        n = len(sites)
        m = m.reshape([2] * (2 * n)).transpose(order + [n + i for i in order]).reshape(m.shape)
    return DensityMatrix(m, tuple(sorted(sites)))


def product_state(*states: DensityMatrix) -> DensityMatrix:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def _entropy_of(m: np.ndarray) -> float:
    ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if ev.min(initial=0.0) < -1e-10:
        raise ValueError(f"state has eigenvalue {ev.min():.3e} below the clamping window")
    ev = ev[ev > 0]
    return float(-(ev * np.log(ev)).sum())


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-Tr rho ln rho in nats; eigenvalues in [-1e-10, 0] are treated as 0."""
    return _entropy_of(rho.matrix)


class EntropyJump(NamedTuple):
    deltaS_T: float
    subadditivity_bound: float
    heat_bound: float
    ok: bool


def entropy_jump_bounds(rho_before: DensityMatrix, site: int, beta: float, H_local_energy: float) -> EntropyJump:
    """Entropy change of the chain when ``site`` is reset to its Gibbs state.

    Checks deltaS_T >= S(gibbs) - S(rho_site) >= -beta Q, where
    Q = Tr[H_site (rho_site - gibbs)] is the heat released to the bath.
    """
    rest = tuple(s for s in rho_before.sites if s != site)
    g = DensityMatrix(np.diag(gibbs_populations(H_local_energy, beta)).astype(complex), (site,))
    local = partial_trace(rho_before, (site,))
    after = tensor(g, partial_trace(rho_before, rest)) if rest else g
    dS = von_neumann_entropy(after) - von_neumann_entropy(rho_before)
    sub = von_neumann_entropy(g) - von_neumann_entropy(local)
    Q = H_local_energy * (expectation(local, SZ) - expectation(g, SZ))
    if np.isinf(beta):
        heat = -np.inf if Q >= 0 else np.inf
    else:
        heat = -beta * Q
    ok = bool(dS >= sub - 1e-10 and sub >= heat - 1e-10)
    return EntropyJump(dS, sub, heat, ok)


class BlockParts(NamedTuple):
    bd: np.ndarray
    off: np.ndarray


def block_decompose(rho: DensityMatrix, blocks: MagnetizationBlocks) -> BlockParts:
    """Split rho into its excitation-number block-diagonal part and the rest."""
    if tuple(blocks.sites) != rho.sites:
        raise ValueError(f"blocks are over {blocks.sites}, state over {rho.sites}")
    n = blocks.labels()
    mask = n[:, None] == n[None, :]
    bd = np.where(mask, rho.matrix, 0)
    return BlockParts(bd, rho.matrix - bd)


def off_block_norm(matrix: np.ndarray, n_sites: int) -> float:
    """Max-norm of the entries connecting different excitation numbers."""
    from .spinchain import up_counts

    n = up_counts(n_sites)
    return float(np.abs(np.where(n[:, None] != n[None, :], matrix, 0)).max(initial=0.0))


def expectation(rho: DensityMatrix, obs: np.ndarray) -> float:
    """Tr[obs rho]; raises if the imaginary part exceeds 1e-10."""
    obs = np.asarray(obs)
    if obs.shape != rho.matrix.shape:
        raise ValueError(f"observable shape {obs.shape} does not match state {rho.matrix.shape}")
    val = np.einsum("ij,ji->", obs, rho.matrix)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def trace_distance(a, b) -> float:
    """Trace norm ||a - b||_1 (no factor 1/2)."""
    ma = a.matrix if isinstance(a, DensityMatrix) else np.asarray(a)
    mb = b.matrix if isinstance(b, DensityMatrix) else np.asarray(b)
    d = ma - mb
    return float(np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2)).sum())


def random_density_matrix(rng: np.random.Generator, sites: Iterable[int], rank: int | None = None) -> DensityMatrix:
    """Random state from a Ginibre matrix of the given rank (full rank by default)."""
    sites = tuple(sorted(sites))
    d = 2 ** len(sites)
    k = d if rank is None else rank
    G = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = G @ G.conj().T
    return DensityMatrix(m / np.trace(m).real, sites)
