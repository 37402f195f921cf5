"""Low-temperature (single-excitation) limit of the two-stroke machine.

With x1 = exp(-beta1 E1) and x2 = exp(-beta2 EN) small, the baths inject at
most one excitation per cycle to first order, so everything reduces to the
N-dimensional one-excitation block U1 of U(tau) plus the all-down vacuum.

States of C restricted to {vacuum, one excitation in C} are stored as
(n+1) x (n+1) matrices in the basis [vac, site 2, ..., site N-1], n = N - 2.

Only the two-stroke machine is covered.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .spinchain import ChainSpec
from .thermo import CycleThermo, thermo_from_heats, zero_tolerance

__all__ = [
    "SOLVE_MAX_ENTRIES",
    "LowTempParams",
    "OneExcitationSector",
    "OneExcitationPropagator",
    "ExcitationCorrection",
    "SectorChannel",
    "one_excitation_hamiltonian",
    "one_excitation_unitary",
    "zero_temp_channel_1ex",
    "delta_rho_star",
    "f2_lowtemp",
    "F2Result",
    "f2_spectral",
    "absorption_probabilities",
    "chi_coefficients",
    "lowtemp_thermo",
    "conservation_defect",
]

SOLVE_MAX_ENTRIES = 4_000_000  # (N-2)^2 limit for the dense linear solve


@dataclass(frozen=True)
class LowTempParams:
    x1: float
    x2: float

    def __post_init__(self):
        for k in ("x1", "x2"):
            v = float(getattr(self, k))
            if not 0 <= v < 1:
                raise ValueError(f"{k} must lie in [0, 1), got {v}")
            object.__setattr__(self, k, v)

    @classmethod
    def from_betas(cls, E1: float, EN: float, beta1: float, beta2: float) -> "LowTempParams":
        if E1 <= 0 or EN <= 0:
            raise ValueError("the low-temperature expansion needs E1 > 0 and EN > 0")
        return cls(np.exp(-beta1 * E1), np.exp(-beta2 * EN))

    def betas(self, E1: float, EN: float) -> tuple:
        return (-np.log(self.x1) / E1 if self.x1 > 0 else np.inf,
                -np.log(self.x2) / EN if self.x2 > 0 else np.inf)


def one_excitation_hamiltonian(spec: ChainSpec) -> tuple:
    """(h1, vacuum energy) with h1[j, j] the energy of the state with site j+1 up.

    Off-diagonal elements: <up at j| H |up at j+1> = 2 (J_j + i K_j).
    """
    E, J, K, F = spec.E, spec.J, spec.K, spec.F
    e_vac = -E.sum() / 2 + F.sum()
    diag = e_vac + E.copy()
    diag[:-1] -= 2 * F
    diag[1:] -= 2 * F
    hop = 2 * (J + 1j * K)
    h = np.diag(diag).astype(complex)
    h[np.arange(spec.N - 1), np.arange(1, spec.N)] = hop
    h[np.arange(1, spec.N), np.arange(spec.N - 1)] = np.conj(hop)
    return h, float(e_vac)


@dataclass(frozen=True)
class OneExcitationSector:
    """U(tau) restricted to the vacuum and the N one-excitation states.

    ``U1[j, k]`` is <up at j+1| U |up at k+1>; the vacuum picks up the phase
    ``vacuum_phase``.
    """

    U1: np.ndarray
    vacuum_phase: complex

    @property
    def N(self) -> int:
        return self.U1.shape[0]


class OneExcitationPropagator:
    """One diagonalization of the one-excitation block, reused for every tau."""

    def __init__(self, spec: ChainSpec):
        self.spec = spec
        h, self.e_vac = one_excitation_hamiltonian(spec)
        self.evals, self.evecs = np.linalg.eigh(h)

    @cached_property
    def real_gauge(self) -> tuple:
        """Eigen-decomposition of the real tridiagonal matrix with |hopping|.

        Complex hoppings on an open chain are removed by site-dependent phases,
        which leave every transition probability unchanged.
        """
        h, _ = one_excitation_hamiltonian(self.spec)
        d = np.diag(h).real
        e = np.abs(np.diag(h, 1))
        return sla.eigh_tridiagonal(d, e)

    def sector(self, tau: float) -> OneExcitationSector:
        V = self.evecs
        U1 = (V * np.exp(-1j * self.evals * tau)) @ V.conj().T
        return OneExcitationSector(U1, np.exp(-1j * self.e_vac * tau))

    def first_row(self, tau: float) -> np.ndarray:
        """<up at 1| U(tau) |up at k> for all k, in O(N^2)."""
        V = self.evecs
        return (V[0] * np.exp(-1j * self.evals * tau)) @ V.conj().T


@lru_cache(maxsize=8)
def _propagator(spec: ChainSpec) -> OneExcitationPropagator:
    return OneExcitationPropagator(spec)


def one_excitation_unitary(spec: ChainSpec, tau: float) -> OneExcitationSector:
    """The one-excitation block of U(tau) and the vacuum phase."""
    return _propagator(spec).sector(tau)


class SectorChannel:
    """Zero-temperature two-stroke channel on C's {vacuum, one excitation} sector.

    Evolve with U(tau) with A and B down; whatever reaches A or B is
    absorbed by the zero-temperature baths, i.e. returned to the vacuum.
    """

    def __init__(self, sector: OneExcitationSector):
        self.sector = sector
        U1 = sector.U1
        self.K = U1[1:-1, 1:-1]  # C -> C amplitude
        self.n = U1.shape[0] - 2

    def __call__(self, m: np.ndarray) -> np.ndarray:
        n = self.n
        U1, ph = self.sector.U1, self.sector.vacuum_phase
        Ut = np.zeros((n + 3, n + 3), dtype=complex)  # [vac, A, C..., B]
        Ut[0, 0] = ph
        Ut[1:, 1:] = U1
        big = np.zeros((n + 3, n + 3), dtype=complex)
        big[0, 0] = m[0, 0]
        big[0, 2:n + 2] = m[0, 1:]
        big[2:n + 2, 0] = m[1:, 0]
        big[2:n + 2, 2:n + 2] = m[1:, 1:]
        s = Ut @ big @ Ut.conj().T
        out = np.zeros_like(m)
        out[0, 0] = s[0, 0] + s[1, 1] + s[n + 2, n + 2]
        out[0, 1:] = s[0, 2:n + 2]
        out[1:, 0] = s[2:n + 2, 0]
        out[1:, 1:] = s[2:n + 2, 2:n + 2]
        return out


def zero_temp_channel_1ex(spec: ChainSpec, tau: float) -> SectorChannel:
    return SectorChannel(one_excitation_unitary(spec, tau))


@dataclass(frozen=True)
class ExcitationCorrection:
    """First-order correction to the C fixed point, delta = gamma (varrho - |vac><vac|).

    ``delta_rho`` is (n+1) x (n+1) in the basis [vac, C sites]. gamma is the
    expected number of cycles an injected excitation spends in C, so it is
    non-negative but not bounded by 1.
    """

    delta_rho: np.ndarray
    gamma: float
    varrho: np.ndarray
    p_l: np.ndarray
    phi_l: np.ndarray
    method: str
    iterations: int


def _source(U1: np.ndarray, j: int) -> np.ndarray:
    """C amplitudes of an excitation injected at A (j=1) or B (j=2) after one stroke."""
    col = 0 if j == 1 else U1.shape[0] - 1
    return U1[1:-1, col]


def delta_rho_star(spec: ChainSpec, tau: float, j: int = 1, method: str = "auto",
                   tol: float = 1e-14, max_iter: int = 2 ** 60) -> ExcitationCorrection:
    """Solve (Id - Phi0) delta = dPhi_j(vac) on the traceless sector.

    The source is psi psi^+ - |psi|^2 |vac><vac| with psi the C part of an
    excitation injected at A (j=1) or B (j=2). The C block X of delta solves
    the Stein equation X - K X K^+ = psi psi^+ with K the C -> C block of U1;
    the vacuum weight is -Tr X.

    method: "solve" (Bartels-Stewart), "series" (sum of K^k psi psi^+ K^+k,
    accumulated by repeated doubling until the last added block has trace
    below ``tol``) or "auto".
    """
    if j not in (1, 2):
        raise ValueError("j must be 1 (hot side) or 2 (cold side)")
    sec = one_excitation_unitary(spec, tau)
    K = sec.U1[1:-1, 1:-1]
    psi = _source(sec.U1, j)
    n = K.shape[0]
    if method == "auto":
        method = "solve" if n * n <= SOLVE_MAX_ENTRIES else "series"
    if n == 0:
        X, it = np.zeros((0, 0), complex), 0
    elif method == "solve":
        X, it = sla.solve_discrete_lyapunov(K, np.outer(psi, psi.conj())), 0
        if not np.all(np.isfinite(X)):
            raise ArithmeticError("singular Stein equation: the zero-temperature channel is not mixing")
    elif method == "series":
        # partial sums over 2^k terms: X <- X + A X A^+, A <- A^2 (doubling)
        X = np.outer(psi, psi.conj())
        A = K
        it = 0
        while True:
            inc = A @ X @ A.conj().T
            X = X + inc
            A = A @ A
            it += 1
            tail = float(np.trace(inc).real)
            if not np.isfinite(tail):
                raise ArithmeticError("series diverged")
            if tail < tol:
                break
            if 2 ** it >= max_iter:
                raise ArithmeticError(f"series did not converge in {2 ** it} terms (tail {tail:.3e})")
    else:
        raise ValueError(f"unknown method {method!r}")
    X = (X + X.conj().T) / 2
    gamma = float(np.trace(X).real)
    delta = np.zeros((n + 1, n + 1), complex)
    delta[0, 0] = -gamma
    delta[1:, 1:] = X
    if gamma > 0:
        varrho = X / gamma
        p, phi = np.linalg.eigh(varrho)
    else:
        varrho = np.zeros_like(X)
        p, phi = np.zeros(n), np.eye(n, dtype=complex)
    return ExcitationCorrection(delta, gamma, varrho, p, phi, method, it)


class F2Result(NamedTuple):
    f2: float
    absorbed_A: float
    absorbed_B: float
    iterations: int
    method: str


def _aberth_roots(d, c11, c22, c12, tol=1e-14, maxit=300):
    """Eigenvalues of K = P_C U1 P_C from det G(z) = 0, G = sum_k W_k W_k^T / (z - d_k).

    Starting values sit just inside the unit circle next to the N-2 modes
    with the smallest weight on the chain ends.
    """
    N = len(d)
    wt = c11 + c22
    keep = np.argsort(wt, kind="stable")[: N - 2]
    jitter = 1e-7 * (np.arange(N - 2) + 1) / N
    z = d[keep] * (1 - wt[keep] - jitter)
    active = np.ones(z.size, bool)
    it = 0
    for it in range(1, maxit + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        za = z[idx]
        inv = 1.0 / (za[:, None] - d[None, :])
        g11, g22, g12 = inv @ c11, inv @ c22, inv @ c12
        sq = inv * inv
        h11, h22, h12 = -(sq @ c11), -(sq @ c22), -(sq @ c12)
        det = g11 * g22 - g12 * g12
        ddet = h11 * g22 + g11 * h22 - 2 * g12 * h12
        newton = 1.0 / (ddet / det + inv.sum(1))
        diff = za[:, None] - z[None, :]
        diff[np.arange(idx.size), idx] = np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = newton / (1 - newton * (1.0 / diff).sum(1))
        bad = ~np.isfinite(dz)
        if bad.any():
            # collision with a pole or another root: nudge and retry
            dz[bad] = 1e-9 * (1 + 1j) * (1 + np.abs(za[bad]))
        z[idx] = za - dz
        active[idx] = bad | (np.abs(dz) > tol * np.maximum(1, np.abs(za)))
    return z, it


def absorption_probabilities(prop: OneExcitationPropagator, tau: float) -> tuple:
    """(P_A, P_B, iterations): total probabilities that an excitation injected at A
    is eventually absorbed at A or at B by the zero-temperature baths.

    Works in the eigenbasis of the (real-gauge) one-excitation Hamiltonian;
    the eigenvalues z_a of the C -> C block are roots of a 2x2 secular
    determinant, so the cost is O(N^2) per root-finding sweep.
    """
    lam, V = prop.real_gauge
    N = lam.size
    d = np.exp(-1j * lam * tau)
    w1, w2 = V[0], V[-1]
    c11, c22, c12 = w1 * w1, w2 * w2, w1 * w2
    a1, b1 = np.sum(d * c11), np.sum(d * c12)
    if N == 2:
        return abs(a1) ** 2, abs(b1) ** 2, 0
    if np.abs(d - d[0]).max() < 1e-14:
        # U1 is a multiple of the identity: nothing leaves site A
        return 1.0, 0.0, 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        z, it = _aberth_roots(d, c11, c22, c12)
    inv = 1.0 / (d[None, :] - z[:, None])
    g11, g12, g22 = -(inv @ c11), -(inv @ c12), -(inv @ c22)
    use1 = np.abs(g11) + np.abs(g12) >= np.abs(g22) + np.abs(g12)
    ca = np.where(use1, -g12, g22)
    cb = np.where(use1, g11, -g12)
    # eigenvectors of K in H-eigenbasis coordinates
    Vv = inv * (ca[:, None] * w1[None, :] + cb[:, None] * w2[None, :])
    norm = (Vv * Vv) @ d
    pA, pB = Vv @ (d * w1), Vv @ (d * w2)
    Mx = 1.0 / (1 - z[:, None] * z.conj()[None, :])

    def quad(beta):
        x = beta * z
        return float((x @ Mx @ x.conj()).real)

    PA = abs(a1) ** 2 + quad(pA * pA / norm)
    PB = abs(b1) ** 2 + quad(pB * pA / norm)
    trace_err = abs(z.sum() - np.sum(d * (1 - c11 - c22)))
    if not (np.isfinite(PA) and np.isfinite(PB)) or trace_err > 1e-8 * N:
        raise ArithmeticError(f"secular root finding failed (trace defect {trace_err:.3e})")
    return PA, PB, it


def f2_spectral(spec: ChainSpec, tau: float) -> F2Result:
    """f_2 as the probability that an excitation entering at A leaves at B."""
    PA, PB, it = absorption_probabilities(_propagator(spec), tau)
    # P_A is the more fragile of the two (it collects the near-unimodular
    # modes), so this is a loose sanity bound rather than an error estimate
    if abs(PA + PB - 1) > 1e-7:
        raise ArithmeticError(f"absorption probabilities do not add up to 1 (defect {PA + PB - 1:.3e})")
    return F2Result(PB, PA, PB, it, "spectral")


def _f2_dense(spec: ChainSpec, tau: float, method: str) -> F2Result:
    sec = one_excitation_unitary(spec, tau)
    row = sec.U1[0]
    corr = delta_rho_star(spec, tau, 1, method=method)
    amp = row[1:-1] @ corr.phi_l  # <up at 1| U |0 phi_l 0>
    f2 = abs(row[-1]) ** 2 + float(np.sum((1 - corr.gamma * corr.p_l) * np.abs(amp) ** 2))
    return F2Result(f2, 1 - f2, f2, corr.iterations, corr.method)


def f2_lowtemp(spec: ChainSpec, tau: float, method: str = "auto") -> F2Result:
    """Time factor f_2(tau) from the single-excitation sector.

    f2 = |<10..0|U|0..01>|^2 + sum_l (1 - gamma_1 p_l) |<10..0|U|0 phi_l 0>|^2

    method: "solve" or "series" evaluate that formula through
    :func:`delta_rho_star`; "spectral" uses the O(N^2) absorption route,
    which gives the same number; "auto" picks spectral for N > 64 and falls
    back to the dense solve if the secular iteration fails its checks.
    """
    if method == "auto":
        if spec.N > 64:
            try:
                return f2_spectral(spec, tau)
            except ArithmeticError as exc:
                warnings.warn(f"spectral f2 failed at tau={tau}: {exc}; using the dense solve")
        return _f2_dense(spec, tau, "auto")
    if method == "spectral":
        return f2_spectral(spec, tau)
    return _f2_dense(spec, tau, method)


def conservation_defect(spec: ChainSpec, tau: float) -> float:
    """| |<1|U|1>|^2 + |<1|U|N>|^2 + sum_l |<1|U|0 phi_l 0>|^2 - 1 |.

    The phi_l form an orthonormal basis of C's one-excitation space, so the
    sum over l is the squared norm of the C part of the first row of U1.
    """
    row = _propagator(spec).first_row(tau)
    return abs(float(np.sum(np.abs(row) ** 2)) - 1)


def chi_coefficients(spec: ChainSpec, tau: float) -> dict:
    """Independent first-order response coefficients chi_A^(j), chi_B^(j).

    chi_X^(j) = Tr[S^Z_X Theta_X^(j)], with Theta built from the full
    one-excitation evolution of |vac><vac| (x) delta_rho[j] plus the injected
    excitation, minus the corresponding change of the bath Gibbs state.
    """
    sec = one_excitation_unitary(spec, tau)
    N = spec.N
    Ut = np.zeros((N + 1, N + 1), complex)  # [vac, sites 1..N]
    Ut[0, 0] = sec.vacuum_phase
    Ut[1:, 1:] = sec.U1
    out = {}
    for j in (1, 2):
        corr = delta_rho_star(spec, tau, j)
        om = np.zeros((N + 1, N + 1), complex)
        om[0, 0] = corr.delta_rho[0, 0]
        om[2:N, 2:N] = corr.delta_rho[1:, 1:]
        src = 1 if j == 1 else N
        om[src, src] += 1
        s = Ut @ om @ Ut.conj().T
        upA, upB = s[1, 1].real, s[N, N].real
        # <S^Z> = p_up - 1/2 for trace-one first-order blocks; subtract the
        # first-order Gibbs change (+1/2 on the injecting site)
        out[f"A{j}"] = upA - 0.5 - (0.5 if j == 1 else -0.5)
        out[f"B{j}"] = upB - 0.5 - (0.5 if j == 2 else -0.5)
    return out


def lowtemp_thermo(spec: ChainSpec, tau: float, params: LowTempParams, f2: float | None = None) -> CycleThermo:
    """First-order heats: Q_C = (x1 - x2) f2 EN, Q_H = -(x1 - x2) f2 E1."""
    if f2 is None:
        f2 = f2_lowtemp(spec, tau).f2
    dx = params.x1 - params.x2
    E1, EN = spec.E1, spec.EN
    b1, b2 = params.betas(E1, EN)
    Q_C = dx * f2 * EN
    Q_H = -dx * f2 * E1
    tol = zero_tolerance(E1, EN) * max(params.x1, params.x2, 1e-300)
    return thermo_from_heats(Q_H, Q_C, b1, b2, tol)
