"""Four- and two-stroke cycles as quantum channels, and their limit cycles.

Site roles: A is site 1 (hot bath), B is site N (cold bath), C the sites in
between. One cycle, starting from a chain state rho:

1. T1: replace A by its Gibbs state at beta1,
2. U1 = exp(-i H tau1),
3. T2: replace B by its Gibbs state at beta2,
4. U2 = exp(-i H tau2).

The two-stroke machine is the same cycle with tau2 = 0. Its state between
cycles lives on C only.

Superoperators use column stacking: vec(rho) = rho.reshape(-1, order="F"),
so vec(R rho R^+) = (conj(R) kron R) vec(rho).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .quantumstate import (
    DensityMatrix,
    partial_trace,
    product_state,
    tensor,
    trace_distance,
    von_neumann_entropy,
)
from .spinchain import (
    SZ,
    ChainSpec,
    NoSymPairSpec,
    SizeError,
    bond_hamiltonian,
    build_hamiltonian,
    build_nosym_hamiltonian,
    gibbs_populations,
    up_counts,
)

__all__ = [
    "FOUR_STROKE",
    "TWO_STROKE",
    "SUPEROP_MAX_DIM",
    "CycleConfig",
    "ChannelHandle",
    "LimitCycle",
    "FixedPointError",
    "FixedPointInfo",
    "CycleRecord",
    "make_channel",
    "site_roles",
    "thermalize_stroke",
    "unitary_stroke",
    "apply_channel",
    "kraus_set",
    "superoperator_matrix",
    "fixed_point",
    "spectral_gap",
    "iterate_transient",
    "assemble_limit_cycle",
]

FOUR_STROKE = "four-stroke"
TWO_STROKE = "two-stroke"
SUPEROP_MAX_DIM = 64  # largest subsystem dimension d for dense d^2 x d^2 work

Spec = Union[ChainSpec, NoSymPairSpec]


class FixedPointError(RuntimeError):
    """The fixed-point solver failed; ``info`` holds the diagnostics."""

    def __init__(self, msg, info=None):
        super().__init__(msg)
        self.info = info


@dataclass(frozen=True)
class CycleConfig:
    """Bath inverse temperatures, stroke durations and stroke mode.

    ``beta2 >= beta1`` is the intended use (bath 1 is the hot one) but is not
    enforced. In two-stroke mode ``tau2`` must be 0.
    """

    beta1: float
    beta2: float
    tau1: float
    tau2: float = 0.0
    mode: str = FOUR_STROKE

    def __post_init__(self):
        for k in ("beta1", "beta2", "tau1", "tau2"):
            v = float(getattr(self, k))
            if np.isnan(v) or v < 0:
                raise ValueError(f"{k} must be >= 0, got {v}")
            if k.startswith("tau") and not np.isfinite(v):
                raise ValueError(f"{k} must be finite")
            object.__setattr__(self, k, v)
        if self.mode not in (FOUR_STROKE, TWO_STROKE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == TWO_STROKE and self.tau2 != 0:
            raise ValueError("two-stroke mode uses tau1 only; tau2 must be 0")

    @property
    def tau(self) -> float:
        return self.tau1

    def replace(self, **kw) -> "CycleConfig":
        d = self.to_dict()
        d.update(kw)
        return CycleConfig(**d)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("beta1", "beta2", "tau1", "tau2", "mode")}


# --------------------------------------------------------------------------
# model plumbing shared by the symmetric chain and the two-site nosym model


class _Model(NamedTuple):
    N: int
    H: np.ndarray
    evals: np.ndarray
    evecs: np.ndarray
    E1: float
    EN: float
    H_AC: np.ndarray
    H_CB: np.ndarray
    preserves_magnetization: bool


@lru_cache(maxsize=64)
def _model(spec: Spec) -> _Model:
    if isinstance(spec, NoSymPairSpec):
        H = build_nosym_hamiltonian(spec).matrix
        local = np.diag([spec.E1 / 2 + spec.E2 / 2, spec.E1 / 2 - spec.E2 / 2,
                         -spec.E1 / 2 + spec.E2 / 2, -spec.E1 / 2 - spec.E2 / 2]).astype(complex)
        coupling = H - local
        N, E1, EN, HAC, HCB, pres = 2, spec.E1, spec.E2, coupling, coupling, False
    else:
        H = build_hamiltonian(spec).matrix
        N, E1, EN = spec.N, spec.E1, spec.EN
        HAC = bond_hamiltonian(spec, 1)
        HCB = bond_hamiltonian(spec, N - 1)
        pres = True
    w, V = np.linalg.eigh(H)
    for a in (H, w, V, HAC, HCB):
        a.setflags(write=False)
    return _Model(N, H, w, V, float(E1), float(EN), HAC, HCB, pres)


def _propagator(model: _Model, tau: float) -> np.ndarray:
    if tau == 0:
        return np.eye(model.H.shape[0], dtype=complex)
    V = model.evecs
    return (V * np.exp(-1j * model.evals * tau)) @ V.conj().T


def site_roles(N: int) -> dict:
    """Site tuples of the subsystems A, C, B, CB, AC and the full chain."""
    C = tuple(range(2, N))
    return {"A": (1,), "C": C, "B": (N,), "CB": C + (N,), "AC": (1,) + C, "ACB": tuple(range(1, N + 1))}


def _gibbs_state(E: float, beta: float, site: int) -> DensityMatrix:
    return DensityMatrix(np.diag(gibbs_populations(E, beta)).astype(complex), (site,))


# --------------------------------------------------------------------------
# strokes


def thermalize_stroke(rho: DensityMatrix, site: int, beta: float, E_site: float) -> DensityMatrix:
    """Replace ``site`` by its Gibbs state: gibbs (x) Tr_site[rho]."""
    rest = tuple(s for s in rho.sites if s != site)
    g = _gibbs_state(E_site, beta, site)
    if not rest:
        return g
    return tensor(g, partial_trace(rho, rest))


def unitary_stroke(rho: DensityMatrix, H, tau: float) -> DensityMatrix:
    """U rho U^+ with U = exp(-i H tau) from the spectral decomposition of H."""
    H = getattr(H, "matrix", H)
    if tau == 0:
        return rho
    w, V = np.linalg.eigh(H)
    U = (V * np.exp(-1j * w * tau)) @ V.conj().T
    return DensityMatrix(U @ rho.matrix @ U.conj().T, rho.sites)


# --------------------------------------------------------------------------
# channels


@dataclass(frozen=True, eq=False)
class ChannelHandle:
    """One cycle's action on a subsystem: target "CB", "AC" or "C".

    Immutable; the spectral data of H and the propagators are computed on
    first use and cached on the instance.
    """

    spec: Spec
    config: CycleConfig
    target: str

    def __post_init__(self):
        if self.target not in ("CB", "AC", "C"):
            raise ValueError(f"unknown target {self.target!r}")
        if self.target == "C" and self.config.mode != TWO_STROKE:
            raise ValueError("target C is the two-stroke channel; use mode='two-stroke'")

    @cached_property
    def model(self) -> _Model:
        return _model(self.spec)

    @property
    def N(self) -> int:
        return self.model.N

    @property
    def sites(self) -> tuple:
        return site_roles(self.N)[self.target]

    @property
    def dim(self) -> int:
        return 2 ** len(self.sites)

    @cached_property
    def U1(self) -> np.ndarray:
        return _propagator(self.model, self.config.tau1)

    @cached_property
    def U2(self) -> np.ndarray:
        return _propagator(self.model, self.config.tau2)

    @cached_property
    def pA(self) -> np.ndarray:
        return gibbs_populations(self.model.E1, self.config.beta1)

    @cached_property
    def pB(self) -> np.ndarray:
        return gibbs_populations(self.model.EN, self.config.beta2)

    @property
    def finite_temperature(self) -> bool:
        return bool(np.isfinite(self.config.beta1) and np.isfinite(self.config.beta2))

    def gibbs_A(self) -> DensityMatrix:
        return DensityMatrix(np.diag(self.pA).astype(complex), (1,))

    def gibbs_B(self) -> DensityMatrix:
        return DensityMatrix(np.diag(self.pB).astype(complex), (self.N,))

    @cached_property
    def _kraus(self) -> np.ndarray:
        return _kraus_stack(self, self.pA, self.pB)


def make_channel(spec: Spec, config: CycleConfig, target: str | None = None) -> ChannelHandle:
    """Channel handle; the default target is CB (four-stroke) or C (two-stroke)."""
    if target is None:
        target = "C" if config.mode == TWO_STROKE else "CB"
    return ChannelHandle(spec, config, target)


def _evolve(U: np.ndarray, rho: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(U @ rho.matrix @ U.conj().T, rho.sites)


def apply_channel(handle: ChannelHandle, rho: DensityMatrix) -> DensityMatrix:
    """Apply one cycle of the channel by composing the strokes explicitly."""
    roles = site_roles(handle.N)
    if rho.sites != roles[handle.target]:
        raise ValueError(f"state lives on {rho.sites}, channel {handle.target} acts on {roles[handle.target]}")
    if handle.target == "CB":
        s = _evolve(handle.U1, tensor(handle.gibbs_A(), rho))
        s = tensor(partial_trace(s, roles["AC"]), handle.gibbs_B())
        return partial_trace(_evolve(handle.U2, s), roles["CB"])
    if handle.target == "AC":
        s = _evolve(handle.U2, tensor(rho, handle.gibbs_B()))
        s = tensor(handle.gibbs_A(), partial_trace(s, roles["CB"]))
        return partial_trace(_evolve(handle.U1, s), roles["AC"])
    if handle.N == 2:
        return rho
    s = product_state(handle.gibbs_A(), rho, handle.gibbs_B())
    s = _evolve(handle.U1, s)
    return partial_trace(s, roles["C"])


def _kraus_stack(handle: ChannelHandle, pA, pB) -> np.ndarray:
    """Kraus operators weighted by the bath populations, zero weights dropped.

    Local index 0 is spin-up, 1 is spin-down.
    """
    N = handle.N
    c = 2 ** (N - 2)
    U1 = handle.U1.reshape(2, c, 2, 2, c, 2)
    U2 = handle.U2.reshape(2, c, 2, 2, c, 2)
    ops = []
    for i in range(2):
        for jp in range(2):
            w = pA[i] * pB[jp]
            if w == 0:
                continue
            sw = np.sqrt(w)
            for ip in range(2):
                for j in range(2):
                    if handle.target == "C":
                        # <ip, j|_AB U |i, jp>_AB as an operator on C
                        ops.append(sw * U1[ip, :, j, i, :, jp])
                        continue
                    # X1: CB -> AC (inject A in state i, project B out on ip)
                    X1 = U1[:, :, ip, i, :, :].reshape(2 * c, 2 * c)
                    # X2: AC -> CB (inject B in state jp, project A out on j)
                    X2 = U2[j, :, :, :, :, jp].reshape(2 * c, 2 * c)
                    ops.append(sw * (X2 @ X1 if handle.target == "CB" else X1 @ X2))
    return np.array(ops)


def kraus_set(handle: ChannelHandle) -> list:
    """Explicit Kraus operators of the channel (finite temperatures only).

    The operators are labeled by the bath-site input states (A in i, B in j')
    with weights sqrt(p_A(i) p_B(j')), and by the two projected output states.
    """
    if not handle.finite_temperature:
        raise ValueError("Kraus weights need finite beta; use mixing.convex_decomposition at zero temperature")
    return list(handle._kraus)


def _apply_kraus(R: np.ndarray, m: np.ndarray) -> np.ndarray:
    return np.einsum("kij,jl,kml->im", R, m, R.conj(), optimize=True)


def superoperator_matrix(handle: ChannelHandle) -> np.ndarray:
    """d^2 x d^2 matrix M with vec(Phi(rho)) = M vec(rho), column stacking."""
    d = handle.dim
    if d > SUPEROP_MAX_DIM:
        raise SizeError(f"superoperator of dimension {d}^2 exceeds the dense cap {SUPEROP_MAX_DIM}^2")
    R = handle._kraus
    return np.einsum("kij,kab->iajb", R.conj(), R).reshape(d * d, d * d)


def _vec(m):
    return m.reshape(-1, order="F")


def _unvec(v, d):
    return v.reshape(d, d, order="F")


def _bd_pairs(n_sites: int):
    n = up_counts(n_sites)
    I, J = np.nonzero(n[:, None] == n[None, :])
    return I, J


def _bd_superoperator(handle: ChannelHandle):
    """Superoperator restricted to block-diagonal operators (entries (i, j) of equal excitation)."""
    I, J = _bd_pairs(len(handle.sites))
    R = handle._kraus
    M = np.zeros((I.size, I.size), dtype=complex)
    for r in R:
        M += r[np.ix_(I, I)] * r.conj()[np.ix_(J, J)]
    return M, I, J


def _normalize_state(m: np.ndarray, sites) -> DensityMatrix:
    m = m / np.trace(m)  # also removes the arbitrary phase of an eigenvector
    m = (m + m.conj().T) / 2
    w, V = np.linalg.eigh(m)
    w = np.clip(w, 0, None)
    m = (V * w) @ V.conj().T
    return DensityMatrix(m / np.trace(m).real, sites)


class FixedPointInfo(NamedTuple):
    method: str
    iterations: int
    residual: float
    contraction: float | None = None


def _solve_fixed(M: np.ndarray, diag_rows: np.ndarray) -> np.ndarray:
    A = M - np.eye(M.shape[0])
    r0 = diag_rows[0]
    A[r0, :] = 0
    A[r0, diag_rows] = 1
    b = np.zeros(M.shape[0], dtype=complex)
    b[r0] = 1
    # a singular system means eigenvalue 1 is degenerate: no unique fixed point
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            return sla.solve(A, b)
        except (sla.LinAlgWarning, np.linalg.LinAlgError) as exc:
            raise FixedPointError(f"fixed point not unique (singular system: {exc})") from None


def _is_identity(U: np.ndarray) -> bool:
    return bool(np.abs(U - np.eye(U.shape[0])).max() < 1e-14)


def fixed_point(handle: ChannelHandle, method: str = "solve", tol: float = 1e-12,
                max_iter: int = 10 ** 6) -> tuple:
    """Fixed point of the channel and solver diagnostics.

    Methods
    -------
    power : iterate from I/d until the trace distance between successive
        iterates is below ``tol``; aborts early when the measured contraction
        ratio says ``max_iter`` cannot be reached.
    eigen : eigenvector of the dense superoperator for the eigenvalue closest
        to 1, Hermitized, clamped to PSD and normalized; raises if the
        eigenvalue 1 is degenerate.
    solve : linear solve of (M - I) x = 0 with a trace constraint. For
        magnetization-preserving models only block-diagonal operators are
        kept, since the channel maps them to themselves and the fixed point is
        one of them. A singular system (eigenvalue 1 degenerate) raises,
        except when both unitaries are the identity; then the state reached
        from I/d is returned.

    Returns ``(DensityMatrix, FixedPointInfo)``; the info residual is
    ||Phi(rho) - rho||_1 measured with the explicit stroke composition.
    """
    d, sites = handle.dim, handle.sites
    if d == 1:
        return DensityMatrix(np.ones((1, 1), dtype=complex), sites), FixedPointInfo(method, 0, 0.0)
    if method == "power":
        rho, it, ratio = _power(handle, tol, max_iter)
    elif method == "eigen":
        M = superoperator_matrix(handle)
        w, V = np.linalg.eig(M)
        k = np.argsort(np.abs(w - 1))
        if abs(w[k[1]] - 1) < 1e-8:
            raise FixedPointError(f"eigenvalue 1 is degenerate ({w[k[0]]:.3g}, {w[k[1]]:.3g}); fixed point not unique")
        rho, it, ratio = _normalize_state(_unvec(V[:, k[0]], d), sites), 0, None
    elif method == "solve" and _is_identity(handle.U1) and _is_identity(handle.U2):
        # no evolution: every state of C is fixed, return the one reached from I/d
        rho, it, ratio = _power(handle, tol, max_iter)
    elif method == "solve":
        if handle.model.preserves_magnetization:
            M, I, J = _bd_superoperator(handle)
            diag = np.flatnonzero(I == J)
            x = _solve_fixed(M, diag)
            m = np.zeros((d, d), dtype=complex)
            m[I, J] = x
        else:
            if d > SUPEROP_MAX_DIM:
                raise SizeError("dense solve needs the full superoperator")
            M = superoperator_matrix(handle)
            diag = np.arange(d) * (d + 1)
            m = _unvec(_solve_fixed(M, diag), d)
        rho, it, ratio = _normalize_state(m, sites), 0, None
    else:
        raise ValueError(f"unknown method {method!r}")
    res = trace_distance(apply_channel(handle, rho), rho)
    info = FixedPointInfo(method, it, res, ratio)
    if method != "power" and res > max(tol, 1e-12) * 1e3:
        raise FixedPointError(f"{method} fixed point has residual {res:.3e}", info)
    return rho, info


def _power(handle: ChannelHandle, tol, max_iter):
    d = handle.dim
    m = np.eye(d, dtype=complex) / d
    R = handle._kraus if handle.dim > 1 else None
    prev, ratio = None, None
    for it in range(1, max_iter + 1):
        new = _apply_kraus(R, m) if R is not None else m
        res = trace_distance(new, m)
        m = new
        if res < tol:
            return _normalize_state(m, handle.sites), it, ratio
        if prev is not None and prev > 0:
            r = res / prev
            ratio = r if ratio is None else 0.9 * ratio + 0.1 * r
            if it > 50 and 0 < ratio < 1:
                remaining = np.log(tol / res) / np.log(ratio)
                if it + remaining > 2 * max_iter:
                    raise FixedPointError(
                        f"power iteration would need ~{it + remaining:.3g} steps (contraction {ratio:.6f})",
                        FixedPointInfo("power", it, res, ratio),
                    )
        prev = res
    raise FixedPointError(f"power iteration did not converge in {max_iter} steps",
                          FixedPointInfo("power", max_iter, res, ratio))


def _gap_from_eigs(w: np.ndarray) -> float:
    a = np.sort(np.abs(w))[::-1]
    # |lambda| <= 1 for a channel; rounding can push a unimodular one just above
    return max(0.0, float(1 - a[1])) if a.size > 1 else 1.0


def spectral_gap(handle: ChannelHandle) -> float:
    """1 - |lambda_2| of the superoperator (second largest modulus)."""
    d = handle.dim
    if d * d <= 1024:
        return _gap_from_eigs(np.linalg.eigvals(superoperator_matrix(handle)))
    if d > SUPEROP_MAX_DIM:
        raise SizeError(f"spectral gap needs d <= {SUPEROP_MAX_DIM}")
    R = handle._kraus

    def mv(v):
        return _vec(_apply_kraus(R, _unvec(np.asarray(v).ravel(), d)))

    op = spla.LinearOperator((d * d, d * d), matvec=mv, dtype=complex)
    w = spla.eigs(op, k=4, which="LM", return_eigenvectors=False, tol=1e-12)
    return _gap_from_eigs(w)


# --------------------------------------------------------------------------
# transients and limit cycles


class CycleRecord(NamedTuple):
    m: int
    Q_H: float
    Q_C: float
    W1: float
    W2: float
    W3: float
    W4: float
    W: float
    dS_T1: float | None
    dS_T2: float | None
    dU: float
    mean_Q_H: float
    mean_Q_C: float
    mean_W: float


def _expect(op, rho):
    return float(np.einsum("ij,ji->", op, rho.matrix).real)


def _local_ops(model: _Model):
    N = model.N
    HA = model.E1 * np.kron(SZ, np.eye(2 ** (N - 1)))
    HB = model.EN * np.kron(np.eye(2 ** (N - 1)), SZ)
    return HA, HB


def iterate_transient(spec: Spec, config: CycleConfig, rho0: DensityMatrix, m: int,
                      entropies: bool = False) -> list:
    """Run ``m`` cycles from the full-chain state ``rho0`` (start of stroke 1).

    Each record holds the heats Q_H, Q_C released into the baths, the quench
    works W1..W4 (extracted), their sum W, the chain's internal energy change
    dU over the cycle, and running means. Energy bookkeeping per cycle:
    Q_H + Q_C + W + dU = 0.
    """
    model = _model(spec)
    N = model.N
    roles = site_roles(N)
    if rho0.sites != roles["ACB"]:
        raise ValueError("rho0 must be a full-chain state")
    U1, U2 = _propagator(model, config.tau1), _propagator(model, config.tau2)
    HA, HB = _local_ops(model)
    gA = _gibbs_state(model.E1, config.beta1, 1)
    gB = _gibbs_state(model.EN, config.beta2, N)
    rho = rho0
    out = []
    sums = np.zeros(3)
    for k in range(1, m + 1):
        U0 = _expect(model.H, rho)
        W1 = _expect(model.H_AC, rho)
        after1 = tensor(gA, partial_trace(rho, roles["CB"]))
        Q_H = _expect(HA, rho) - _expect(HA, after1)
        W2 = -_expect(model.H_AC, after1)
        dS1 = von_neumann_entropy(after1) - von_neumann_entropy(rho) if entropies else None
        tilde = _evolve(U1, after1)
        W3 = _expect(model.H_CB, tilde)
        after2 = tensor(partial_trace(tilde, roles["AC"]), gB)
        Q_C = _expect(HB, tilde) - _expect(HB, after2)
        W4 = -_expect(model.H_CB, after2)
        dS2 = von_neumann_entropy(after2) - von_neumann_entropy(tilde) if entropies else None
        rho = _evolve(U2, after2)
        W = W1 + W2 + W3 + W4
        sums += (Q_H, Q_C, W)
        dU = _expect(model.H, rho) - U0
        out.append(CycleRecord(k, Q_H, Q_C, W1, W2, W3, W4, W, dS1, dS2, dU, *(sums / k)))
    return out


@dataclass(frozen=True, eq=False)
class LimitCycle:
    """Corner states of the limit cycle and consistency diagnostics.

    rho_ACB_star : chain state at the start of stroke 1
    rho_ACB_tilde_star : chain state after U1 (start of stroke 3)
    rho_CB_star, rho_AC_star : the CB and AC fixed points
    rho_C_star : the C fixed point (two-stroke only)
    residual : ||Phi(rho*) - rho*||_1 of the driving fixed point
    loop_residual : ||Tr_A rho_ACB_star - rho_CB_star||_1 after one loop
    cross_residual : max deviation in the two CB <-> AC identities, when checked
    """

    spec: Spec
    config: CycleConfig
    rho_CB_star: DensityMatrix
    rho_AC_star: DensityMatrix
    rho_ACB_star: DensityMatrix
    rho_ACB_tilde_star: DensityMatrix
    rho_C_star: DensityMatrix | None
    iterations: int
    residual: float
    loop_residual: float
    cross_residual: float | None
    method: str


def assemble_limit_cycle(spec: Spec, config: CycleConfig, method: str = "solve", tol: float = 1e-12,
                         max_iter: int = 10 ** 6, cross_check: bool | None = None) -> LimitCycle:
    """Limit cycle from the channel fixed point.

    Four-stroke: rho*_CB is the CB fixed point, then
    rho~*_ACB = U1 (rho_A (x) rho*_CB) U1^+, rho~*_AC = Tr_B rho~*_ACB and
    rho*_ACB = U2 (rho~*_AC (x) rho_B) U2^+. Two-stroke: rho*_C is the C fixed
    point and the loop alternates between rho_A (x) rho*_C (x) rho_B and its
    image under U(tau).

    With ``cross_check`` (default for N <= 6) the AC fixed point is solved
    independently and both CB <-> AC identities are verified.
    """
    model = _model(spec)
    N = model.N
    roles = site_roles(N)
    two = config.mode == TWO_STROKE
    handle = make_channel(spec, config)
    fp, info = fixed_point(handle, method=method, tol=tol, max_iter=max_iter)
    gA, gB = handle.gibbs_A(), handle.gibbs_B()
    if two:
        rho_C = fp
        rho_CB = tensor(fp, gB) if N > 2 else gB
    else:
        rho_C = None
        rho_CB = fp
    tilde = _evolve(handle.U1, tensor(gA, rho_CB))
    rho_AC = partial_trace(tilde, roles["AC"])
    star = _evolve(handle.U2, tensor(rho_AC, gB))
    loop = trace_distance(partial_trace(star, roles["CB"]), rho_CB)
    if cross_check is None:
        cross_check = N <= 6
    cross = None
    if cross_check:
        h_ac = ChannelHandle(spec, config, "AC")
        ac, _ = fixed_point(h_ac, method="solve" if method == "power" else method, tol=tol)
        cb_from_ac = partial_trace(_evolve(handle.U2, tensor(ac, gB)), roles["CB"])
        cross = max(trace_distance(ac, rho_AC), trace_distance(cb_from_ac, rho_CB))
    return LimitCycle(spec, config, rho_CB, rho_AC, star, tilde, rho_C, info.iterations,
                      info.residual, loop, cross, info.method)
