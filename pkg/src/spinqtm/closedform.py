"""Analytic results used as oracles for the numerical engine.

Coupling normalization: the analytic expressions are written in terms of
constants J, K (and J_R, J_I, K_R, K_I) that equal ``COUPLING_SCALE`` times
the corresponding Hamiltonian parameters. With the factors of 4 in the
Hamiltonian the hopping matrix element between |10> and |01> is 2(J - iK), so
the Rabi splitting is sqrt(dE^2 + 16 (J^2 + K^2)) / 2 and the scale is 4.
:func:`calibrate_coupling_scale` re-derives it numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cycle import CycleConfig, FOUR_STROKE, TWO_STROKE, _model, _propagator, assemble_limit_cycle
from .quantumstate import DensityMatrix
from .spinchain import ChainSpec, NoSymPairSpec, gibbs_populations
from .thermo import (
    CycleThermo,
    extract_ansatz,
    g_function,
    limit_cycle_thermo,
    thermo_from_heats,
    zero_tolerance,
)

__all__ = [
    "COUPLING_SCALE",
    "N2Constants",
    "NoSymConstants",
    "n2_constants",
    "n2_f4",
    "n2_fixed_point",
    "n2_thermo",
    "calibrate_coupling_scale",
    "n3_blocks",
    "n3_twostroke_f2",
    "nosym_constants",
    "nosym_fixed_point",
    "nosym_thermo",
    "nosym_printed_display",
    "NoSymScan",
    "nosym_regime_scan",
    "ALLOWED_NOSYM_REGIMES",
]

COUPLING_SCALE = 4.0


def _sinc_ratio(omega, tau):
    """sin(omega tau) / omega with the omega -> 0 limit tau."""
    if omega == 0:
        return tau
    return np.sin(omega * tau) / omega


def _rabi(delta, g2, tau):
    """Amplitudes (C, S/coupling) of a two-level rotation.

    C = cos(w t) + i sin(w t) delta / (2 w), with w = sqrt(delta^2 + g2) / 2,
    and sin(w t) / (2 w), both with the analytic w -> 0 limit.
    """
    w = np.sqrt(delta ** 2 + g2) / 2
    s = _sinc_ratio(w, tau) / 2
    return np.cos(w * tau) + 1j * delta * s, s, w


class N2Constants(NamedTuple):
    C_H: complex
    S_H: complex
    omega: float
    W2: float


def _pair_params(spec):
    """(E1, E2, J, K) of a two-site chain in closed-form units."""
    if isinstance(spec, ChainSpec):
        if spec.N != 2:
            raise ValueError("the N=2 closed form needs a two-site chain")
        E1, E2, J, K = spec.E[0], spec.E[1], spec.J[0], spec.K[0]
    else:
        E1, E2, J, K = spec
    return float(E1), float(E2), COUPLING_SCALE * float(J), COUPLING_SCALE * float(K)


def n2_constants(spec, tau: float) -> N2Constants:
    """C_H(tau), S_H(tau), omega and W^2 = J^2 + K^2 (closed-form units)."""
    E1, E2, J, K = _pair_params(spec)
    W2 = J * J + K * K
    C, s, w = _rabi(E2 - E1, W2, tau)
    return N2Constants(C, -s * (J - 1j * K), w, W2)


def n2_f4(spec, tau1: float, tau2: float) -> float:
    """Time factor f_4 of the two-site four-stroke machine.

    f4 = r (s1 + s2 - 2 r s1 s2) / (1 - r^2 s1 s2) with r = W^2 / (4 w^2)
    and s_k = sin^2(w tau_k); written with |S_H|^2 = r s_k so that w -> 0
    is regular.
    """
    a = abs(n2_constants(spec, tau1).S_H) ** 2
    b = abs(n2_constants(spec, tau2).S_H) ** 2
    den = 1 - a * b
    if den <= 0:
        # a = b = 1: both strokes are complete swaps
        return 0.0
    return float((a + b - 2 * a * b) / den)


def n2_fixed_point(spec, config: CycleConfig) -> DensityMatrix:
    """Diagonal fixed point on B of the two-site four-stroke channel."""
    E1, E2, _, _ = _pair_params(spec)
    s1 = abs(n2_constants(spec, config.tau1).S_H) ** 2
    s2 = abs(n2_constants(spec, config.tau2).S_H) ** 2
    den = 1 - s1 * s2
    if den <= 0:
        raise ValueError("complete swaps in both strokes: the fixed point is not unique")
    a = gibbs_populations(E1, config.beta1)
    b = gibbs_populations(E2, config.beta2)
    c1, c2 = 1 - s1, 1 - s2
    p = (a * s2 * c1 + b * c2) / den
    return DensityMatrix(np.diag(p).astype(complex), (2,))


def n2_thermo(spec, config: CycleConfig) -> CycleThermo:
    """Heats from g and the closed-form f_4."""
    E1, E2, _, _ = _pair_params(spec)
    tau2 = config.tau2 if config.mode == FOUR_STROKE else 0.0
    f = n2_f4(spec, config.tau1, tau2)
    g = g_function(E1, E2, config.beta1, config.beta2)
    return thermo_from_heats(-g * f * E1, g * f * E2, config.beta1, config.beta2, zero_tolerance(E1, E2))


def calibrate_coupling_scale(rng: np.random.Generator, n: int = 20, candidates=(1.0, 2.0, 4.0)) -> dict:
    """Max |f4 closed form - f4 numerics| for each candidate coupling scale."""
    global COUPLING_SCALE
    saved = COUPLING_SCALE
    cases = []
    for _ in range(n):
        E = rng.uniform(-2, 2, 2)
        J, K = rng.uniform(-2, 2, 2)
        spec = ChainSpec(2, E, J, K, rng.uniform(-2, 2))
        cfg = CycleConfig(*rng.uniform(0.1, 5, 2), *rng.uniform(0, 10, 2))
        th = limit_cycle_thermo(assemble_limit_cycle(spec, cfg))
        an = extract_ansatz(th, spec.E1, spec.EN, cfg.beta1, cfg.beta2)
        if an.valid and abs(an.g_value) > 1e-6:
            cases.append((spec, cfg, an.f4_value))
    out = {}
    try:
        for c in candidates:
            COUPLING_SCALE = c
            out[c] = max(abs(n2_f4(s, cf.tau1, cf.tau2) - f) for s, cf, f in cases)
    finally:
        COUPLING_SCALE = saved
    return out


# --------------------------------------------------------------------------
# N = 3 two-stroke


def n3_blocks(spec: ChainSpec, tau: float):
    """One- and two-excitation blocks of U(tau) for a three-site chain.

    U^(1) is indexed by the site of the single up spin, U^(2) by the site of
    the single down spin (both 1, 2, 3 in order).
    """
    if spec.N != 3:
        raise ValueError("needs a three-site chain")
    U = _propagator(_model(spec), tau)
    one = [3, 5, 6]  # |100>, |010>, |001>
    two = [4, 2, 1]  # down spin on site 1, 2, 3: |011>, |101>, |110>
    return U[np.ix_(one, one)], U[np.ix_(two, two)]


def n3_twostroke_f2(spec: ChainSpec, tau: float, tol: float = 1e-10) -> float:
    """f_2 = (ab + bc + ca) / (a + b) for three-site exchange-only chains.

    a, b, c are the squared moduli |U_12|^2, |U_23|^2, |U_13|^2 of the
    one-excitation block; the same moduli must appear in the two-excitation
    block and in the transposed positions.
    """
    if np.any(spec.F != 0) or np.any(spec.K != 0):
        raise ValueError("the three-site closed form holds for K = F = 0")
    U1, U2 = n3_blocks(spec, tau)
    P1, P2 = np.abs(U1) ** 2, np.abs(U2) ** 2
    vals = []
    for i, j in ((0, 1), (1, 2), (0, 2)):
        group = [P1[i, j], P1[j, i], P2[i, j], P2[j, i]]
        if max(group) - min(group) > tol:
            raise ValueError(f"modulus constraint violated for ({i + 1},{j + 1}): {group}")
        vals.append(group[0])
    a, b, c = vals
    if a + b < 1e-14:
        if max(a, b, c) < 1e-14:
            return 0.0
        raise ValueError("a + b vanishes while c does not")
    return float((a * b + b * c + c * a) / (a + b))


# --------------------------------------------------------------------------
# two-site model without magnetization symmetry


@dataclass(frozen=True)
class NoSymConstants:
    C_J: complex
    S_J: complex
    omega_J: float
    C_K: complex
    S_K: complex
    omega_K: float

    @property
    def S_of_tau(self) -> float:
        return abs(self.S_J) ** 2 - abs(self.S_K) ** 2


def nosym_constants(spec: NoSymPairSpec, tau: float) -> NoSymConstants:
    s = COUPLING_SCALE
    JR, JI, KR, KI = s * spec.J_R, s * spec.J_I, s * spec.K_R, s * spec.K_I
    CJ, sj, wJ = _rabi(spec.E2 - spec.E1, JR ** 2 + JI ** 2, tau)
    CK, sk, wK = _rabi(spec.E2 + spec.E1, KR ** 2 + KI ** 2, tau)
    return NoSymConstants(CJ, -sj * (JR - 1j * JI), wJ, CK, -sk * (KR - 1j * KI), wK)


def _swap_probs(spec, tau):
    c = nosym_constants(spec, tau)
    return abs(c.S_J) ** 2, abs(c.S_K) ** 2


def _stroke_map(a, q, sJ, sK):
    """Up-probabilities (A, B) after one unitary stroke from a product state.

    The dynamics only swaps |10> <-> |01> (probability sJ) and
    |11> <-> |00> (probability sK); coherences are never generated from a
    diagonal product input in the populations that matter here.
    """
    p11, p10, p01, p00 = a * q, a * (1 - q), (1 - a) * q, (1 - a) * (1 - q)
    n11 = p11 * (1 - sK) + p00 * sK
    n10 = p10 * (1 - sJ) + p01 * sJ
    n01 = p01 * (1 - sJ) + p10 * sJ
    return n11 + n10, n11 + n01


def nosym_fixed_point(spec: NoSymPairSpec, config: CycleConfig) -> DensityMatrix:
    """Fixed point on B of the four-stroke channel, in closed form.

    p_up = [S(t2)(a_up |C_J(t1)|^2 + a_dn |S_K(t1)|^2) + b_up |C_J(t2)|^2
            + b_dn |S_K(t2)|^2] / (1 - S(t1) S(t2)),  S = |S_J|^2 - |S_K|^2.
    """
    c1 = nosym_constants(spec, config.tau1)
    c2 = nosym_constants(spec, config.tau2)
    S1, S2 = c1.S_of_tau, c2.S_of_tau
    den = 1 - S1 * S2
    if den <= 0:
        raise ValueError("degenerate denominator 1 - S(tau1) S(tau2)")
    a = gibbs_populations(spec.E1, config.beta1)
    b = gibbs_populations(spec.E2, config.beta2)
    cj1, sk1 = abs(c1.C_J) ** 2, abs(c1.S_K) ** 2
    cj2, sk2 = abs(c2.C_J) ** 2, abs(c2.S_K) ** 2
    up = (S2 * (a[0] * cj1 + a[1] * sk1) + b[0] * cj2 + b[1] * sk2) / den
    dn = (S2 * (a[1] * cj1 + a[0] * sk1) + b[1] * cj2 + b[0] * sk2) / den
    return DensityMatrix(np.diag([up, dn]).astype(complex), (2,))


def nosym_thermo(spec: NoSymPairSpec, config: CycleConfig, check: bool = True):
    """Closed-form heats of the two-site model and its constants.

    Q_C = (E2/2) [f_H(t1, t2) u1 + f_C(t1, t2) u2]
    Q_H = (E1/2) [f_C(t1, t2) u1 + f_H(t2, t1) u2]
    with u_k = -tanh(beta_k E_k / 2) the Gibbs value of 2<S^Z>. As an
    independent route the closed-form fixed point is also pushed through one
    cycle with the swap probabilities |S_J|^2, |S_K|^2. With ``check`` both are
    compared with the numerical channel.

    Returns ``(CycleThermo, (NoSymConstants tau1, NoSymConstants tau2), report)``.
    """
    tau2 = config.tau2 if config.mode == FOUR_STROKE else 0.0
    c1, c2 = nosym_constants(spec, config.tau1), nosym_constants(spec, tau2)
    if 1 - c1.S_of_tau * c2.S_of_tau <= 0:
        raise ValueError("degenerate denominator 1 - S(tau1) S(tau2)")
    u1 = -np.tanh(config.beta1 * spec.E1 / 2) if np.isfinite(config.beta1) else -np.sign(spec.E1)
    u2 = -np.tanh(config.beta2 * spec.E2 / 2) if np.isfinite(config.beta2) else -np.sign(spec.E2)
    fC = _fC(c1, c2)
    Q_C = spec.E2 / 2 * (_fH(c1, c2) * u1 + fC * u2)
    Q_H = spec.E1 / 2 * (fC * u1 + _fH(c2, c1) * u2)
    th = thermo_from_heats(Q_H, Q_C, config.beta1, config.beta2, zero_tolerance(spec.E1, spec.E2))

    cfg = config if config.mode == FOUR_STROKE else config.replace(mode=FOUR_STROKE)
    sJ1, sK1 = abs(c1.S_J) ** 2, abs(c1.S_K) ** 2
    sJ2, sK2 = abs(c2.S_J) ** 2, abs(c2.S_K) ** 2
    a = gibbs_populations(spec.E1, config.beta1)[0]
    b = gibbs_populations(spec.E2, config.beta2)[0]
    q = nosym_fixed_point(spec, cfg).matrix[0, 0].real
    a1, qt = _stroke_map(a, q, sJ1, sK1)  # after U1
    a2, q2 = _stroke_map(a1, b, sJ2, sK2)  # after T2 and U2
    report = {
        "closure": abs(q2 - q),
        "propagated_Q_H": abs(spec.E1 * (a2 - a) - Q_H),
        "propagated_Q_C": abs(spec.E2 * (qt - b) - Q_C),
    }
    if check:
        lc = assemble_limit_cycle(spec, cfg)
        num = limit_cycle_thermo(lc)
        report.update(
            fixed_point=float(np.abs(lc.rho_CB_star.matrix - nosym_fixed_point(spec, cfg).matrix).max()),
            Q_H=abs(num.Q_H_star - Q_H),
            Q_C=abs(num.Q_C_star - Q_C),
            numeric=num,
        )
    return th, (c1, c2), report


def _fH(c1: NoSymConstants, c2: NoSymConstants) -> float:
    S1, S2 = c1.S_of_tau, c2.S_of_tau
    x = abs(c1.C_K) ** 2 - abs(c1.S_J) ** 2
    return S2 * x ** 2 / (1 - S1 * S2) - abs(c1.S_K) ** 2 + abs(c1.S_J) ** 2


def _fC(c1: NoSymConstants, c2: NoSymConstants) -> float:
    x1 = abs(c1.C_K) ** 2 - abs(c1.S_J) ** 2
    x2 = abs(c2.C_K) ** 2 - abs(c2.S_J) ** 2
    return x1 * x2 / (1 - c1.S_of_tau * c2.S_of_tau) - 1


def nosym_printed_display(spec: NoSymPairSpec, config: CycleConfig) -> dict:
    """Alternative heat/work/entropy expressions in f_H and f_C, term by term.

    Kept only for comparison with the numerics: the entropy term weights all
    four pieces with beta1 and the heats carry no E factors, so none of these
    match the limit cycle in general. :func:`nosym_thermo` has the forms that do.
    """
    c1 = nosym_constants(spec, config.tau1)
    c2 = nosym_constants(spec, config.tau2)
    b1, b2 = config.beta1, config.beta2
    u1 = -np.tanh(b1 * spec.E1 / 2)  # (e^{-x/2} - e^{x/2}) / Z
    u2 = -np.tanh(b2 * spec.E2 / 2)
    fH12, fH21 = _fH(c1, c2), _fH(c2, c1)
    fC12, fC21 = _fC(c1, c2), _fC(c2, c1)
    return {
        "Q_C": fH12 * u1 + fC12 * u2,
        "Q_H": fH21 * u1 + fC21 * u2,
        "W": -(fH12 + fC21) * (u1 + u2),
        "dS_T": (b1 * fC21 + b1 * fH12) * u1 + (b1 * fH21 + b1 * fC12) * u2,
        "f_H": (fH12, fH21),
        "f_C": (fC12, fC21),
    }


ALLOWED_NOSYM_REGIMES = {
    "negative": {"H", "R", "E", "A"},
    "R-band": {"R", "H"},
    "E-band": {"E", "A", "H"},
    "A-band": {"A", "H"},
}


def _band(ratio: float, b: float) -> str:
    if ratio <= 0:
        return "negative"
    if ratio <= b:
        return "R-band"
    if ratio <= 1:
        return "E-band"
    return "A-band"


class NoSymScan(NamedTuple):
    observed: dict  # band -> set of regimes (degenerate excluded)
    violations: list  # (spec, tau1, tau2, regime, band)
    counts: dict


def nosym_regime_scan(specs, beta1: float, beta2: float, tau1_grid, tau2_grid) -> NoSymScan:
    """Regimes observed over a tau1 x tau2 grid for each spec, grouped by E2/E1 band."""
    b = beta1 / beta2
    observed, counts, bad = {}, {}, []
    for spec in specs:
        band = _band(spec.E2 / spec.E1, b)
        for t1 in tau1_grid:
            for t2 in tau2_grid:
                th, _, _ = nosym_thermo(spec, CycleConfig(beta1, beta2, t1, t2), check=False)
                counts[(band, th.regime)] = counts.get((band, th.regime), 0) + 1
                if th.regime == "degenerate":
                    continue
                observed.setdefault(band, set()).add(th.regime)
                if th.regime not in ALLOWED_NOSYM_REGIMES[band]:
                    bad.append((spec, t1, t2, th.regime, band))
    return NoSymScan(observed, bad, counts)
