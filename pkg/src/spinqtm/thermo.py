"""Limit-cycle energetics, operating regimes and the (g, f) decomposition.

Sign convention: Q_H and Q_C are the heats released *into* the hot and cold
baths, W is the work extracted from the machine, so Q_H + Q_C + W = 0 at the
limit cycle and beta1 Q_H + beta2 Q_C >= 0.

Regimes (sign patterns of Q_H, Q_C, W):
    E engine        (-, +, +)
    R refrigerator  (+, -, -)
    A accelerator   (-, +, -)
    H heater        (+, +, -)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .cycle import LimitCycle, _model, site_roles
from .quantumstate import partial_trace
from .spinchain import gibbs_populations

__all__ = [
    "ENGINE",
    "REFRIGERATOR",
    "ACCELERATOR",
    "HEATER",
    "DEGENERATE",
    "RegimeError",
    "CycleThermo",
    "AnsatzDecomposition",
    "zero_tolerance",
    "limit_cycle_thermo",
    "thermo_from_heats",
    "predicted_regime",
    "classify_regime",
    "heat_symmetry_residual",
    "g_function",
    "extract_ansatz",
]

ENGINE, REFRIGERATOR, ACCELERATOR, HEATER, DEGENERATE = "E", "R", "A", "H", "degenerate"

_PATTERNS = {
    (-1, 1, 1): ENGINE,
    (1, -1, -1): REFRIGERATOR,
    (-1, 1, -1): ACCELERATOR,
    (1, 1, -1): HEATER,
}


class RegimeError(ValueError):
    """Sign pattern forbidden by the first and second law."""


@dataclass(frozen=True)
class CycleThermo:
    Q_H_star: float
    Q_C_star: float
    W_star: float
    clausius_star: float
    regime: str
    efficiency: float | None = None
    cop: float | None = None
    work_audit: float | None = None  # W from the quench works, when available


@dataclass(frozen=True)
class AnsatzDecomposition:
    g_value: float
    f4_value: float
    valid: bool
    cross_check: float | None = None  # |f from Q_C - f from Q_H|


def zero_tolerance(E1: float, EN: float) -> float:
    """Heats below this magnitude are treated as exact zeros."""
    return 1e-9 * max(abs(E1), abs(EN))


def _mean_up(rho) -> float:
    # <S^Z> of a single-site state
    return float((rho.matrix[0, 0] - rho.matrix[1, 1]).real) / 2


def limit_cycle_thermo(lc: LimitCycle, spec=None, config=None, zero_tol: float | None = None) -> CycleThermo:
    """Heats, work, Clausius sum and regime at the limit cycle."""
    spec = lc.spec if spec is None else spec
    config = lc.config if config is None else config
    model = _model(spec)
    N = model.N
    rho_A = partial_trace(lc.rho_ACB_star, (1,))
    rho_B = partial_trace(lc.rho_ACB_tilde_star, (N,))
    sA = gibbs_populations(model.E1, config.beta1)
    sB = gibbs_populations(model.EN, config.beta2)
    Q_H = model.E1 * (_mean_up(rho_A) - (sA[0] - sA[1]) / 2)
    Q_C = model.EN * (_mean_up(rho_B) - (sB[0] - sB[1]) / 2)
    # quench works evaluated on the corner states
    roles = site_roles(N)
    from .quantumstate import tensor
    from .cycle import _gibbs_state

    def ex(op, rho):
        return float(np.einsum("ij,ji->", op, rho.matrix).real)

    gA = _gibbs_state(model.E1, config.beta1, 1)
    gB = _gibbs_state(model.EN, config.beta2, N)
    W_audit = (
        ex(model.H_AC, lc.rho_ACB_star)
        - ex(model.H_AC, tensor(gA, lc.rho_CB_star))
        + ex(model.H_CB, lc.rho_ACB_tilde_star)
        - ex(model.H_CB, tensor(partial_trace(lc.rho_ACB_tilde_star, roles["AC"]), gB))
    )
    tol = zero_tolerance(model.E1, model.EN) if zero_tol is None else zero_tol
    return thermo_from_heats(Q_H, Q_C, config.beta1, config.beta2, tol, work_audit=W_audit)


def thermo_from_heats(Q_H: float, Q_C: float, beta1: float, beta2: float, zero_tol: float,
                      work_audit: float | None = None) -> CycleThermo:
    """Assemble a :class:`CycleThermo` from the two heats.

    Regime labels refer to the hotter bath; when beta1 > beta2 bath 2 plays
    that role and the heats are swapped before classification.
    """
    W = -(Q_H + Q_C)
    clausius = _clausius(beta1, Q_H, beta2, Q_C)
    q_hot, q_cold = (Q_C, Q_H) if beta1 > beta2 else (Q_H, Q_C)
    regime = classify_regime(q_hot, q_cold, W, zero_tol)
    eff = W / -q_hot if regime == ENGINE else None
    cop = -q_cold / -W if regime == REFRIGERATOR else None
    return CycleThermo(Q_H, Q_C, W, clausius, regime, eff, cop, work_audit)


def _clausius(b1, q1, b2, q2):
    def term(b, q):
        if np.isinf(b):
            return 0.0 if q == 0 else np.sign(q) * np.inf
        return b * q
    return term(b1, q1) + term(b2, q2)


def predicted_regime(E1: float, EN: float, beta1: float, beta2: float) -> str:
    """Regime expected from the energy ratio alone (magnetization-preserving chains).

    H for E_N/E_1 < 0, R for 0 < ratio < beta1/beta2, E for
    beta1/beta2 < ratio < 1, A for ratio > 1; boundaries are degenerate.
    """
    if E1 == 0:
        raise ValueError("E1 = 0 leaves the energy ratio undefined")
    if beta1 > beta2:
        raise ValueError("predicted regimes assume beta1 <= beta2 (bath 1 is the hot one)")
    r = EN / E1
    b = 0.0 if np.isinf(beta2) else (np.inf if beta2 == 0 else beta1 / beta2)
    if r < 0:
        return HEATER
    if r == 0 or r == b or r == 1:
        return DEGENERATE
    if r < b:
        return REFRIGERATOR
    if r < 1:
        return ENGINE
    return ACCELERATOR


def classify_regime(Q_H: float, Q_C: float, W: float, zero_tol: float) -> str:
    """Regime label from measured signs; ``degenerate`` if any is within ``zero_tol`` of 0."""
    if min(abs(Q_H), abs(Q_C), abs(W)) <= zero_tol:
        return DEGENERATE
    key = (int(np.sign(Q_H)), int(np.sign(Q_C)), int(np.sign(W)))
    try:
        return _PATTERNS[key]
    except KeyError:
        raise RegimeError(f"sign pattern {key} of (Q_H, Q_C, W) = ({Q_H:.3e}, {Q_C:.3e}, {W:.3e}) "
                          "violates the first or second law") from None


def heat_symmetry_residual(thermo: CycleThermo, E1: float, EN: float) -> float:
    """|Q_H/E1 + Q_C/EN|, which vanishes for magnetization-preserving chains."""
    if E1 == 0 or EN == 0:
        raise ValueError("heat symmetry residual needs nonzero end energies")
    return abs(thermo.Q_H_star / E1 + thermo.Q_C_star / EN)


def g_function(E1: float, EN: float, beta1: float, beta2: float) -> float:
    """(e^{b2 EN} - e^{b1 E1}) / ((e^{b2 EN} + 1)(e^{b1 E1} + 1)).

    Evaluated as expit(b2 EN) - expit(b1 E1), which is the same quantity
    without overflow.
    """
    def arg(b, E):
        if np.isinf(b):
            return np.sign(E) * np.inf
        return b * E
    return float(expit(arg(beta2, EN)) - expit(arg(beta1, E1)))


def extract_ansatz(thermo: CycleThermo, E1: float, EN: float, beta1: float, beta2: float,
                   floor: float = 1e-12) -> AnsatzDecomposition:
    """Split the heats as Q_C = g f E_N, Q_H = -g f E_1.

    f is taken from whichever heat has the larger end energy and the other
    one is reported as a cross-check.
    """
    g = g_function(E1, EN, beta1, beta2)
    if abs(g) < floor:
        return AnsatzDecomposition(g, float("nan"), False)
    fC = thermo.Q_C_star / (g * EN) if EN != 0 else None
    fH = thermo.Q_H_star / (-g * E1) if E1 != 0 else None
    if fC is None and fH is None:
        return AnsatzDecomposition(g, float("nan"), False)
    f = fC if (fH is None or (fC is not None and abs(EN) >= abs(E1))) else fH
    cross = abs(fC - fH) if (fC is not None and fH is not None) else None
    return AnsatzDecomposition(g, float(f), True, cross)
