"""Two-site machine: numerics against the closed form, and its regimes.

Run with ``python3 demos/two_site_machine.py``.
"""
import numpy as np

from spinqtm.closedform import n2_f4, n2_thermo
from spinqtm.cycle import CycleConfig, assemble_limit_cycle
from spinqtm.spinchain import ChainSpec
from spinqtm.thermo import extract_ansatz, limit_cycle_thermo, predicted_regime

cfg = CycleConfig(beta1=0.5, beta2=1.0, tau1=0.8, tau2=1.3)

print(f"{'E2/E1':>6} {'Q_H':>12} {'Q_C':>12} {'W':>12} {'regime':>10} {'expected':>10} {'|dQ|':>9}")
for ratio in (-0.5, 0.25, 0.75, 1.5):
    spec = ChainSpec(2, [1.0, ratio], J=0.6, K=0.2, F=0.4)
    num = limit_cycle_thermo(assemble_limit_cycle(spec, cfg))
    ref = n2_thermo(spec, cfg)
    err = max(abs(num.Q_H_star - ref.Q_H_star), abs(num.Q_C_star - ref.Q_C_star))
    print(f"{ratio:6.2f} {num.Q_H_star:12.4e} {num.Q_C_star:12.4e} {num.W_star:12.4e} "
          f"{num.regime:>10} {predicted_regime(1.0, ratio, cfg.beta1, cfg.beta2):>10} {err:9.1e}")

# the efficiency of the engine point is fixed by the energy ratio alone
spec = ChainSpec(2, [1.0, 0.75], J=0.6, K=0.2, F=0.4)
th = limit_cycle_thermo(assemble_limit_cycle(spec, cfg))
print(f"\nengine efficiency {th.efficiency:.12f} (1 - E2/E1 = 0.25, Carnot {1 - cfg.beta1 / cfg.beta2})")

an = extract_ansatz(th, 1.0, 0.75, cfg.beta1, cfg.beta2)
print(f"g = {an.g_value:.6f}, f4 numerics = {an.f4_value:.12f}, closed form = {n2_f4(spec, cfg.tau1, cfg.tau2):.12f}")
