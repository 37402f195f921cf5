"""Low-temperature time factor f_2(tau) of a long chain.

A single excitation enters at site 1 and is either reabsorbed there or
leaves at site N; f_2 is the probability of the latter. The single-excitation
sector makes N = 1000 cheap. Prints a coarse table; the full Fig. 3 grid is
``spinqtm figure fig3``.
"""
import time

import numpy as np

from spinqtm.lowtemp import conservation_defect, f2_lowtemp
from spinqtm.spinchain import ChainSpec

N = 1000
spec = ChainSpec(N, np.linspace(1, 2, N), J=1.0)

t0 = time.perf_counter()
for tau in np.linspace(0, 50, 11):
    r = f2_lowtemp(spec, tau)
    print(f"tau {tau:5.1f}  f2 {r.f2:.6f}  absorbed at A {r.absorbed_A:.6f}  "
          f"conservation {conservation_defect(spec, tau):.1e}  [{r.method}]")
print(f"{time.perf_counter() - t0:.1f} s")
