"""Is the time factor f independent of the bath temperatures?

For chains without the Ising term (F = 0) the extracted f agrees across
temperature pairs to rounding. Switching F on breaks that; this script prints
both cases for the same random chain.
"""
import numpy as np

from spinqtm.cycle import CycleConfig, assemble_limit_cycle
from spinqtm.spinchain import random_chain_spec
from spinqtm.thermo import extract_ansatz, limit_cycle_thermo

rng = np.random.default_rng(7)
spec = random_chain_spec(rng, 4, -2, 2)
pairs = [(0.2, 0.9), (0.5, 2.0), (1.0, 1.5), (0.1, 3.0), (0.7, 0.8)]
taus = (1.1, 2.3)

for label, s in (("F = 0", spec.replace(F=0.0)), ("F != 0", spec)):
    fs = []
    for b1, b2 in pairs:
        th = limit_cycle_thermo(assemble_limit_cycle(s, CycleConfig(b1, b2, *taus)))
        fs.append(extract_ansatz(th, s.E1, s.EN, b1, b2).f4_value)
    fs = np.array(fs)
    print(f"{label:>7}: f = {np.array2string(fs, precision=10)}  relative spread {np.ptp(fs) / abs(fs).max():.2e}")
