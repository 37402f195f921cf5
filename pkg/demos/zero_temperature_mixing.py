"""Zero-temperature channel: excitations drain unless an eigenvector hides from the baths.

Connected chain: the survival probabilities P_n decay to zero.
Chain with both end bonds cut: the interior segment keeps its excitations,
and the factorized-eigenvector test finds the witness.
"""
import numpy as np

from spinqtm.cycle import CycleConfig, spectral_gap
from spinqtm.mixing import factorized_eigenvector_test, survival_profile, zero_temperature_channel
from spinqtm.quantumstate import DensityMatrix
from spinqtm.spinchain import ChainSpec, build_hamiltonian

cfg = CycleConfig(0.7, 1.9, 1.3, 0.7)
specs = {
    "connected": ChainSpec(4, [1.0, 0.7, 1.3, 1.1], [1.0, 0.5, 0.8], 0.0, 0.3),
    "end bonds cut": ChainSpec(4, [1.0, 1.3, 0.8, 1.5], [0.0, 1.0, 0.0], 0.0, 0.2),
}
rho0 = np.zeros((8, 8), complex)
rho0[0, 0] = 1  # C and B fully excited

for name, spec in specs.items():
    rep = factorized_eigenvector_test(build_hamiltonian(spec))
    gap = spectral_gap(zero_temperature_channel(spec, cfg))
    prof = survival_profile(spec, cfg, DensityMatrix(rho0, (2, 3, 4)), 200)
    print(f"{name}: witness found {rep.found}, zero-T gap {gap:.3e}")
    for m in (0, 10, 50, 200):
        print(f"   m={m:3d}  P_1..P_3 = {np.array2string(prof.P[1:, m], precision=4)}")
