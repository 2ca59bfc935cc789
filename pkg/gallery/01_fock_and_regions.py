"""Truncated Fock space and the wedge-shaped heterodyne regions.

Builds the eight region operators with and without radial postselection,
checks that they tile the plane, and compares one matrix element with a
direct quadrature.
"""

import numpy as np

from cvqkd_psk import fock, oracle
from cvqkd_psk.protocol import ProtocolConfig, build_region_operators

v = fock.coherent_state(0.9, 10)
print("coherent state norm at N_c = 10:", np.vdot(v, v).real)

for dr in (0.0, 0.5):
    cfg = ProtocolConfig(n_cutoff=6, delta_r=dr)
    R = build_region_operators(cfg)
    total = sum(R)
    print(f"delta_r = {dr}: sum of regions, vacuum entry = {total[0, 0].real:.6f}")
    num = oracle.numeric_region_operator(0, cfg, 6)
    print("  largest gap to quadrature:", np.abs(R[0] - num).max())

cfg = ProtocolConfig(n_cutoff=6)
print("<0|R_0|1> =", build_region_operators(cfg)[0][0, 1].real)
