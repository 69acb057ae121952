"""
The exact flat-start law approaching F1 as the ring grows.

At fixed tau the tagged-particle fluctuations are rescaled by L^(1/2) and
compared with F1(tau^(1/3) x; tau).  The sup distance shrinks roughly
like 1/L.
"""

import numpy as np

from ringtasep.harness.sweep import converge_sweep

xs = np.arange(-3.0, 3.0 + 1e-9, 0.5)
for row in converge_sweep('flat', [50, 100, 400], tau=1.0, xs=xs):
    print(f'L={row.L:5d}  sup distance {row.sup_distance:.5f}')
