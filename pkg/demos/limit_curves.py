"""
Crossover distributions across the relaxation scale.

Prints F1 and F2 (gamma = 0) for a few values of tau next to the reference
laws they approach: Tracy-Widom at small tau, a Gaussian at large tau.
"""

import numpy as np

from ringtasep.limit_dist import F1, F2, GAUSSIAN_SCALE, reference_curve

x = np.linspace(-3.0, 3.0, 7)

print('F1(tau^(1/3) x; tau) against F_GOE(2^(2/3) x)')
goe = reference_curve('goe', x)
for tau in (0.1, 0.5, 1.0):
    # tau = 0.1 is only well conditioned away from the left tail
    xs = x[x >= -1.0] if tau < 0.5 else x
    c = F1(tau ** (1 / 3) * xs, tau)
    print(f'  tau={tau:<4}', ' '.join(f'{v:.4f}' for v in c.value))
print('  GOE     ', ' '.join(f'{v:.4f}' for v in goe))

# the dependence on gamma fades as tau grows; at tau=1 it is about 1e-6
print('\nF2 at tau=0.2 for several gamma (even and 1-periodic in gamma)')
for g in (0.0, 0.25, 0.5, 0.75):
    c = F2(x, 0.2, g)
    print(f'  gamma={g:<4}', ' '.join(f'{v:.4f}' for v in c.value))

print('\nF1 at large tau in Gaussian units, against Phi(x)')
tau = 4.0
xg = x[1:]  # the far left point is cancellation-limited at this tau
c = F1(-tau + GAUSSIAN_SCALE * tau ** 0.5 * xg, tau)
print('  F1      ', ' '.join(f'{v:.4f}' for v in c.value))
print('  Phi     ', ' '.join(f'{v:.4f}' for v in reference_curve('gaussian', xg)))
