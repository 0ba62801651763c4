"""Heat flow of zero-mass data: the spectral order beta sets the L1 decay rate.

D^beta G(., 1) is the heat flow of D^beta delta at time 1, so its L1 norm
decays like t^(-beta/2); one more derivative adds another factor t^(-1/2).
A compactly supported datum with the same low-frequency behaviour approaches
the matching profile, and the scaled distance to it shrinks with time.
"""

import numpy as np

from zml import GridSpec, heat_semigroup, lp_norm, make_fractional_bump, self_similar_profile
from zml.analysis import fit_decay, profile_distance

grid = GridSpec(1, 200.0, 4096)
taus = np.geomspace(1.0, 100.0, 25)

print("fitted L1 decay exponents over t in [1, 100]")
for beta in (0.25, 0.5, 0.75):
    for gamma, label in ((0, "D^b G"), ((1,), "d_x D^b G")):
        u0 = self_similar_profile(grid, beta, gamma, 1.0)
        series = [(t, lp_norm(heat_semigroup(u0, t - 1.0), 1, refine=4)) for t in taus]
        fit = fit_decay(series, window=(1.0, 100.0))
        expected = -beta / 2 - (0.5 if gamma else 0.0)
        print(f"  beta={beta:<5} {label:<10} exponent {fit.exponent:+.4f}   predicted {expected:+.4f}")

datum = make_fractional_bump(grid, 0.5, 1.0, width=2.0, compact=True)
print("\nscaled L1 distance to the asymptotic profile, compact fractional bump")
for t in (1.0, 4.0, 16.0, 100.0):
    d = profile_distance(heat_semigroup(datum.field, t), t, datum.amplitude_A, 0.5)
    print(f"  t={t:<6} {d.value:.4e}")
