"""Two large-time comparisons in the balanced and supercritical ranges.

Stability: u and v start from A D^beta G(., 1) and from the same datum plus a
small dipole.  The weighted difference f(t) = t^w ||u - v||_q, with
w = (1/2)(1 - 1/q) + beta/2, decays like t^(-(1 - beta)/2) because a dipole
has spectral order 1; doubling the datum instead keeps f flat.

Linearization: ||u(t) - e^{t Delta} u0||_1 for small data decays like
t^(-1/2) for q = 3 and like t^(-1/2) log t at the borderline q = 2, where a
finite fit window reports a shallower slope.
"""

import numpy as np

from zml import (
    GridSpec,
    SimConfig,
    custom_datum,
    evolve,
    gauss_kernel,
    pair_evolve,
    partial_derivative,
    self_similar_profile,
)
from zml.analysis import fit_decay, linearization_distance

grid = GridSpec(1, 200.0, 2048)
A = 0.1
u0 = custom_datum(self_similar_profile(grid, 0.5, 0, 1.0) * A, 0.5, A)
dipole = custom_datum(partial_derivative(gauss_kernel(grid, 1.0), 1) * 0.01, 1.0)
cfg = SimConfig(grid, 5 / 3, 0.5, (1.0,), T=40.0, dt=0.02, t0=1.0)
times = np.array([1.0, 2.0, 4.0, 10.0, 20.0, 40.0])
for label, v0 in (("u0 + dipole", u0 + dipole), ("2 u0", u0.scaled(2.0))):
    res = pair_evolve(u0, v0, cfg, sample_times=times)
    print(f"{label:<12} f(t):", "  ".join(f"t={r.t:g}: {r.f_q:.4e}" for r in res.difference))

wide = GridSpec(1, 200.0, 4096)
datum = custom_datum(self_similar_profile(wide, 0.5, 0, 1.0) * A, 0.5, A)
samples = np.geomspace(1.0, 1000.0, 61)
for q in (2.0, 3.0):
    run = evolve(SimConfig(wide, q, 0.5, (1.0,), T=1000.0, dt=0.1, t0=1.0, waive_window=True), datum, sample_times=samples)
    dist = [(t, linearization_distance(s, datum, t, 1, t0=1.0)) for t, s in zip(samples[1:], run.snapshots[1:])]
    for window in ((10.0, 100.0), (100.0, 1000.0)):
        print(f"q={q:g} window {window}: exponent {fit_decay(dist, window=window).exponent:+.4f}")
