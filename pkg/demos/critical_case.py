"""The balanced exponent q* = 1 + 1/(n + beta).

Small data: the Duhamel map is a contraction (ratios well below 1) and its
fixed point agrees with the time stepper.  Large data leave the contraction
ball.  A small critical run started from A D^beta G(., 1) collapses onto a
self-similar profile u(x, t) = t^(-(n+beta)/2) U(x / sqrt t).
"""

import numpy as np

from zml import GridSpec, SimConfig, custom_datum, evolve, lp_norm, picard_iterate, self_similar_profile
from zml.analysis import scaling_collapse
from zml.errors import NoContraction

grid = GridSpec(1, 64.0, 1024)
cfg = SimConfig(grid, 5 / 3, 0.5, (6.0,), T=16.0, dt=0.01)
u0 = self_similar_profile(grid, 0.5, 0, 1.0) * 0.01
rep = picard_iterate(u0, cfg)
print("contraction ratios:", " ".join(f"{r:.4f}" for r in rep.contraction_ratios))
ev = evolve(cfg, u0, sample_times=[0.0, 1.0]).snapshot_at(1.0)
print(f"Picard vs time stepper at t=1: {lp_norm(rep.solution_at(1.0) - ev, 1) / lp_norm(ev, 1):.2e} relative L1")
try:
    picard_iterate(u0 * 100.0, cfg)
    print("x100 datum: contraction (unexpected)")
except NoContraction as exc:
    print(f"x100 datum: NoContraction ({exc})")

wide = GridSpec(1, 200.0, 4096)
A = 0.1
datum = custom_datum(self_similar_profile(wide, 0.5, 0, 1.0) * A, 0.5, A)
run = evolve(SimConfig(wide, 5 / 3, 0.5, (1.0,), T=64.0, dt=0.02, t0=1.0), datum, sample_times=[1.0, 4.0, 16.0, 64.0])
for t1 in (1.0, 4.0, 16.0):
    d = scaling_collapse(run.snapshot_at(t1), run.snapshot_at(4 * t1), t1, 4 * t1, 0.5, lam=2.0)
    print(f"collapse distance t={t1:<5} vs {4 * t1:<5} {d:.4f}")
