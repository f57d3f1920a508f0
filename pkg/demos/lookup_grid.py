"""
A lookup table for merge decisions
==================================

Golden section search runs a dozen kernel evaluations per candidate. Since
the merge problem has only two inputs, all answers can be tabulated once and
interpolated afterwards.
"""

import time

import numpy as np

from budgetsvm import GssSolver, LookupHSolver, LookupWDSolver, build_grid

t0 = time.perf_counter()
grid = build_grid(400, 1e-10)
print(f"400 x 400 grid in {time.perf_counter() - t0:.2f} s")

# Random instances in the smooth regime, compared against precise search.
rng = np.random.default_rng(0)
m = rng.random(50_000)
kappa = rng.uniform(np.exp(-2), 1, 50_000)
_, exact = GssSolver(1e-10).solve_batch(m, kappa)
_, via_wd = LookupWDSolver(grid).solve_batch(m, kappa)
_, via_h = LookupHSolver(grid).solve_batch(m, kappa)
_, coarse = GssSolver(0.01).solve_batch(m, kappa)

print(f"lookup-wd  max abs error {np.max(np.abs(via_wd - exact)):.1e}")
ok = exact > 1e-14
for name, wd in (("lookup-h", via_h), ("gss 0.01", coarse)):
    print(f"{name:9s}  mean WD / optimal WD = {np.mean(wd[ok] / exact[ok]):.6f}")

# Coarse search loses most on lopsided pairs (m near 0 or 1). The best h
# then sits at the very end of the segment and costs almost nothing, but the
# search stops up to eps/2 short of it.
edge = ok & ((m < 0.01) | (m > 0.99))
print(f"gss 0.01, lopsided pairs: mean ratio {np.mean(coarse[edge] / exact[edge]):.0f}")
print(f"gss 0.01, the rest:       mean ratio {np.mean(coarse[ok & ~edge] / exact[ok & ~edge]):.4f}")
