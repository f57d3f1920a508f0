"""
Where merge time goes
=====================

Budget maintenance splits into solving for h (section A) and everything
else: kernel rows, bookkeeping, the update itself (section B). Swapping the
solver only changes section A.
"""

from budgetsvm.bench import bench, generate_synthetic
from budgetsvm.trainer import Hyperparams

data = generate_synthetic(10_000, dim=5, seed=1)
hp = Hyperparams(C=32, gamma=0.125, budget=100, epochs=2, seed=1)
doc = bench(data, hp, ("gss", "lookup-h", "lookup-wd"), micro_n=200_000)

print(f"{'solver':10s} {'total':>7s} {'merge':>7s} {'A':>7s} {'B':>7s} {'ns/solve':>9s}")
for row in doc["solvers"]:
    print(f"{row['solver']:10s} {row['time_total']:7.2f} {row['time_merge_total']:7.2f} "
          f"{row['time_section_A']:7.2f} {row['time_section_B']:7.2f} {row['micro_ns_per_solve']:9.0f}")

# Section B hardly changes between solvers; the saving is all in section A.
