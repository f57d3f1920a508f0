"""
Merging two support vectors
===========================

Two same-sign support vectors are replaced by one point on the segment
between them. How much of the model is lost depends only on the weight
share ``m`` and the kernel value ``kappa`` between the pair.
"""

import numpy as np

from budgetsvm import MergeInstance, objective_s, solve_merge_gss, wd_normalized

# For a close pair the objective has one hump and the best point sits
# between the two vectors, nearer the heavier one.
for m in (0.2, 0.5, 0.8):
    sol = solve_merge_gss(MergeInstance(m, 0.7), 1e-10)
    print(f"kappa=0.7  m={m:.1f}  h*={sol.h:.4f}  wd={sol.wd_norm:.5f}")

# Far apart, the hump splits in two. The merged point hugs one of the
# originals instead of landing in the empty middle.
hs = np.linspace(0, 1, 11)
print("\nkappa=0.05, m=0.5:")
print("  h  ", " ".join(f"{h:5.1f}" for h in hs))
print("  s  ", " ".join(f"{v:5.3f}" for v in objective_s(0.5, 0.05, hs)))

# Nudging m across 1/2 flips the merged point to the other end, yet the
# loss barely moves.
for m in (0.499, 0.501):
    sol = solve_merge_gss(MergeInstance(m, 0.05), 1e-10)
    print(f"m={m}: h*={sol.h:.4f}  wd={sol.wd_norm:.6f}")

# The split happens where s''(1/2) changes sign, at kappa = e^-2.
for kappa in (0.10, np.exp(-2), 0.17):
    mid = objective_s(0.5, kappa, 0.5)
    side = objective_s(0.5, kappa, 0.45)
    print(f"kappa={kappa:.4f}: centre {'max' if mid >= side else 'min'}, wd(1/2)={wd_normalized(0.5, kappa, 0.5):.5f}")
