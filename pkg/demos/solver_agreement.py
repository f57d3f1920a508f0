"""
Do the solvers pick the same partner?
=====================================

Train with coarse golden section search and, at every merge, replay the
candidate set through the lookup solver. Both are scored against the
smallest loss precise search can find on that candidate set.
"""

from budgetsvm.bench import compare_solvers, generate_synthetic
from budgetsvm.trainer import Hyperparams

data = generate_synthetic(10_000, dim=5, seed=1)
hp = Hyperparams(C=32, gamma=0.125, budget=100, epochs=5, solver="gss", seed=1)

report, trainer = compare_solvers(data, hp, "gss", "lookup-wd", keep_events=True)
print(f"merges            {report.merge_events}")
print(f"same partner      {report.agreement_rate:.2%}")
print(f"mean factor gss   {report.mean_factor_solver_a:.6f}")
print(f"mean factor table {report.mean_factor_solver_b:.10f}")

# Disagreements are near ties: the two partners cost almost the same.
split = [e for e in report.events if e["partner_a"] != e["partner_b"]]
for e in split[:5]:
    print(f"  partners {e['partner_a']:3d} vs {e['partner_b']:3d}: wd {e['wd_a']:.3e} vs {e['wd_b']:.3e}")
