"""
Training under a budget
=======================

Two Gaussian blobs, 10 000 points, at most 100 support vectors.
"""

from budgetsvm import Hyperparams, evaluate, train
from budgetsvm.bench import generate_synthetic

train_set = generate_synthetic(10_000, dim=5, seed=1)
test_set = generate_synthetic(10_000, dim=5, seed=2)

hp = Hyperparams(C=32, gamma=0.125, budget=100, epochs=5, solver="lookup-wd", seed=1)
model, stats = train(train_set, hp)

print(f"support vectors  {len(model)}")
print(f"test accuracy    {evaluate(model, test_set):.4f}")
print(f"margin violations {stats.margin_violations} of {stats.sgd_iterations} steps")
print(f"merges {stats.merge_events}  (frequency {stats.merging_frequency:.3%})")

# With no budget pressure the same run keeps every violator.
loose = Hyperparams(C=32, gamma=0.125, budget=100_000, epochs=1, seed=1)
model_full, _ = train(train_set, loose)
print(f"\nunbudgeted, 1 epoch: {len(model_full)} support vectors, accuracy {evaluate(model_full, test_set):.4f}")
