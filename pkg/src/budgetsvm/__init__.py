"""Budgeted SGD training of Gaussian-kernel SVMs with lookup-table merging."""

from .kernel import KernelParams, kappa_power, rbf
from .lookup import (LookupGrid, LookupHSolver, LookupWDSolver, bilerp, build_grid, load_grid, save_grid,
                     solve_merge_lookup_h, solve_merge_lookup_wd)
from .merge import (GssSolver, MergeInstance, MergeSolution, gss_maximize, merged_alpha, objective_s,
                    solve_merge_gss, wd_direct_oracle, wd_normalized)
from .sparse import Dataset, Example, SparseVector, load_dataset, parse_libsvm_record, squared_distance
from .trainer import (BudgetModel, Hyperparams, TrainStats, budget_maintain, decision_function, evaluate,
                      load_model, make_solver, save_model, sgd_step, train)

__version__ = "0.1.0"
