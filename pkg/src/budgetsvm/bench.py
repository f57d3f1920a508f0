"""Synthetic data, solver comparison and timing harnesses."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .merge import PRECISE_EPS, GssSolver, wd_normalized
from .sparse import Dataset, Example, SparseVector
from .trainer import Hyperparams, MergeRecord, Trainer, TrainStats, make_solver

# events whose optimal normalized WD is at or below this are excluded from
# factor means (coincident points: achieved and optimal WD are both rounding noise)
FACTOR_FLOOR = 1e-14


def generate_synthetic(n: int, dim: int = 5, separation: float = 4.0, noise: float = 1.0,
                       seed: int = 0) -> Dataset:
    """Two isotropic Gaussian clusters centred at +-(separation/2) e_1, balanced labels."""
    if n < 2:
        raise ValueError(f"need at least 2 points, got {n}")
    if dim < 1:
        raise ValueError(f"dimension must be at least 1, got {dim}")
    if noise < 0 or separation < 0:
        raise ValueError("separation and noise must be non-negative")
    rng = np.random.default_rng(seed)
    labels = np.array([1] * (n - n // 2) + [-1] * (n // 2))
    labels = labels[rng.permutation(n)]
    X = noise * rng.standard_normal((n, dim))
    X[:, 0] += labels * (separation / 2.0)
    examples = [Example(SparseVector.from_dense(x), int(y)) for x, y in zip(X, labels)]
    return Dataset(examples, dimension=dim)


@dataclass
class CompareReport:
    merge_events: int
    agreement_rate: float
    mean_factor_solver_a: float
    mean_factor_solver_b: float
    solver_a: str
    solver_b: str
    factor_events: int
    total_wd_ratio_solver_a: float
    total_wd_ratio_solver_b: float
    factor_aggregation: str = "arithmetic mean of achieved WD / GSS-precise minimal WD per event"
    events: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


class DecisionComparer:
    """Merge observer replaying every candidate set through a second solver.

    For each event it records whether the comparison solver picks the same
    partner as the driving solver, and each solver's achieved WD relative to
    the minimal WD found by high-precision GSS on the same candidates.
    """

    def __init__(self, solver_b, stats: TrainStats | None = None, keep_events: bool = False,
                 precise_eps: float = PRECISE_EPS):
        self.solver_b = solver_b
        self.precise = GssSolver(precise_eps, name="gss-precise")
        self.stats = stats if stats is not None else TrainStats()
        self.keep_events = keep_events
        self.events: list[dict] = []
        self.factor_events = 0
        self.wd_sum_a = self.wd_sum_b = self.wd_sum_precise = 0.0

    def _achieved(self, solver, rec: MergeRecord, idx: int, h_arr) -> float:
        m, k = float(rec.cand_m[idx]), float(rec.cand_kappa[idx])
        h = float(h_arr[idx]) if h_arr is not None else solver.solve_h(m, k)
        return float(rec.cand_weight[idx]) * wd_normalized(m, k, h)

    def __call__(self, rec: MergeRecord) -> None:
        w = rec.cand_weight
        _, wd_p = self.precise.solve_batch(rec.cand_m, rec.cand_kappa)
        wd_min = float(np.min(w * wd_p))
        h_b, wd_b = self.solver_b.solve_batch(rec.cand_m, rec.cand_kappa)
        best_b = int(np.argmin(w * wd_b))
        achieved_a = rec.wd
        achieved_b = self._achieved(self.solver_b, rec, best_b, h_b)
        st = self.stats
        st.agreement_events += 1
        st.agreement_matches += int(best_b == rec.best)
        self.wd_sum_a += achieved_a
        self.wd_sum_b += achieved_b
        self.wd_sum_precise += wd_min
        scale = float(w[int(np.argmin(w * wd_p))])
        counted = wd_min > FACTOR_FLOOR * scale
        if counted:
            self.factor_events += 1
            st.wd_factor_sum_solver += achieved_a / wd_min
            st.wd_factor_sum_precise_baseline += achieved_b / wd_min
        if self.keep_events:
            self.events.append({
                "partner_a": int(rec.candidates[rec.best]), "partner_b": int(rec.candidates[best_b]),
                "wd_a": achieved_a, "wd_b": achieved_b, "wd_precise": wd_min, "factor_counted": counted,
            })

    def report(self, name_a: str, name_b: str) -> CompareReport:
        st = self.stats
        n = st.agreement_events
        f = self.factor_events
        return CompareReport(
            merge_events=n,
            agreement_rate=st.agreement_matches / n if n else 1.0,
            mean_factor_solver_a=st.wd_factor_sum_solver / f if f else 1.0,
            mean_factor_solver_b=st.wd_factor_sum_precise_baseline / f if f else 1.0,
            solver_a=name_a, solver_b=name_b, factor_events=f,
            total_wd_ratio_solver_a=self.wd_sum_a / self.wd_sum_precise if self.wd_sum_precise else 1.0,
            total_wd_ratio_solver_b=self.wd_sum_b / self.wd_sum_precise if self.wd_sum_precise else 1.0,
            events=self.events,
        )


def compare_solvers(data: Dataset, hp: Hyperparams, solver_a: str, solver_b: str, *,
                    grid=None, grid_file=None, keep_events: bool = False):
    """Train with ``solver_a`` while shadow-evaluating ``solver_b`` at every merge."""
    kw = dict(gss_eps=hp.gss_eps, precise_eps=hp.precise_eps, grid=grid,
              grid_size=hp.grid_size, grid_file=grid_file)
    sa, sb = make_solver(solver_a, **kw), make_solver(solver_b, **kw)
    comparer = DecisionComparer(sb, keep_events=keep_events, precise_eps=hp.precise_eps)
    trainer = Trainer(hp, len(data), data.dimension, solver=sa, observer=comparer)
    comparer.stats = trainer.stats
    trainer.fit(data.to_dense(), data.labels)
    return comparer.report(solver_a, solver_b), trainer


def microbenchmark(solver, n: int = 1_000_000, seed: int = 0) -> float:
    """Mean nanoseconds per scalar ``solver.solve`` on uniform random (m, kappa)."""
    rng = np.random.default_rng(seed)
    ms = rng.random(n).tolist()
    ks = (1.0 - rng.random(n)).tolist()  # (0, 1]
    solve = solver.solve
    t0 = time.perf_counter_ns()
    for m, k in zip(ms, ks):
        solve(m, k)
    return (time.perf_counter_ns() - t0) / n


@dataclass
class SolverTiming:
    solver: str
    repeats: int
    time_total: float
    time_merge_total: float
    time_section_A: float
    time_section_B: float
    merging_frequency: float
    merge_events: int
    micro_ns_per_solve: float | None = None


def bench(data: Dataset, hp: Hyperparams, solvers=("gss", "lookup-h", "lookup-wd"), repeats: int = 1,
          micro_n: int = 1_000_000, grid=None, grid_file=None) -> dict:
    """Full training runs per solver (times averaged over repeats) plus a per-solve microbenchmark."""
    rows = []
    for kind in solvers:
        solver = make_solver(kind, gss_eps=hp.gss_eps, precise_eps=hp.precise_eps, grid=grid,
                             grid_size=hp.grid_size, grid_file=grid_file)
        acc = TrainStats()
        for _ in range(repeats):
            tr = Trainer(hp, len(data), data.dimension, solver=solver)
            tr.fit(data.to_dense(), data.labels)
            s = tr.stats
            acc.time_total += s.time_total
            acc.time_merge_total += s.time_merge_total
            acc.time_section_A += s.time_section_A
            acc.time_section_B += s.time_section_B
        rows.append(SolverTiming(
            kind, repeats, acc.time_total / repeats, acc.time_merge_total / repeats,
            acc.time_section_A / repeats, acc.time_section_B / repeats,
            s.merging_frequency, s.merge_events,
            microbenchmark(solver, micro_n) if micro_n > 0 else None,
        ))
    return {"solvers": [asdict(r) for r in rows]}
