"""Budgeted stochastic gradient descent (BSGD) for Gaussian-kernel SVMs.

The model ``w = scale * sum_k alpha_k phi(x_k)`` is kept as a dense matrix of
support vectors plus stored coefficients; the uniform shrink applied by every
SGD step touches only ``scale``. Whenever an insertion pushes the model to
``B + 1`` entries, the entry with the smallest ``|alpha|`` is merged with the
same-sign partner whose merge loses the least weight.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .kernel import KernelParams, rbf_rows
from .lookup import DEFAULT_GRID_SIZE, LookupGrid, LookupHSolver, LookupWDSolver, build_grid, load_grid
from .merge import PRECISE_EPS, STANDARD_EPS, GssSolver, merged_alpha, wd_normalized
from .sparse import Dataset, SparseVector

SOLVER_KINDS = ("gss", "gss-precise", "lookup-h", "lookup-wd")

# stored coefficients absorb the scale once it drops below this
SCALE_FLOOR = 1e-8
# |alpha| values this close (relative) count as tied; the oldest entry wins
TIE_RTOL = 1e-12


@dataclass
class Hyperparams:
    C: float = 1.0
    gamma: float = 1.0
    budget: int = 100
    epochs: int = 20
    solver: str = "lookup-wd"
    gss_eps: float = STANDARD_EPS
    precise_eps: float = PRECISE_EPS
    grid_size: int = DEFAULT_GRID_SIZE
    use_bias: bool = False
    seed: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        KernelParams(self.gamma)
        if self.budget < 2:
            raise ValueError(f"budget must be at least 2, got {self.budget}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        if self.solver not in SOLVER_KINDS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {SOLVER_KINDS}")
        if not (self.gss_eps > 0 and self.precise_eps > 0):
            raise ValueError("GSS precisions must be positive")
        if self.grid_size < 2:
            raise ValueError(f"grid size must be at least 2, got {self.grid_size}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def lam(self, n: int) -> float:
        """Regularization strength lambda = 1 / (n C)."""
        return 1.0 / (n * self.C)


@lru_cache(maxsize=4)
def default_grid(G: int = DEFAULT_GRID_SIZE, eps: float = PRECISE_EPS) -> LookupGrid:
    return build_grid(G, eps)


def make_solver(kind: str, *, gss_eps: float = STANDARD_EPS, precise_eps: float = PRECISE_EPS,
                grid: LookupGrid | None = None, grid_size: int = DEFAULT_GRID_SIZE,
                grid_file: str | Path | None = None):
    if kind == "gss":
        return GssSolver(gss_eps, name="gss")
    if kind == "gss-precise":
        return GssSolver(precise_eps, name="gss-precise")
    if kind in ("lookup-h", "lookup-wd"):
        if grid is None:
            grid = load_grid(grid_file) if grid_file else default_grid(grid_size, precise_eps)
        return LookupHSolver(grid) if kind == "lookup-h" else LookupWDSolver(grid)
    raise ValueError(f"unknown solver {kind!r}; choose from {SOLVER_KINDS}")


class BudgetModel:
    """Support-vector expansion with a global coefficient scale."""

    def __init__(self, dim: int, gamma: float, budget: int | None = None, capacity: int = 16):
        self.kernel = KernelParams(gamma)
        self.dim = dim
        self.budget = budget
        cap = max(capacity, (budget or 0) + 1)
        self._sv = np.zeros((cap, dim))
        self._alpha = np.zeros(cap)
        self.size = 0
        self.scale = 1.0
        self.bias = 0.0

    def __len__(self) -> int:
        return self.size

    @property
    def gamma(self) -> float:
        return self.kernel.gamma

    @property
    def alphas(self) -> np.ndarray:
        """Stored coefficients (multiply by ``scale`` for effective ones)."""
        return self._alpha[: self.size]

    @property
    def support_vectors(self) -> np.ndarray:
        return self._sv[: self.size]

    def effective_alphas(self) -> np.ndarray:
        return self.scale * self._alpha[: self.size]

    @property
    def entries(self) -> list[tuple[float, SparseVector]]:
        return [(float(a), SparseVector.from_dense(x))
                for a, x in zip(self.alphas, self.support_vectors)]

    def append(self, alpha_stored: float, x: np.ndarray) -> None:
        if self.size == len(self._alpha):
            cap = 2 * len(self._alpha)
            self._sv = np.resize(self._sv, (cap, self.dim))
            self._alpha = np.resize(self._alpha, cap)
        self._sv[self.size] = x
        self._alpha[self.size] = alpha_stored
        self.size += 1

    def remove(self, indices) -> None:
        keep = np.ones(self.size, dtype=bool)
        keep[list(indices)] = False
        k = int(keep.sum())
        self._sv[:k] = self._sv[: self.size][keep]
        self._alpha[:k] = self._alpha[: self.size][keep]
        self.size = k

    def clear(self) -> None:
        self.size = 0
        self.scale = 1.0

    def fold_scale(self) -> None:
        self._alpha[: self.size] *= self.scale
        self.scale = 1.0

    def decision_dense(self, x: np.ndarray) -> float:
        if self.size == 0:
            return self.bias
        k = rbf_rows(self.support_vectors, x, self.gamma)
        return self.scale * float(self.alphas @ k) + self.bias

    def decision_values(self, X: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """Decision values for the rows of a dense matrix."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(len(X), self.bias)
        if self.size == 0:
            return out
        S = self.support_vectors
        if X.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} features, got {X.shape[1]}")
        s2 = np.einsum("ij,ij->i", S, S)
        coef = self.scale * self.alphas
        for lo in range(0, len(X), chunk):
            B = X[lo:lo + chunk]
            d2 = np.einsum("ij,ij->i", B, B)[:, None] + s2[None, :] - 2.0 * (B @ S.T)
            out[lo:lo + chunk] += np.exp(-self.gamma * np.maximum(d2, 0.0)) @ coef
        return out

    def squared_norm(self) -> float:
        """||w||^2 from the full Gram matrix."""
        S = self.support_vectors
        d2 = np.sum((S[:, None, :] - S[None, :, :]) ** 2, axis=-1)
        a = self.effective_alphas()
        return float(a @ np.exp(-self.gamma * d2) @ a)


def decision_function(model: BudgetModel, x) -> float:
    """``scale * sum_k alpha_k k(x_k, x) + bias`` for a sparse or dense point."""
    if isinstance(x, SparseVector):
        inside = [(i, v) for i, v in x.pairs() if i < model.dim]
        extra = math.fsum(v * v for i, v in x.pairs() if i >= model.dim)
        dense = SparseVector(inside).to_dense(model.dim)
        if model.size == 0:
            return model.bias
        diff = model.support_vectors - dense
        d2 = np.einsum("ij,ij->i", diff, diff) + extra
        k = np.exp(-model.gamma * d2)
        return model.scale * float(model.alphas @ k) + model.bias
    return model.decision_dense(np.asarray(x, dtype=float))


def sgd_step(model: BudgetModel, x: np.ndarray, y: int, t: int, lam: float, use_bias: bool = False) -> bool:
    """One Pegasos step with learning rate 1/(lam t); returns whether the margin was violated.

    The margin is tested on the current iterate, then coefficients shrink by
    ``1 - 1/t`` (all of them cleared at ``t = 1``) and a violating point is
    inserted with effective coefficient ``y / (lam t)``.
    """
    margin = y * model.decision_dense(x)
    eta = 1.0 / (lam * t)
    if t == 1:
        model.clear()
    else:
        model.scale *= (t - 1) / t
    violated = margin < 1.0
    if violated:
        model.append(eta * y / model.scale, x)
        if use_bias:
            model.bias += eta * y
    if model.scale < SCALE_FLOOR:
        model.fold_scale()
    return violated


@dataclass
class TrainStats:
    """Counters and timers collected during training.

    Times are seconds from a monotonic clock. Section A is time spent in the
    merge solver (computing h / WD), section B the rest of budget maintenance.
    The agreement and factor fields are filled only when a comparison
    observer is attached (see :mod:`budgetsvm.bench`): the factor sums hold
    achieved WD over GSS-precise minimal WD, for the driving solver and for
    the comparison solver respectively.
    """

    sgd_iterations: int = 0
    margin_violations: int = 0
    merge_events: int = 0
    removal_fallbacks: int = 0
    time_total: float = 0.0
    time_merge_total: float = 0.0
    time_section_A: float = 0.0
    time_section_B: float = 0.0
    agreement_events: int = 0
    agreement_matches: int = 0
    wd_factor_sum_solver: float = 0.0
    wd_factor_sum_precise_baseline: float = 0.0

    @property
    def merging_frequency(self) -> float:
        return self.merge_events / self.sgd_iterations if self.sgd_iterations else 0.0

    def counters(self) -> dict:
        return {k: v for k, v in asdict(self).items() if not k.startswith("time_")}

    def to_dict(self, timings: bool = True) -> dict:
        d = asdict(self) if timings else self.counters()
        d["merging_frequency"] = self.merging_frequency
        return d


@dataclass
class MergeRecord:
    """What one budget-maintenance call did.

    ``wd`` is the weight degradation actually incurred (closed form at the
    h that was used); ``wd_selected`` is the solver's estimate that drove the
    partner choice. Candidate arrays are indexed like ``candidates``.
    """

    kind: str
    min_index: int
    partner_index: int = -1
    h: float = float("nan")
    kappa: float = float("nan")
    m: float = float("nan")
    alpha_min: float = 0.0
    alpha_partner: float = 0.0
    alpha_z: float = 0.0
    wd: float = 0.0
    wd_selected: float = 0.0
    candidates: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    cand_m: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cand_kappa: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cand_weight: np.ndarray = field(default_factory=lambda: np.zeros(0))
    best: int = -1


def budget_maintain(model: BudgetModel, solver, stats: TrainStats | None = None,
                    observer: Callable[[MergeRecord], None] | None = None) -> MergeRecord:
    """Shrink a model holding ``budget + 1`` entries back to ``budget``.

    The smallest-|alpha| entry is merged with the same-sign entry of least
    weight degradation; with no same-sign entry it is removed outright.
    """
    if model.budget is None or model.size != model.budget + 1:
        raise ValueError(f"budget maintenance needs exactly budget+1 entries, model has {model.size}")
    perf = time.perf_counter
    t0 = perf()
    section_a = 0.0
    eff = model.effective_alphas()
    mag = np.abs(eff)
    lo = mag.min()
    i_min = int(np.flatnonzero(mag <= lo * (1.0 + TIE_RTOL))[0])
    a_min = float(eff[i_min])
    same = np.flatnonzero(np.sign(eff) == np.sign(a_min))
    same = same[same != i_min]

    if same.size == 0:
        model.remove([i_min])
        rec = MergeRecord("removal", i_min, alpha_min=a_min, wd=a_min * a_min, wd_selected=a_min * a_min)
        if stats is not None:
            stats.removal_fallbacks += 1
    else:
        S = model.support_vectors
        x_min = S[i_min]
        kappa = rbf_rows(S[same], x_min, model.gamma)
        total = mag[i_min] + mag[same]
        m = mag[i_min] / total
        # tied magnitudes (all unmerged entries share |alpha|) must give m = 1/2
        # exactly, or rounding decides which side of the kappa < e^-2 jump we land on
        m[np.abs(mag[same] - mag[i_min]) <= TIE_RTOL * mag[same]] = 0.5
        weight = total * total

        ta = perf()
        h_arr, wd_norm = solver.solve_batch(m, kappa)
        section_a += perf() - ta

        best = int(np.argmin(weight * wd_norm))
        j = int(same[best])
        if h_arr is None:
            ta = perf()
            h = solver.solve_h(float(m[best]), float(kappa[best]))
            section_a += perf() - ta
        else:
            h = float(h_arr[best])
        kb = float(kappa[best])
        a_j = float(eff[j])
        z = h * x_min + (1.0 - h) * S[j]
        alpha_z = merged_alpha(a_min, a_j, kb, h)
        rec = MergeRecord(
            "merge", i_min, j, h, kb, float(m[best]), a_min, a_j, alpha_z,
            wd=float(weight[best]) * wd_normalized(float(m[best]), kb, h),
            wd_selected=float(weight[best] * wd_norm[best]),
            candidates=same, cand_m=m, cand_kappa=kappa, cand_weight=weight, best=best,
        )
        model.remove([i_min, j])
        model.append(alpha_z / model.scale, z)
        if stats is not None:
            stats.merge_events += 1

    elapsed = perf() - t0
    if stats is not None:
        stats.time_merge_total += elapsed
        stats.time_section_A += section_a
        stats.time_section_B += elapsed - section_a
    if observer is not None and rec.kind == "merge":
        observer(rec)
    return rec


class Trainer:
    """Drives SGD steps and budget maintenance with a global step counter."""

    def __init__(self, hp: Hyperparams, n: int, dim: int, solver=None, grid: LookupGrid | None = None,
                 grid_file: str | Path | None = None, budget: int | None = None,
                 observer: Callable[[MergeRecord], None] | None = None):
        if n < 1:
            raise ValueError("cannot train on an empty dataset")
        self.hp = hp
        self.lam = hp.lam(n)
        self.solver = solver if solver is not None else make_solver(
            hp.solver, gss_eps=hp.gss_eps, precise_eps=hp.precise_eps, grid=grid,
            grid_size=hp.grid_size, grid_file=grid_file)
        self.model = BudgetModel(dim, hp.gamma, hp.budget if budget is None else budget)
        self.stats = TrainStats()
        self.observer = observer
        self.t = 0

    def step(self, x: np.ndarray, y: int) -> Optional[MergeRecord]:
        self.t += 1
        self.stats.sgd_iterations += 1
        if sgd_step(self.model, x, y, self.t, self.lam, self.hp.use_bias):
            self.stats.margin_violations += 1
        if self.model.size > self.model.budget:
            return budget_maintain(self.model, self.solver, self.stats, self.observer)
        return None

    def fit(self, X: np.ndarray, y: np.ndarray, epochs: int | None = None) -> "Trainer":
        rng = np.random.default_rng(self.hp.seed)
        yl = [int(v) for v in y]
        t0 = time.perf_counter()
        for _ in range(self.hp.epochs if epochs is None else epochs):
            for i in rng.permutation(len(X)).tolist():
                self.step(X[i], yl[i])
        self.stats.time_total += time.perf_counter() - t0
        return self


def train(data: Dataset, hp: Hyperparams, **kwargs) -> tuple[BudgetModel, TrainStats]:
    """Train on ``data``; extra keyword arguments go to :class:`Trainer`."""
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    trainer = Trainer(hp, len(data), data.dimension, **kwargs)
    trainer.fit(data.to_dense(), data.labels)
    return trainer.model, trainer.stats


def predict(model: BudgetModel, data: Dataset) -> np.ndarray:
    """Decision values for every example in ``data``."""
    X = data.to_dense(max(model.dim, data.dimension))
    # support vectors are zero beyond model.dim; that mass only rescales each kernel row
    extra = np.einsum("ij,ij->i", X[:, model.dim:], X[:, model.dim:])
    out = model.decision_values(X[:, : model.dim]) - model.bias
    return out * np.exp(-model.gamma * extra) + model.bias


def evaluate(model: BudgetModel, data: Dataset) -> float:
    """Fraction of examples whose predicted sign matches the label (0 counts as +1)."""
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    pred = np.where(predict(model, data) >= 0.0, 1.0, -1.0)
    return float(np.mean(pred == data.labels))


def save_model(model: BudgetModel, path: str | Path) -> None:
    """Text model file; the scale is folded into the written coefficients."""
    coef = model.effective_alphas()
    with open(path, "w") as fh:
        fh.write(f"bsvm 1 {model.gamma!r} {float(model.bias)!r} 1\n")
        for a, x in zip(coef.tolist(), model.support_vectors):
            feats = " ".join(f"{i + 1}:{v!r}" for i, v in enumerate(x.tolist()) if v != 0.0)
            fh.write(f"{a!r} {feats}".rstrip() + "\n")


def load_model(path: str | Path) -> BudgetModel:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty model file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "bsvm" or head[1] != "1":
        raise ValueError(f"{path}: bad model header {lines[0]!r}")
    gamma, bias = float(head[2]), float(head[3])
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        try:
            alpha = float(tokens[0])
            pairs = []
            for tok in tokens[1:]:
                i, v = tok.split(":")
                if int(i) < 1:
                    raise ValueError
                pairs.append((int(i) - 1, float(v)))
            entries.append((alpha, SparseVector(pairs)))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: malformed model entry {line!r}") from None
    dim = max((sv.dim for _, sv in entries), default=0)
    model = BudgetModel(dim, gamma, budget=None, capacity=max(len(entries), 1))
    model.bias = bias
    for alpha, sv in entries:
        model.append(alpha, sv.to_dense(dim))
    return model
