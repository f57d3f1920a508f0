"""The normalized two-point merge problem for Gaussian-kernel support vectors.

Merging ``a_i*phi(x_i) + a_j*phi(x_j)`` (same sign) into ``a_z*phi(z)`` with
``z = h*x_i + (1-h)*x_j`` depends only on two numbers:

* ``m = |a_i| / (|a_i| + |a_j|)``, the weight of the point that ``h`` multiplies;
* ``kappa = k(x_i, x_j)``.

The merged coefficient divided by ``a_i + a_j`` is
``s(h) = m*kappa**((1-h)**2) + (1-m)*kappa**(h**2)``; it is maximized over
``h in [0, 1]`` and the weight degradation divided by ``(a_i + a_j)**2`` is
``m**2 + (1-m)**2 - s(h)**2 + 2*m*(1-m)*kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .kernel import kappa_power

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_GOLDEN_C = 1.0 - GOLDEN

PRECISE_EPS = 1e-10
STANDARD_EPS = 0.01

_REAL = (float, int)


@dataclass(frozen=True)
class MergeInstance:
    m: float
    kappa: float

    def __post_init__(self):
        if not 0.0 <= self.m <= 1.0:
            raise ValueError(f"m must lie in [0, 1], got {self.m}")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")


class MergeSolution(NamedTuple):
    h: float
    wd_norm: float


def objective_s(m, kappa, h):
    """Normalized merged coefficient ``s_{m,kappa}(h)``."""
    return m * kappa_power(kappa, (1 - h) ** 2) + (1 - m) * kappa_power(kappa, h * h)


def wd_normalized(m, kappa, h):
    """Weight degradation over ``(|a_i| + |a_j|)**2``, clamped at zero.

    Evaluates ``m**2 + (1-m)**2 - s**2 + 2*m*(1-m)*kappa`` in the equivalent
    form ``u*(2-u) - 2*m*(1-m)*(1-kappa)`` with ``u = 1 - s`` taken from
    ``expm1``; the value is O((1-kappa)**2) near kappa = 1 and the naive sum
    loses it to cancellation.
    """
    if isinstance(m, _REAL) and isinstance(kappa, _REAL) and isinstance(h, _REAL):
        lk = math.log(kappa)
        u = -m * math.expm1((1.0 - h) * (1.0 - h) * lk) - (1.0 - m) * math.expm1(h * h * lk)
        wd = u * (2.0 - u) - 2.0 * m * (1.0 - m) * (1.0 - kappa)
        return wd if wd > 0.0 else 0.0
    lk = np.log(kappa)
    u = -m * np.expm1((1.0 - h) ** 2 * lk) - (1.0 - m) * np.expm1(h * h * lk)
    wd = u * (2.0 - u) - 2.0 * m * (1.0 - m) * (1.0 - kappa)
    return np.where(wd > 0.0, wd, 0.0)


@lru_cache(maxsize=64)
def gss_iterations(eps: float) -> int:
    """Bracket reductions needed to bring the unit interval below ``eps``."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if eps >= 1.0:
        return 0
    return max(0, math.ceil(math.log(eps) / math.log(GOLDEN)))


def _gss(m: float, kappa: float, eps: float) -> float:
    n = gss_iterations(eps)
    if n == 0:
        return 0.5
    lk = math.log(kappa)
    w = 1.0 - m
    exp, expm1 = math.exp, math.expm1
    a, b, width = 0.0, 1.0, 1.0
    c, d = _GOLDEN_C, GOLDEN
    pc, qc = exp((1.0 - c) * (1.0 - c) * lk), exp(c * c * lk)
    pd, qd = exp((1.0 - d) * (1.0 - d) * lk), exp(d * d * lk)
    last = n - 1
    for k in range(n):
        width *= GOLDEN
        # s(c) - s(d) without cancellation
        diff = m * pd * expm1((d - c) * (2.0 - c - d) * lk) + w * qd * expm1((c - d) * (c + d) * lk)
        if diff > 0.0:
            b = d
            d, pd, qd = c, pc, qc
            if k < last:
                c = a + _GOLDEN_C * width
                pc, qc = exp((1.0 - c) * (1.0 - c) * lk), exp(c * c * lk)
        else:
            a = c
            c, pc, qc = d, pd, qd
            if k < last:
                d = a + GOLDEN * width
                pd, qd = exp((1.0 - d) * (1.0 - d) * lk), exp(d * d * lk)
    h = 0.5 * (a + b)
    # s is symmetric at m = 1/2, so the first comparison is rounding noise; pick the upper mirror
    return max(h, 1.0 - h) if m == 0.5 else h


def gss_maximize(instance: MergeInstance, eps: float) -> float:
    """Golden section search for the maximizer of ``objective_s`` on [0, 1].

    Runs until the bracket is narrower than ``eps`` and returns its midpoint.
    Each step compares ``s(c) - s(d)`` evaluated in a cancellation-free form,
    so the maximizer is resolved far below the sqrt(machine eps) limit of
    comparing function values. On bimodal instances (kappa < e**-2) the
    result may be a local maximizer. At m = 1/2 exactly, where h and 1 - h
    are equally good, the result is reported as the one in [1/2, 1].
    """
    return _gss(instance.m, instance.kappa, eps)


def gss_maximize_batch(m, kappa, eps: float) -> np.ndarray:
    """Elementwise :func:`gss_maximize` over broadcast arrays ``m``, ``kappa``."""
    m, kappa = np.broadcast_arrays(np.asarray(m, dtype=float), np.asarray(kappa, dtype=float))
    n = gss_iterations(eps)
    if n == 0:
        return np.full(m.shape, 0.5)
    lk = np.log(kappa)
    w = 1.0 - m

    def powers(x):
        return np.exp((1.0 - x) ** 2 * lk), np.exp(x * x * lk)

    a = np.zeros(m.shape)
    b = np.ones(m.shape)
    c = np.full(m.shape, _GOLDEN_C)
    d = np.full(m.shape, GOLDEN)
    pc, qc = powers(c)
    pd, qd = powers(d)
    width = 1.0
    for k in range(n):
        width *= GOLDEN
        diff = m * pd * np.expm1((d - c) * (2.0 - c - d) * lk) + w * qd * np.expm1((c - d) * (c + d) * lk)
        left = diff > 0.0
        # left: keep [a, d]; otherwise keep [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        if k == n - 1:
            break
        keep = np.where(left, c, d)
        pk = np.where(left, pc, pd)
        qk = np.where(left, qc, qd)
        new = np.where(left, a + _GOLDEN_C * width, a + GOLDEN * width)
        pn, qn = powers(new)
        c = np.where(left, new, keep)
        pc = np.where(left, pn, pk)
        qc = np.where(left, qn, qk)
        d = np.where(left, keep, new)
        pd = np.where(left, pk, pn)
        qd = np.where(left, qk, qn)
    h = 0.5 * (a + b)
    return np.where(m == 0.5, np.maximum(h, 1.0 - h), h)


def merged_alpha(alpha_i: float, alpha_j: float, kappa: float, h: float) -> float:
    """Optimal coefficient of the merged point for a given ``h``."""
    if alpha_i * alpha_j < 0:
        raise ValueError("merge partners must have coefficients of the same sign")
    return alpha_i * kappa_power(kappa, (1.0 - h) ** 2) + alpha_j * kappa_power(kappa, h * h)


def solve_merge_gss(instance: MergeInstance, eps: float) -> MergeSolution:
    h = _gss(instance.m, instance.kappa, eps)
    return MergeSolution(h, wd_normalized(instance.m, instance.kappa, h))


def wd_direct_oracle(alpha_i, alpha_j, kappa, h, alpha_z):
    """||a_i phi(x_i) + a_j phi(x_j) - a_z phi(z)||^2 expanded term by term.

    Independent of the closed form; used to cross-check :func:`wd_normalized`.
    """
    k_iz = kappa_power(kappa, (1 - h) ** 2)
    k_jz = kappa_power(kappa, h * h)
    return (alpha_i * alpha_i + alpha_j * alpha_j + alpha_z * alpha_z
            + 2 * alpha_i * alpha_j * kappa
            - 2 * alpha_z * alpha_i * k_iz
            - 2 * alpha_z * alpha_j * k_jz)


class GssSolver:
    """Merge solver running golden section search per candidate."""

    def __init__(self, eps: float = STANDARD_EPS, name: str | None = None):
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        self.eps = eps
        self.name = name or ("gss-precise" if eps == PRECISE_EPS else "gss")

    def solve(self, m: float, kappa: float) -> MergeSolution:
        h = _gss(m, kappa, self.eps)
        return MergeSolution(h, wd_normalized(m, kappa, h))

    def solve_batch(self, m: np.ndarray, kappa: np.ndarray):
        """Return ``(h, wd_norm)`` arrays for a set of candidates."""
        h = gss_maximize_batch(m, kappa, self.eps)
        return h, wd_normalized(m, kappa, h)

    def solve_h(self, m: float, kappa: float) -> float:
        return _gss(m, kappa, self.eps)

    def __repr__(self) -> str:
        return f"GssSolver(eps={self.eps!r})"
