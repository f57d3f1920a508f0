"""Gaussian RBF kernel and the kernel-power shortcut used by merging."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from .sparse import SparseVector, squared_distance

# exp(-gamma * d2) is clamped here instead of underflowing to 0.
TINY = sys.float_info.min


@dataclass(frozen=True)
class KernelParams:
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")


def rbf(a: SparseVector, b: SparseVector, params: KernelParams) -> float:
    return max(math.exp(-params.gamma * squared_distance(a, b)), TINY)


def rbf_rows(S: np.ndarray, x: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel between every row of ``S`` and the dense point ``x``."""
    diff = S - x
    d2 = np.einsum("ij,ij->i", diff, diff)
    return np.maximum(np.exp(-gamma * d2), TINY)


def kappa_power(kappa, exponent):
    """kappa**exponent as exp(exponent * log(kappa)); works on scalars and arrays."""
    if isinstance(kappa, (float, int)) and isinstance(exponent, (float, int)):
        return math.exp(float(exponent) * math.log(kappa))
    return np.exp(np.multiply(exponent, np.log(kappa)))
