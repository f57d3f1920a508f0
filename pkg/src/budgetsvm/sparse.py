"""Sparse feature vectors and LIBSVM-format datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class ParseError(ValueError):
    """Malformed LIBSVM input."""


class SparseVector:
    """Immutable sparse vector with sorted, unique, 0-based indices.

    Exact zeros are dropped on construction.
    """

    __slots__ = ("indices", "values")

    def __init__(self, pairs: Iterable[tuple[int, float]] = ()):
        items = sorted((int(i), float(v)) for i, v in pairs)
        for (a, _), (b, _) in zip(items, items[1:]):
            if a == b:
                raise ValueError(f"duplicate index {a}")
        if items and items[0][0] < 0:
            raise ValueError(f"negative index {items[0][0]}")
        items = [(i, v) for i, v in items if v != 0.0]
        self.indices = tuple(i for i, _ in items)
        self.values = tuple(v for _, v in items)

    @classmethod
    def from_dense(cls, x: Sequence[float] | np.ndarray) -> "SparseVector":
        return cls((i, v) for i, v in enumerate(np.asarray(x, dtype=float).tolist()) if v != 0.0)

    def to_dense(self, dim: int | None = None) -> np.ndarray:
        n = self.dim if dim is None else dim
        out = np.zeros(n)
        if self.indices:
            if self.indices[-1] >= n:
                raise ValueError(f"index {self.indices[-1]} does not fit dimension {n}")
            out[list(self.indices)] = self.values
        return out

    @property
    def dim(self) -> int:
        """Smallest dense length holding every stored index."""
        return self.indices[-1] + 1 if self.indices else 0

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.indices, self.values))

    def squared_norm(self) -> float:
        return math.fsum(v * v for v in self.values)

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.indices == other.indices and self.values == other.values

    def __hash__(self) -> int:
        return hash((self.indices, self.values))

    def __repr__(self) -> str:
        return f"SparseVector({self.pairs()!r})"


def squared_distance(a: SparseVector, b: SparseVector) -> float:
    """||a - b||^2 by a merge walk over the two sorted index lists."""
    ai, av, bi, bv = a.indices, a.values, b.indices, b.values
    p = q = 0
    na, nb = len(ai), len(bi)
    total = 0.0
    while p < na and q < nb:
        if ai[p] == bi[q]:
            d = av[p] - bv[q]
            total += d * d
            p += 1
            q += 1
        elif ai[p] < bi[q]:
            total += av[p] * av[p]
            p += 1
        else:
            total += bv[q] * bv[q]
            q += 1
    while p < na:
        total += av[p] * av[p]
        p += 1
    while q < nb:
        total += bv[q] * bv[q]
        q += 1
    return total


def dot(a: SparseVector, b: SparseVector) -> float:
    ai, av, bi, bv = a.indices, a.values, b.indices, b.values
    p = q = 0
    total = 0.0
    while p < len(ai) and q < len(bi):
        if ai[p] == bi[q]:
            total += av[p] * bv[q]
            p += 1
            q += 1
        elif ai[p] < bi[q]:
            p += 1
        else:
            q += 1
    return total


def blend(h: float, a: SparseVector, b: SparseVector) -> SparseVector:
    """h*a + (1-h)*b over the union of indices, dropping exact zeros."""
    acc: dict[int, float] = {}
    for i, v in zip(a.indices, a.values):
        acc[i] = h * v
    for i, v in zip(b.indices, b.values):
        acc[i] = acc.get(i, 0.0) + (1.0 - h) * v
    return SparseVector(acc.items())


@dataclass(frozen=True)
class Example:
    features: SparseVector
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise ValueError(f"label must be -1 or +1, got {self.label}")


@dataclass
class Dataset:
    examples: list[Example] = field(default_factory=list)
    dimension: int = 0

    def __post_init__(self):
        need = max((e.features.dim for e in self.examples), default=0)
        self.dimension = max(self.dimension, need)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, i: int) -> Example:
        return self.examples[i]

    @property
    def labels(self) -> np.ndarray:
        return np.array([e.label for e in self.examples], dtype=float)

    def to_dense(self, dim: int | None = None) -> np.ndarray:
        """Dense (n, dim) feature matrix."""
        d = self.dimension if dim is None else dim
        X = np.zeros((len(self.examples), d))
        for r, e in enumerate(self.examples):
            idx = e.features.indices
            if idx:
                X[r, list(idx)] = e.features.values
        return X


def parse_libsvm_record(line: str) -> Example:
    """Parse one ``<label> <index>:<value> ...`` record (1-based indices).

    Positive raw labels map to +1, everything else to -1.
    """
    body = line.split("#", 1)[0].strip()
    if not body:
        raise ParseError(f"empty record: {line!r}")
    tokens = body.split()
    try:
        raw = float(tokens[0])
    except ValueError:
        raise ParseError(f"non-numeric label {tokens[0]!r} in {line!r}") from None
    if math.isnan(raw):
        raise ParseError(f"non-numeric label {tokens[0]!r} in {line!r}")
    pairs: dict[int, float] = {}
    for tok in tokens[1:]:
        idx, sep, val = tok.partition(":")
        if not sep:
            raise ParseError(f"malformed token {tok!r} in {line!r}")
        try:
            i = int(idx)
            v = float(val)
        except ValueError:
            raise ParseError(f"malformed token {tok!r} in {line!r}") from None
        if i < 1:
            raise ParseError(f"feature index {i} < 1 in {line!r}")
        if i - 1 in pairs:
            raise ParseError(f"duplicate feature index {i} in {line!r}")
        pairs[i - 1] = v
    return Example(SparseVector(pairs.items()), 1 if raw > 0 else -1)


def format_libsvm_record(example: Example) -> str:
    feats = " ".join(f"{i + 1}:{v!r}" for i, v in example.features.pairs())
    label = "+1" if example.label > 0 else "-1"
    return f"{label} {feats}".rstrip()


def load_dataset(path: str | Path) -> Dataset:
    examples = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.split("#", 1)[0].strip():
                continue
            try:
                examples.append(parse_libsvm_record(line))
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    return Dataset(examples)


def save_dataset(data: Dataset, path: str | Path) -> None:
    with open(path, "w") as fh:
        for e in data:
            fh.write(format_libsvm_record(e) + "\n")
