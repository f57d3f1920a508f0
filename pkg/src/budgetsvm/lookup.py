"""Precomputed merge solutions on a regular (m, kappa) grid.

Nodes sit at ``(i/(G-1), j/(G-1))`` for ``i, j = 0..G-1``, endpoints
included. Node values come from high-precision golden section search; queries
between nodes are answered by bilinear interpolation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kernel import TINY
from .merge import PRECISE_EPS, MergeInstance, MergeSolution, gss_maximize_batch, wd_normalized

MAGIC = b"BSVMGRID"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIId")

DEFAULT_GRID_SIZE = 400

# queries this close to a node (in cell units) are snapped onto it
_SNAP = 1e-12


class GridFormatError(ValueError):
    """Unreadable or inconsistent grid file."""


@dataclass(eq=False)
class LookupGrid:
    grid_size: int
    h_values: np.ndarray
    wd_values: np.ndarray
    build_eps: float
    _h_rows: list = field(init=False, repr=False)
    _wd_rows: list = field(init=False, repr=False)

    def __post_init__(self):
        G = self.grid_size
        if G < 2:
            raise ValueError(f"grid size must be at least 2, got {G}")
        self.h_values = np.ascontiguousarray(self.h_values, dtype="<f8")
        self.wd_values = np.ascontiguousarray(self.wd_values, dtype="<f8")
        if self.h_values.shape != (G, G) or self.wd_values.shape != (G, G):
            raise ValueError(f"value matrices must have shape {(G, G)}")
        # nested lists make scalar lookups several times cheaper than ndarray indexing
        self._h_rows = self.h_values.tolist()
        self._wd_rows = self.wd_values.tolist()

    def nodes(self) -> np.ndarray:
        return np.arange(self.grid_size) / (self.grid_size - 1)


def build_grid(G: int = DEFAULT_GRID_SIZE, eps: float = PRECISE_EPS) -> LookupGrid:
    """Solve the merge problem at every node by golden section search."""
    if G < 2:
        raise ValueError(f"grid size must be at least 2, got {G}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    ticks = np.arange(G) / (G - 1)
    M, K = np.meshgrid(ticks, np.maximum(ticks, TINY), indexing="ij")
    H = gss_maximize_batch(M, K, eps)
    # s is constant at kappa = 1, so any h is optimal there; store the limit
    # h -> m from kappa < 1 to keep h continuous across the last cell
    H[:, -1] = ticks
    return LookupGrid(G, H, wd_normalized(M, K, H), eps)


def _cell(n: int, m: float, kappa: float):
    """Lower-left node and fractional offsets of the cell holding (m, kappa)."""
    x = m * n
    i = int(x)
    fx = x - i
    if fx >= 1.0 - _SNAP:
        i += 1
        fx = 0.0
    elif fx <= _SNAP:
        fx = 0.0
    if i >= n:
        i, fx = n - 1, 1.0
    y = kappa * n
    j = int(y)
    fy = y - j
    if fy >= 1.0 - _SNAP:
        j += 1
        fy = 0.0
    elif fy <= _SNAP:
        fy = 0.0
    if j >= n:
        j, fy = n - 1, 1.0
    return i, j, fx, fy


def _interp(rows: list, i: int, j: int, fx: float, fy: float) -> float:
    r0, r1 = rows[i], rows[i + 1]
    gx = 1.0 - fx
    return (1.0 - fy) * (gx * r0[j] + fx * r1[j]) + fy * (gx * r0[j + 1] + fx * r1[j + 1])


def _bilerp_rows(rows: list, G: int, m: float, kappa: float) -> float:
    return _interp(rows, *_cell(G - 1, m, kappa))


def _bilerp_array(matrix: np.ndarray, m: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    n = matrix.shape[0] - 1

    def locate(q):
        x = np.asarray(q, dtype=float) * n
        r = np.rint(x)
        x = np.where(np.abs(x - r) <= _SNAP, r, x)
        i = np.minimum(x.astype(np.intp), n - 1)
        return i, x - i

    i, fx = locate(m)
    j, fy = locate(kappa)
    gx = 1.0 - fx
    v0 = gx * matrix[i, j] + fx * matrix[i + 1, j]
    v1 = gx * matrix[i, j + 1] + fx * matrix[i + 1, j + 1]
    return (1.0 - fy) * v0 + fy * v1


def bilerp(matrix: np.ndarray, m, kappa):
    """Bilinear interpolation of a G x G node matrix at ``(m, kappa)`` in [0, 1]^2.

    Interpolates along m first, then along kappa. Accepts scalars or arrays.
    """
    if np.ndim(m) == 0 and np.ndim(kappa) == 0:
        return float(_bilerp_array(matrix, np.array([m]), np.array([kappa]))[0])
    return _bilerp_array(matrix, m, kappa)


def _clip01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def solve_merge_lookup_h(grid: LookupGrid, instance: MergeInstance) -> MergeSolution:
    return LookupHSolver(grid).solve(instance.m, instance.kappa)


def solve_merge_lookup_wd(grid: LookupGrid, instance: MergeInstance) -> MergeSolution:
    return LookupWDSolver(grid).solve(instance.m, instance.kappa)


class LookupHSolver:
    """Interpolates h from the grid, then evaluates the closed-form degradation."""

    name = "lookup-h"

    def __init__(self, grid: LookupGrid):
        self.grid = grid

    def solve(self, m: float, kappa: float) -> MergeSolution:
        h = _clip01(_bilerp_rows(self.grid._h_rows, self.grid.grid_size, m, kappa))
        return MergeSolution(h, wd_normalized(m, kappa, h))

    def solve_batch(self, m: np.ndarray, kappa: np.ndarray):
        h = np.clip(_bilerp_array(self.grid.h_values, m, kappa), 0.0, 1.0)
        return h, wd_normalized(m, kappa, h)

    def solve_h(self, m: float, kappa: float) -> float:
        return _clip01(_bilerp_rows(self.grid._h_rows, self.grid.grid_size, m, kappa))


class LookupWDSolver:
    """Interpolates the degradation directly; h is only looked up for the winner.

    ``solve_batch`` returns ``None`` in place of the h array.
    """

    name = "lookup-wd"

    def __init__(self, grid: LookupGrid):
        self.grid = grid

    def solve(self, m: float, kappa: float) -> MergeSolution:
        grid = self.grid
        i, j, fx, fy = _cell(grid.grid_size - 1, m, kappa)
        wd = _interp(grid._wd_rows, i, j, fx, fy)
        h = _clip01(_interp(grid._h_rows, i, j, fx, fy))
        return MergeSolution(h, wd if wd > 0.0 else 0.0)

    def solve_batch(self, m: np.ndarray, kappa: np.ndarray):
        wd = _bilerp_array(self.grid.wd_values, m, kappa)
        return None, np.where(wd > 0.0, wd, 0.0)

    def solve_h(self, m: float, kappa: float) -> float:
        return _clip01(_bilerp_rows(self.grid._h_rows, self.grid.grid_size, m, kappa))


def save_grid(grid: LookupGrid, path: str | Path) -> None:
    G = grid.grid_size
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, G, float(grid.build_eps)))
        fh.write(grid.h_values.astype("<f8").tobytes(order="C"))
        fh.write(grid.wd_values.astype("<f8").tobytes(order="C"))


def load_grid(path: str | Path) -> LookupGrid:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise GridFormatError(f"{path}: truncated header ({len(data)} of {_HEADER.size} bytes)")
    magic, version, G, eps = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise GridFormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise GridFormatError(f"{path}: unsupported format version {version}")
    if G < 2:
        raise GridFormatError(f"{path}: grid size {G} < 2")
    expected = 2 * G * G * 8
    actual = len(data) - _HEADER.size
    if actual != expected:
        raise GridFormatError(f"{path}: expected {expected} payload bytes, found {actual}")
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(2, G, G)
    return LookupGrid(G, values[0].copy(), values[1].copy(), eps)


def grid_file_size(G: int) -> int:
    return _HEADER.size + 2 * G * G * 8
