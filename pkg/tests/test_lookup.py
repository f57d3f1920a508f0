import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from budgetsvm.kernel import TINY
from budgetsvm.lookup import (GridFormatError, LookupHSolver, LookupWDSolver, bilerp, build_grid, grid_file_size,
                              load_grid, save_grid, solve_merge_lookup_h, solve_merge_lookup_wd)
from budgetsvm.merge import GssSolver, MergeInstance, gss_maximize, solve_merge_gss, wd_normalized

E2 = math.exp(-2)


@pytest.fixture(scope="module")
def grid3():
    return build_grid(3, 1e-10)


def test_two_by_two_corners():
    g = build_grid(2, 1e-10)
    assert g.h_values.shape == (2, 2)
    # kappa = 1 column carries h = m, wd = 0
    assert g.h_values[0, 1] == 0.0 and g.h_values[1, 1] == 1.0
    assert g.wd_values[0, 1] == 0.0 and g.wd_values[1, 1] == 0.0
    # m in {0, 1} keeps the whole weight on one vector
    assert g.h_values[1, 0] == pytest.approx(1.0, abs=1e-10)
    assert g.h_values[0, 0] == pytest.approx(0.0, abs=1e-10)
    assert np.all(g.wd_values >= 0)


def test_center_node(grid3):
    assert grid3.h_values[1, 1] == pytest.approx(0.5, abs=1e-10)
    assert grid3.wd_values[1, 1] == pytest.approx(0.042893, abs=1e-6)
    assert LookupHSolver(grid3).solve(0.5, 0.5).h == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("G", [3, 23, 50])
def test_queries_at_nodes_are_exact(G):
    g = build_grid(G, 1e-10)
    ticks = g.nodes()
    for i in range(G):
        for j in range(G):
            m, k = float(ticks[i]), float(ticks[j])
            assert LookupWDSolver(g).solve(m, k).wd_norm == g.wd_values[i, j]
            assert LookupHSolver(g).solve_h(m, k) == g.h_values[i, j]
            assert bilerp(g.h_values, m, k) == g.h_values[i, j]


def test_cell_center_is_mean_of_corners():
    g = build_grid(5, 1e-10)
    v = bilerp(g.wd_values, 0.375, 0.625)
    assert v == pytest.approx(g.wd_values[1:3, 2:4].mean(), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_interpolation_stays_within_cell_corners(m, k):
    g = build_grid(7, 1e-6)
    for mat in (g.h_values, g.wd_values):
        i = min(int(m * 6), 5)
        j = min(int(k * 6), 5)
        corners = mat[i:i + 2, j:j + 2]
        v = bilerp(mat, m, k)
        assert corners.min() - 1e-15 <= v <= corners.max() + 1e-15


def test_scalar_and_array_interpolation_agree():
    g = build_grid(11, 1e-8)
    rng = np.random.default_rng(0)
    m, k = rng.random(400), rng.random(400)
    arr_h, arr_wd = LookupHSolver(g).solve_batch(m, k)
    _, arr_wd2 = LookupWDSolver(g).solve_batch(m, k)
    for a, b, x, y, z in zip(m, k, arr_h, arr_wd, arr_wd2):
        one = LookupHSolver(g).solve(float(a), float(b))
        assert one.h == pytest.approx(x, abs=1e-15)
        assert one.wd_norm == pytest.approx(y, rel=1e-12, abs=1e-16)
        assert LookupWDSolver(g).solve(float(a), float(b)).wd_norm == pytest.approx(z, rel=1e-12, abs=1e-16)


def test_lookup_examples(grid400):
    sol = solve_merge_lookup_h(grid400, MergeInstance(0.5, 1.0))
    assert sol.h == pytest.approx(0.5, abs=1e-12) and sol.wd_norm == 0.0
    sol = solve_merge_lookup_h(grid400, MergeInstance(0.5, 0.9))
    assert sol.h == pytest.approx(0.5, abs=1e-4)
    assert sol.wd_norm == pytest.approx(solve_merge_gss(MergeInstance(0.5, 0.9), 1e-10).wd_norm, abs=1e-9)
    assert solve_merge_lookup_wd(grid400, MergeInstance(0.3, 1.0)).wd_norm == 0.0


def test_lookup_wd_close_to_precise(grid400):
    rng = np.random.default_rng(12)
    m, k = rng.random(20000), rng.uniform(E2, 1, 20000)
    _, precise = GssSolver(1e-10).solve_batch(m, k)
    _, approx = LookupWDSolver(grid400).solve_batch(m, k)
    assert np.max(np.abs(approx - precise)) <= 1e-4


def test_lookup_wd_error_near_kink_is_bounded(grid400):
    # below e^-2 the optimal WD has a kink along m = 1/2 that a single cell cannot resolve
    rng = np.random.default_rng(14)
    m, k = rng.uniform(0.49, 0.51, 20000), rng.uniform(1e-3, E2, 20000)
    _, precise = GssSolver(1e-10).solve_batch(m, k)
    _, approx = LookupWDSolver(grid400).solve_batch(m, k)
    err = np.abs(approx - precise)
    assert err.max() <= 2e-3


def test_lookup_h_never_beats_optimum(grid400):
    rng = np.random.default_rng(13)
    m, k = rng.random(5000), rng.uniform(E2, 1, 5000)
    _, precise = GssSolver(1e-10).solve_batch(m, k)
    _, wd = LookupHSolver(grid400).solve_batch(m, k)
    assert np.all(wd >= precise - 1e-15)


def test_grid_invariants(grid400):
    g = grid400
    assert np.all((g.h_values >= 0) & (g.h_values <= 1))
    assert np.all(g.wd_values >= 0)
    assert np.all(g.wd_values[:, -1] == 0)
    np.testing.assert_array_equal(g.h_values[:, -1], g.nodes())
    # partner swap symmetry away from the ambiguous centre row at small kappa
    ticks = g.nodes()
    H, W = g.h_values, g.wd_values
    mask = np.ones_like(H, dtype=bool)
    mask[len(ticks) // 2, ticks < E2] = False
    mask[(len(ticks) - 1) // 2, ticks < E2] = False
    sym_h = np.abs(H + H[::-1, :] - 1.0)[mask]
    assert sym_h.max() <= 2 * g.build_eps
    np.testing.assert_allclose(W, W[::-1, :], atol=1e-15)


def test_grid_nodes_match_scalar_solver():
    g = build_grid(9, 1e-10)
    ticks = g.nodes()
    for i in range(9):
        for j in range(8):  # kappa = 1 column holds the continuous limit instead
            k = max(float(ticks[j]), TINY)
            assert g.h_values[i, j] == pytest.approx(gss_maximize(MergeInstance(float(ticks[i]), k), 1e-10), abs=1e-15)
            assert g.wd_values[i, j] == pytest.approx(wd_normalized(float(ticks[i]), k, g.h_values[i, j]), rel=1e-13)


def test_round_trip(tmp_path):
    g = build_grid(17, 1e-6)
    p = tmp_path / "g.bin"
    save_grid(g, p)
    assert p.stat().st_size == grid_file_size(17) == 24 + 2 * 17 * 17 * 8
    back = load_grid(p)
    assert back.grid_size == 17 and back.build_eps == 1e-6
    assert back.h_values.tobytes() == g.h_values.tobytes()
    assert back.wd_values.tobytes() == g.wd_values.tobytes()
    assert p.read_bytes()[:8] == b"BSVMGRID"
    assert struct.unpack_from("<II", p.read_bytes(), 8) == (1, 17)


def test_file_size_400():
    assert grid_file_size(400) == 2_560_024


def _corrupt(tmp_path, data: bytes):
    p = tmp_path / "bad.bin"
    p.write_bytes(data)
    return p


def test_load_errors(tmp_path):
    g = build_grid(4, 1e-4)
    good = tmp_path / "good.bin"
    save_grid(g, good)
    raw = good.read_bytes()
    with pytest.raises(GridFormatError, match="truncated header"):
        load_grid(_corrupt(tmp_path, raw[:10]))
    with pytest.raises(GridFormatError, match="magic"):
        load_grid(_corrupt(tmp_path, b"NOTAGRID" + raw[8:]))
    with pytest.raises(GridFormatError, match="version"):
        load_grid(_corrupt(tmp_path, raw[:8] + struct.pack("<I", 2) + raw[12:]))
    with pytest.raises(GridFormatError, match="expected 256 payload bytes, found 248"):
        load_grid(_corrupt(tmp_path, raw[:-8]))
    with pytest.raises(GridFormatError, match="found 264"):
        load_grid(_corrupt(tmp_path, raw + b"\0" * 8))
    with pytest.raises(GridFormatError):
        load_grid(_corrupt(tmp_path, raw[:12] + struct.pack("<I", 1) + raw[16:]))


def test_build_validation():
    with pytest.raises(ValueError):
        build_grid(1)
    with pytest.raises(ValueError):
        build_grid(5, 0.0)
