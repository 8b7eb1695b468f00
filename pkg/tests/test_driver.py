from __future__ import annotations


import numpy as np
import pytest

from mrrr import All, ByIndex, ByValue, SelectionError, SolverConfig, Tridiagonal, solve, standard64
from mrrr import driver
from mrrr.matgen import generate, one21_eigenvalues
from mrrr.metrics import residual_orthogonality
from mrrr.tridiag import one_norm

from .conftest import one21
from .frozen import WILKINSON_21

EPS = 2.0**-53


def cfg(**kw):
    return SolverConfig(profile=standard64(), **kw)


def test_diagonal_matrix_gives_sorted_diagonal_and_permuted_identity():
    a = np.array([3.0, -1.0, 2.0, 0.5])
    es = solve(Tridiagonal(a, np.zeros(3)), All(), cfg())
    np.testing.assert_array_equal(es.values, np.sort(a))
    np.testing.assert_array_equal(np.abs(es.vectors), np.eye(4)[:, np.argsort(a)])


def test_one21_closed_form():
    n = 100
    t = one21(n)
    es = solve(t, All(), cfg())
    assert np.max(np.abs(es.values - one21_eigenvalues(n))) <= 100 * n * EPS * one_norm(t)


def test_clement101_symmetric_with_zero():
    n = 101
    t = generate("clement", n)
    es = solve(t, All(), cfg())
    tol = n * EPS * one_norm(t)
    np.testing.assert_allclose(es.values, -es.values[::-1], atol=tol)
    assert abs(es.values[n // 2]) <= tol
    # the spectrum is the integers -100, -98, ..., 100
    np.testing.assert_allclose(es.values, np.arange(-100, 101, 2), atol=tol)


def test_single_entry():
    es = solve(Tridiagonal(np.array([-4.5]), np.zeros(0)), All(), cfg())
    assert es.values.tolist() == [-4.5]
    assert es.vectors.tolist() == [[1.0]]


def test_by_index_matches_all():
    t = generate("wilkinson", 21)
    full = solve(t, All(), cfg())
    part = solve(t, ByIndex(18, 21), cfg())
    np.testing.assert_allclose(part.values, full.values[17:], atol=1e-14)
    np.testing.assert_allclose(part.values, WILKINSON_21[17:], atol=21 * EPS * 4)
    assert part.requested.tolist() == [18, 19, 20, 21]
    # the top eigenvalues come in close pairs, so compare spans
    proj = np.linalg.norm(full.vectors[:, 17:].T @ part.vectors, axis=0)
    np.testing.assert_allclose(proj, 1.0, atol=1e-10)
    R, O, _ = residual_orthogonality(t, part.values, part.vectors)
    assert R <= 200 * 21 * EPS and O <= 200 * 21 * EPS


def test_by_value_is_half_open():
    t = Tridiagonal(np.array([1.0, 2.0, 3.0, 4.0]), np.zeros(3))
    es = solve(t, ByValue(2.0, 4.0), cfg())
    assert es.values.tolist() == [2.0, 3.0]
    assert es.requested.tolist() == [2, 3]


def test_by_index_over_split_blocks_with_ties():
    # two identical blocks: every eigenvalue appears twice
    b = np.array([1.0, 0.0, 1.0])
    t = Tridiagonal(np.array([2.0, 2.0, 2.0, 2.0]), b)
    es = solve(t, ByIndex(2, 3), cfg())
    np.testing.assert_allclose(es.values, [1.0, 3.0], atol=1e-15)
    R, O, _ = residual_orthogonality(t, es.values, es.vectors)
    assert R < 1e-14 and O < 1e-14


@pytest.mark.parametrize("sel", [ByIndex(0, 3), ByIndex(3, 2), ByIndex(1, 9), ByValue(2.0, 1.0)])
def test_bad_selections(sel):
    with pytest.raises(SelectionError):
        solve(one21(5), sel, cfg())


def test_values_only_mode():
    n = 60
    es = solve(one21(n), All(), cfg(), vectors=False)
    assert es.vectors is None
    assert np.max(np.abs(es.values - one21_eigenvalues(n))) <= 10 * n * EPS * 4


def test_subset_does_proportional_vector_work():
    n = 1000
    t = one21(n)
    full = solve(t, All(), cfg())
    part = solve(t, ByIndex(1, 100), cfg())
    assert part.vectors.shape == (n, 100)
    assert part.stats.ops_vectors <= 0.15 * full.stats.ops_vectors


def test_every_column_written_once():
    t = generate("wilkinson", 101)
    for w in (1, 3):
        es = solve(t, All(), cfg(worker_count=w))
        assert es.stats.write_counts.tolist() == [1] * 101


def test_wilkinson21_has_clusters_and_children_cover_them(monkeypatch):
    seen = []
    real_emit = driver.emit

    def spy(node, part, ctx, st, inline):
        covered = []
        for (a, b), _ in part:
            covered.extend(node.ks[a:b].tolist())
        seen.append((node.rep.depth, node.ks.tolist(), covered))
        return real_emit(node, part, ctx, st, inline)

    monkeypatch.setattr(driver, "emit", spy)
    es = solve(generate("wilkinson", 21), All(), cfg())
    assert es.stats.d_max >= 1
    assert es.stats.shift_count >= 1
    for _, ks, covered in seen:
        assert covered == ks  # groups tile the node exactly
    np.testing.assert_allclose(es.values, WILKINSON_21, atol=100 * 21 * EPS * 4)


def test_cluster_of_two_becomes_two_singletons(monkeypatch):
    kinds = []
    real_emit = driver.emit

    def spy(node, part, ctx, st, inline):
        kinds.append((node.rep.depth, list(part.kinds)))
        return real_emit(node, part, ctx, st, inline)

    monkeypatch.setattr(driver, "emit", spy)
    # the close pair sits far from both ends of the spectrum
    t = Tridiagonal(np.array([-1.0, 1.0, 1.0 + 1e-9, 3.0]), np.array([1e-3, 1e-12, 1e-3]))
    es = solve(t, All(), cfg())
    assert kinds[0] == (0, ["S", "C", "S"])
    assert kinds[1] == (1, ["S", "S"])
    R, O, _ = residual_orthogonality(t, es.values, es.vectors)
    assert O <= 1e-13


def test_large_cluster_is_split_into_refinement_tasks():
    # 200 eigenvalues packed into a tiny relative window, away from both ends
    n = 202
    a = np.concatenate([[-1.0], 1.0 + 1e-7 * np.linspace(0, 1, n - 2), [3.0]])
    t = Tridiagonal(a, np.full(n - 1, 1e-9))
    es = solve(t, All(), cfg(worker_count=4, depth_first=False))
    assert es.stats.rtasks >= 2
    R, O, _ = residual_orthogonality(t, es.values, es.vectors)
    assert R <= 200 * n * EPS and O <= 200 * n * EPS


def test_deterministic_single_worker():
    t = generate("hermite", 300)
    a = solve(t, All(), cfg(seed=3))
    b = solve(t, All(), cfg(seed=3))
    assert a.values.tobytes() == b.values.tobytes()
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_tiny_and_huge_matrices_are_scaled():
    for s in (1e-300, 1e300):
        t = Tridiagonal(s * np.full(10, 2.0), s * np.ones(9))
        es = solve(t, All(), cfg())
        np.testing.assert_allclose(es.values / s, one21_eigenvalues(10), rtol=1e-13)


def test_scheduler_propagates_errors(monkeypatch):
    def boom(task, ctx, st):
        raise RuntimeError("boom")

    monkeypatch.setattr(driver, "run_s_task", boom)
    with pytest.raises(RuntimeError, match="boom"):
        solve(generate("hermite", 50), All(), cfg(worker_count=2))
