from __future__ import annotations

import math

import numpy as np
import pytest

from mrrr import Tridiagonal
from mrrr.matgen import generate
from mrrr.qd import Representation
from mrrr.sturm import (
    ATOL,
    bisect,
    bisect_ldl,
    bisect_t,
    inflate_shifted,
    negcount_ldl,
    negcount_t,
    refine_all,
)
from mrrr.tridiag import Interval, gershgorin

from .conftest import one21

EPS = 2.0**-53


def test_negcount_one21_at_middle_eigenvalue():
    # eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2); counting is strict
    assert negcount_t(one21(3), 2.0) == 1


def test_negcount_below_gershgorin_is_zero():
    rng = np.random.default_rng(5)
    for _ in range(20):
        t = Tridiagonal(rng.normal(size=6), rng.normal(size=5))
        assert negcount_t(t, gershgorin(t).lo) == 0
        assert negcount_t(t, gershgorin(t).hi) == 6


def test_negcount_clement4_at_zero():
    t = generate("clement", 4)
    assert negcount_t(t, 0.0) == 2


def test_negcount_ldl_examples():
    assert negcount_ldl(Representation(np.array([1.0, 2.0, 3.0]), np.zeros(2)), 2.5) == 2
    # L D L^* = [[1, 1], [1, 2]] has both eigenvalues positive
    assert negcount_ldl(Representation(np.array([1.0, 1.0]), np.array([1.0])), 0.0) == 0
    assert negcount_ldl(Representation(np.array([1.0, -1.0]), np.zeros(1)), 0.0) == 1


def test_negative_zero_pivot_counts_as_negative():
    # -0 - 0 stays -0 and is counted; 1 - 1 gives +0 and is not
    assert negcount_ldl(Representation(np.array([-0.0, 2.0]), np.zeros(1)), 0.0) == 1
    assert negcount_ldl(Representation(np.array([1.0, 2.0]), np.zeros(1)), 1.0) == 0


def test_bisect_one21_smallest():
    t = one21(3)
    iv = bisect(lambda s: negcount_t(t, s), 1, gershgorin(t), rtol=1e-8)
    assert iv.mid == pytest.approx(2 - math.sqrt(2), abs=1e-8 * 0.586)
    assert iv.halfwidth <= 1e-8 * 0.586


def test_bisect_diagonal_middle():
    t = Tridiagonal(np.array([1.0, 2.0, 3.0]), np.zeros(2))
    iv = bisect(lambda s: negcount_t(t, s), 2, gershgorin(t), rtol=1e-12)
    assert iv.mid == pytest.approx(2.0, abs=4e-12)


def test_bisect_clement5_zero_eigenvalue_uses_atol():
    t = generate("clement", 5)
    iv = bisect(lambda s: negcount_t(t, s), 3, gershgorin(t), rtol=1e-12)
    assert abs(iv.mid) <= 1e-15
    lo, hi = bisect_t(t, [3], gershgorin(t), rtol=1e-12)
    assert abs(0.5 * (lo[0] + hi[0])) <= 1e-15


def test_bisect_widens_a_bad_start():
    t = one21(3)
    iv = bisect(lambda s: negcount_t(t, s), 3, Interval(0.0, 0.1), rtol=1e-12)
    assert iv.mid == pytest.approx(2 + math.sqrt(2), rel=1e-11)


def test_batched_bisection_matches_closed_form():
    n = 50
    t = one21(n)
    ks = np.arange(1, n + 1)
    lo, hi = bisect_t(t, ks, gershgorin(t), rtol=4 * EPS)
    exact = 2 - 2 * np.cos(np.pi * ks / (n + 1))
    assert np.all(lo <= exact + 1e-14) and np.all(exact - 1e-14 <= hi)


def test_bisect_ldl_repairs_a_wrong_bracket():
    rep = Representation(np.array([1.0, 2.0, 3.0]), np.zeros(2))
    lo = np.array([2.5])
    hi = np.array([2.6])
    steps, repairs = bisect_ldl(rep, [2], lo, hi, 1e-12)
    assert repairs >= 1
    assert 0.5 * (lo[0] + hi[0]) == pytest.approx(2.0, abs=1e-11)


def test_refine_all_on_shifted_diagonal():
    rep = Representation(np.array([0.5, 1.5, 2.5]), np.zeros(2))
    parent = [Interval(x - 1e-3, x + 1e-3) for x in (1.0, 2.0, 3.0)]
    out = refine_all(rep, [1, 2, 3], parent, rtol=1e-10, tau=0.5)
    np.testing.assert_allclose([iv.mid for iv in out], [0.5, 1.5, 2.5], rtol=1e-9)


def test_refine_all_never_widens_beyond_inflation():
    rep = Representation(np.array([0.5, 1.5, 2.5]), np.zeros(2))
    parent = [Interval(x - 0.2, x + 0.2) for x in (1.0, 2.0, 3.0)]
    nu = 10 * 10 * 3 * EPS
    a, b = inflate_shifted([iv.lo for iv in parent], [iv.hi for iv in parent], 0.5, nu)
    out = refine_all(rep, [1, 2, 3], parent, rtol=0.5, tau=0.5)
    for iv, x, y in zip(out, a, b):
        assert iv.hi - iv.lo <= y - x


def test_refine_all_one21_after_shift_to_first_eigenvalue():
    n = 4
    lam1 = 2 - 2 * math.cos(math.pi / 5)
    alpha = np.full(n, 2.0) - lam1
    # plain LDL^* of T - lam1 I
    d = np.empty(n)
    l = np.empty(n - 1)
    d[0] = alpha[0]
    for i in range(n - 1):
        l[i] = 1.0 / d[i]
        d[i + 1] = alpha[i + 1] - l[i]
    rep = Representation(d, l)
    exact = 2 - 2 * np.cos(np.pi * np.arange(1, n + 1) / (n + 1))
    parent = [Interval(x - 1e-6, x + 1e-6) for x in exact]
    out = refine_all(rep, [1, 2, 3, 4], parent, rtol=1e-12, tau=lam1)
    spdiam = exact[-1] - exact[0]
    assert abs(out[0].mid) <= 1e-12 * spdiam + 1e-15


def test_atol_is_twice_underflow():
    assert ATOL == 2 * np.finfo(np.float64).tiny
