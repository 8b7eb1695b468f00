from __future__ import annotations

import math

import numpy as np
import pytest

from mrrr import SolverConfig, Tridiagonal, standard64
from mrrr.matgen import generate
from mrrr.qd import Representation
from mrrr.rrr import (
    CLUSTER,
    SINGLETON,
    classify,
    growth_test,
    make_root,
    reldist,
    select_shift,
    spectral_diameter,
)
from mrrr.sturm import negcount_ldl
from mrrr.tridiag import IrreducibleBlock

from .conftest import one21

EPS = 2.0**-53


def cfg():
    return SolverConfig(profile=standard64())


def test_root_of_diagonal_block():
    t = Tridiagonal(np.array([3.0, 1.0, 2.0]), np.zeros(2))
    root = make_root(IrreducibleBlock(0, t), cfg().with_(perturb_magnitude=0.0), np.random.default_rng(0))
    np.testing.assert_array_equal(root.rep.d, t.alpha - root.mu)
    assert np.all(root.rep.d > 0) or np.all(root.rep.d < 0)


def test_root_of_one21_is_definite():
    root = make_root(IrreducibleBlock(0, one21(3)), cfg(), np.random.default_rng(0))
    assert np.all(root.rep.d > 0)
    assert negcount_ldl(root.rep, 0.0) == 0
    assert growth_test(root.rep, root.spdiam) <= 2


def test_root_is_deterministic_per_seed():
    blk = IrreducibleBlock(0, generate("hermite", 40))
    a = make_root(blk, cfg(), np.random.default_rng([7, 0]))
    b = make_root(blk, cfg(), np.random.default_rng([7, 0]))
    c = make_root(blk, cfg(), np.random.default_rng([8, 0]))
    assert a.rep.d.tobytes() == b.rep.d.tobytes()
    assert a.rep.l.tobytes() == b.rep.l.tobytes()
    assert a.rep.d.tobytes() != c.rep.d.tobytes()


def test_root_perturbation_is_bounded():
    blk = IrreducibleBlock(0, generate("legendre", 30))
    clean = make_root(blk, cfg().with_(perturb_magnitude=0.0), np.random.default_rng(1))
    noisy = make_root(blk, cfg(), np.random.default_rng(1))
    rel = np.abs(noisy.rep.d / clean.rep.d - 1)
    assert rel.max() <= 8 * EPS * (1 + 1e-12)


def test_spectral_diameter_one21():
    n = 3
    assert spectral_diameter(IrreducibleBlock(0, one21(n)), EPS) == pytest.approx(2 * math.sqrt(2), rel=1e-9)


def test_classify_pair_and_singleton():
    mids = np.array([1.0, 1.0005, 2.0])
    part = classify(mids - 5e-10, mids + 5e-10, 1e-3)
    assert part.groups == [(0, 2), (2, 3)]
    assert part.kinds == [CLUSTER, SINGLETON]
    assert part.largest == 2


def test_classify_well_separated():
    mids = np.arange(1.0, 11.0)
    part = classify(mids - 1e-9, mids + 1e-9, 1e-3)
    assert part.kinds == [SINGLETON] * 10


def test_classify_single():
    part = classify(np.array([0.3]), np.array([0.3]), 1e-3)
    assert part.groups == [(0, 1)] and part.kinds == [SINGLETON]


def test_reldist_with_zero_scale():
    rd = reldist(np.array([0.0, 0.0]), np.array([0.0, 0.0]))
    assert rd[0] == 0.0


@pytest.mark.parametrize("scale, expected", [(0.5, 0.5), (1.0, 1.0), (10.0, 10.0)])
def test_growth_test(scale, expected):
    rep = Representation(np.array([scale, 0.1, -0.2]), np.zeros(2))
    assert growth_test(rep, 1.0) == expected


def test_shift_next_to_a_diagonal_cluster():
    v = 2.0
    rep = Representation(np.array([0.5, v, v, 5.0]), np.zeros(3))
    lo = np.array([v - 1e-12, v - 1e-12])
    hi = np.array([v + 1e-12, v + 1e-12])
    out = select_shift(rep, np.array([2, 3]), lo, hi, cfg(), spdiam_root=4.5)
    assert out.certified and out.attempts == 1
    assert out.tau == pytest.approx(v * (1 - 100 * EPS), rel=1e-14)
    assert out.element_growth <= 5.0 / 4.5 + 1e-12
    assert out.rep.depth == 1


def test_shift_refines_cluster_ends_in_place():
    rep = Representation(np.array([1.0, 1.0 + 1e-9, 3.0]), np.zeros(2))
    lo = np.array([0.9, 0.9])
    hi = np.array([1.1, 1.1])
    select_shift(rep, np.array([1, 2]), lo, hi, cfg(), spdiam_root=2.0)
    assert hi[0] - lo[0] < 1e-12
    assert hi[1] - lo[1] < 1e-12
