"""Root representations, and the classification and shifting of clusters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .qd import FactorizationFailure, Representation, shift_representation
from .sturm import bisect_ldl, bisect_t
from .tridiag import Interval, IrreducibleBlock, gershgorin


class RootFailure(ArithmeticError):
    pass


SINGLETON = "S"
CLUSTER = "C"


@dataclass(frozen=True)
class Partition:
    """Contiguous groups (start, stop) of positions, half-open, with kinds."""

    groups: list[tuple[int, int]]
    kinds: list[str]

    def __iter__(self):
        return iter(zip(self.groups, self.kinds))

    @property
    def largest(self) -> int:
        return max((b - a for a, b in self.groups), default=0)


@dataclass
class ShiftOutcome:
    rep: Representation
    tau: float
    element_growth: float
    certified: bool
    attempts: int = 1


@dataclass
class Root:
    rep: Representation
    mu: float
    spdiam: float
    growth: float


def growth_test(rep: Representation, spdiam_root: float) -> float:
    return float(np.max(np.abs(rep.d))) / spdiam_root


def spectral_diameter(block: IrreducibleBlock, eps: float) -> float:
    t = block.tridiag
    if t.n == 1:
        return 0.0
    g = gershgorin(t, eps)
    lo, hi = bisect_t(t, [1, t.n], g, rtol=1e-10)
    return float(0.5 * (lo[1] + hi[1]) - 0.5 * (lo[0] + hi[0]))


def make_root(block: IrreducibleBlock, cfg, rng: np.random.Generator) -> Root:
    """Definite LDL^* of the block shifted to one end of its Gershgorin interval.

    Both ends are tried and the factorization with less element growth wins
    (the left end on ties).  Every d_i and l_i is then multiplied by
    (1 + xi_i) with |xi_i| <= perturb_magnitude drawn from ``rng``.
    """
    t = block.tridiag
    eps = cfg.eps_work
    spdiam = spectral_diameter(block, eps)
    norm = spdiam if spdiam > 0 else max(abs(float(t.alpha[0])), 1.0)
    g = gershgorin(t, eps)
    width = max(g.hi - g.lo, abs(g.lo), abs(g.hi), np.finfo(float).tiny)
    for attempt in range(8):
        pad = (2.0**attempt - 1.0) * width * eps * (2 * t.n + 10)
        best = None
        for mu in (g.lo - pad, g.hi + pad):
            d, l = K.ldl_factor(t.alpha, t.beta, mu)
            if not (np.all(np.isfinite(d)) and np.all(np.isfinite(l))):
                continue
            growth = float(np.max(np.abs(d))) / norm
            if best is None or growth < best[0]:
                best = (growth, mu, d, l)
        if best is not None:
            break
    else:
        raise RootFailure(f"no finite root factorization for block at offset {block.offset}")
    growth, mu, d, l = best
    xi = cfg.perturb_magnitude
    d = d * (1.0 + xi * rng.uniform(-1.0, 1.0, d.size))
    l = l * (1.0 + xi * rng.uniform(-1.0, 1.0, l.size))
    return Root(Representation(d, l, shift_accum=mu, depth=0), mu, norm, growth)


def reldist(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Relative separation between consecutive brackets."""
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    if lo.size < 2:
        return np.empty(0)
    scale = np.maximum.reduce([np.abs(lo[:-1]), np.abs(hi[:-1]), np.abs(lo[1:]), np.abs(hi[1:])])
    gap = lo[1:] - hi[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        rd = np.where(scale > 0, gap / scale, np.where(gap > 0, np.inf, 0.0))
    return rd


def classify(lo, hi, gaptol: float) -> Partition:
    """Split sorted brackets where the relative gap reaches gaptol."""
    k = len(lo)
    cuts = np.flatnonzero(reldist(lo, hi) >= gaptol) + 1
    edges = [0, *cuts.tolist(), k]
    groups = [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    kinds = [SINGLETON if b - a == 1 else CLUSTER for a, b in groups]
    return Partition(groups, kinds)


def classify_intervals(evals: list[Interval], cfg) -> Partition:
    return classify([iv.lo for iv in evals], [iv.hi for iv in evals], cfg.gaptol)


def select_shift(
    rep: Representation,
    ks: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    cfg,
    spdiam_root: float,
) -> ShiftOutcome:
    """New representation close to a cluster.

    ``ks`` are the 1-based indices of the cluster in rep and ``lo``/``hi``
    their brackets; the first and last brackets are refined to full
    accuracy in place.  Candidate shifts sit just outside either end of
    the cluster and move further out while the element growth test fails.
    """
    eps = cfg.eps_work
    ends = np.array([ks[0], ks[-1]], dtype=np.int64)
    a = np.array([lo[0], lo[-1]])
    b = np.array([hi[0], hi[-1]])
    bisect_ldl(rep, ends, a, b, cfg.bisect_rtol_full)
    lo[0], hi[0] = a[0], b[0]
    lo[-1], hi[-1] = a[1], b[1]
    left = lo[0]
    right = hi[-1]
    tau_l = left - 100 * eps * abs(left)
    tau_r = right + 100 * eps * abs(right)
    best = None
    for attempt in range(cfg.max_shift_attempts):
        for tau in (tau_l, tau_r):
            try:
                child = shift_representation(rep, tau)
            except FactorizationFailure:
                continue
            growth = growth_test(child, spdiam_root)
            if best is None or growth < best.element_growth:
                best = ShiftOutcome(child, tau, growth, False, attempt + 1)
        if best is not None and best.element_growth <= cfg.growth_threshold:
            best.certified = True
            best.attempts = attempt + 1
            return best
        delta = 2.0**attempt * eps * spdiam_root
        tau_l -= delta
        tau_r += delta
    if best is None:
        raise FactorizationFailure("every candidate shift for the cluster failed")
    return best
