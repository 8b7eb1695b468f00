"""Sturm counts and bisection, for plain tridiagonals and LDL* factors."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from . import _kernels as K
from .qd import Representation
from .tridiag import Interval, Tridiagonal

UNDERFLOW = float(np.finfo(np.float64).tiny)
ATOL = 2 * UNDERFLOW
K_RR = 10


def negcount_t(t: Tridiagonal, sigma: float) -> int:
    """Number of eigenvalues of t strictly below sigma."""
    return int(K.negcount_t(t.alpha, t.beta, float(sigma)))


def negcount_ldl(rep: Representation, sigma: float) -> int:
    """Number of eigenvalues of L D L^* strictly below sigma."""
    return int(K.negcount_ldl(rep.d, rep.dll, float(sigma)))


def bisect(
    counter: Callable[[float], int],
    k: int,
    start: Interval,
    rtol: float,
    atol: float = ATOL,
    max_inflate: int = 64,
) -> Interval:
    """Shrink ``start`` around eigenvalue k (1-based) of the counted spectrum.

    If ``start`` does not bracket eigenvalue k it is widened geometrically
    first.  Stops once the width is below rtol relative to the endpoints or
    below atol.
    """
    lo, hi = float(start.lo), float(start.hi)
    step = max(hi - lo, atol, abs(lo) * 1e-15, abs(hi) * 1e-15)
    for _ in range(max_inflate):
        if counter(lo) < k:
            break
        lo -= step
        step *= 2
    else:
        raise ArithmeticError(f"cannot bracket eigenvalue {k} from below")
    step = max(hi - lo, atol)
    for _ in range(max_inflate):
        if counter(hi) >= k:
            break
        hi += step
        step *= 2
    else:
        raise ArithmeticError(f"cannot bracket eigenvalue {k} from above")
    while True:
        width = hi - lo
        if width <= rtol * max(abs(lo), abs(hi)) or width <= atol:
            break
        mid = lo + 0.5 * width
        if mid <= lo or mid >= hi:
            break
        if counter(mid) < k:
            lo = mid
        else:
            hi = mid
    return Interval(lo, hi)


def bisect_t(t: Tridiagonal, ks, start: Interval, rtol: float, atol: float = ATOL):
    """Batched bisection on t for the 1-based indices ``ks``; returns (lo, hi)."""
    ks = np.ascontiguousarray(ks, dtype=np.int64)
    lo = np.empty(ks.size)
    hi = np.empty(ks.size)
    K.bisect_many_t(t.alpha, t.beta, ks, start.lo, start.hi, rtol, atol, lo, hi)
    return lo, hi


def bisect_ldl(
    rep: Representation, ks, lo: np.ndarray, hi: np.ndarray, rtol: float, atol: float = ATOL
):
    """In-place batched bisection of [lo, hi] for indices ``ks`` of rep.

    Brackets that fail the count test are widened first.  Returns
    (bisection steps, bracket repairs).
    """
    ks = np.ascontiguousarray(ks, dtype=np.int64)
    grow = max(atol, 4 * 2.0**-53 * float(np.max(np.abs(np.concatenate([lo, hi])), initial=0.0)))
    steps, repairs = K.bisect_many_ldl(rep.d, rep.dll, ks, lo, hi, rtol, atol, grow)
    return int(steps), int(repairs)


def inflate_shifted(lo, hi, tau: float, nu: float):
    """Map parent brackets to brackets for the parent minus tau, widened by nu."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    a = np.where(lo > 0, lo * (1 - nu), lo * (1 + nu)) - tau
    b = np.where(hi > 0, hi * (1 + nu), hi * (1 - nu)) - tau
    a = np.where(a > 0, a * (1 - nu), a * (1 + nu))
    b = np.where(b > 0, b * (1 + nu), b * (1 - nu))
    return a, b


def refine_all(
    rep: Representation,
    indices: Sequence[int],
    intervals: Sequence[Interval],
    rtol: float,
    tau: float = 0.0,
    eps: float = 2.0**-53,
) -> list[Interval]:
    """Carry brackets of the parent over to rep = parent - tau I and bisect them.

    ``indices`` are 1-based eigenvalue indices of rep.
    """
    nu = 10 * K_RR * rep.n * eps
    lo, hi = inflate_shifted([iv.lo for iv in intervals], [iv.hi for iv in intervals], tau, nu)
    bisect_ldl(rep, indices, lo, hi, rtol)
    return [Interval(a, b) for a, b in zip(lo, hi)]


def bisect_steps_bound(width0: float, atol: float = ATOL) -> int:
    return math.ceil(math.log2(width0 / atol)) + 2
