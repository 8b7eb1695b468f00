"""Eigenvectors from twisted factorizations, and the singleton RQI loop."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .qd import Representation
from .sturm import bisect_ldl


class GetvecFailure(ArithmeticError):
    pass


@dataclass
class EigenPair:
    index: int  # 1-based index within the representation
    value: float  # eigenvalue of the original matrix (lambda_hat + shift)
    local_value: float  # eigenvalue of the representation
    vector: np.ndarray
    support: tuple[int, int]
    rqi_iters: int
    residual_est: float
    bracket: tuple[float, float]
    fallback: bool = False
    ops: int = 0


def getvec(rep: Representation, lam: float, rfix: int = -1, thresh: float = 2.0**-53):
    """Vector z with (LDL^* - lam I) z = gamma_r e_r, normalized to unit length.

    Returns (z, gamma_r, r).  Raises GetvecFailure if the recurrences break
    down.
    """
    z, g, r, nrm2, lo, hi, neg, ops = K.twisted_solve(rep.d, rep.dl, rep.dll, float(lam), rfix, thresh)
    if r < 0 or not math.isfinite(nrm2) or nrm2 <= 0.0 or not math.isfinite(g):
        raise GetvecFailure(f"twisted solve failed at lambda={lam!r}")
    return z / math.sqrt(nrm2), float(g), int(r)


def rqi_singleton(
    rep: Representation,
    k: int,
    lo: float,
    hi: float,
    cfg,
    gap: float,
) -> EigenPair:
    """Eigenpair k (1-based) of rep, starting from the bracket [lo, hi].

    Rayleigh quotient iteration on the twisted factorization.  Each step
    also yields the inertia at the current shift, which both tightens the
    bracket and catches drift toward a neighbouring eigenvalue; any such
    problem, or running out of iterations, falls back to bisection to full
    accuracy followed by a single solve.
    """
    n = rep.n
    d, dl, dll = rep.d, rep.dl, rep.dll
    eps = cfg.eps_work
    tol1 = cfg.tol1(n)
    tol2 = cfg.rqi_tol2
    thresh = eps
    lam = 0.5 * (lo + hi)
    r = -1
    ops = 0
    it = 0
    ok = False
    while it < cfg.max_rqi_iters:
        it += 1
        z, g, r_new, nrm2, s_lo, s_hi, neg, nops = K.twisted_solve(d, dl, dll, lam, r, thresh)
        ops += nops
        if r_new < 0 or not (math.isfinite(nrm2) and nrm2 > 0.0 and math.isfinite(g)):
            break
        r = r_new
        below = neg < k
        if below:
            lo = max(lo, lam)
        else:
            hi = min(hi, lam)
        if neg < k - 1 or neg > k:
            break
        nz = math.sqrt(nrm2)
        resid = abs(g) / nz
        if resid < tol1 * gap or resid / nz < tol2 * abs(lam):
            ok = True
            break
        new = lam + g / nrm2
        if (new > lam) != below or not (lo < new < hi):
            break
        lam = new
    fallback = not ok
    if fallback:
        a = np.array([lo])
        b = np.array([hi])
        steps, _ = bisect_ldl(rep, [k], a, b, cfg.bisect_rtol_full)
        ops += steps * n
        lo, hi = float(a[0]), float(b[0])
        lam = 0.5 * (lo + hi)
        z, g, r, nrm2, s_lo, s_hi, neg, nops = K.twisted_solve(d, dl, dll, lam, -1, thresh)
        ops += nops
        if r < 0 or not (math.isfinite(nrm2) and nrm2 > 0.0):
            raise GetvecFailure(f"eigenvector {k} could not be formed at lambda={lam!r}")
        nz = math.sqrt(nrm2)
        resid = abs(g) / nz
    elif cfg.final_rqc:
        new = lam + g / nrm2
        if lo < new < hi:
            lam = new
    vec = z / nz
    return EigenPair(
        index=k,
        value=lam + rep.shift_accum,
        local_value=lam,
        vector=vec,
        support=(int(s_lo), int(s_hi)),
        rqi_iters=it,
        residual_est=resid,
        bracket=(lo, hi),
        fallback=fallback,
        ops=ops,
    )
