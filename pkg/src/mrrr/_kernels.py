"""Compiled inner loops.

Everything here works on plain float64 arrays and relies on IEEE 754
semantics (division by zero gives +-inf, never an exception), which is why
every kernel is compiled with ``error_model="numpy"``.
"""

import math

import numpy as np
from numba import njit

_jit = njit(cache=True, nogil=True, error_model="numpy")


@_jit
def signbit(x):
    return 1 if math.copysign(1.0, x) < 0.0 else 0


# --------------------------------------------------------------------------
# Sturm counts
# --------------------------------------------------------------------------


@_jit
def negcount_t(alpha, beta, sigma):
    n = alpha.shape[0]
    d = alpha[0] - sigma
    count = signbit(d)
    for i in range(1, n):
        b2 = beta[i - 1] * beta[i - 1]
        if b2 == 0.0:  # decoupled, possibly by underflow of beta^2
            d = alpha[i] - sigma
        else:
            d = (alpha[i] - sigma) - b2 / d
        count += signbit(d)
    return count


@_jit
def negcount_ldl(d, dll, sigma):
    n = d.shape[0]
    count = 0
    s = -sigma
    for i in range(n - 1):
        dplus = d[i] + s
        if math.isinf(s) and math.isinf(dplus):
            q = 1.0
        else:
            q = s / dplus
        if dll[i] == 0.0:
            # decoupled position: the update term vanishes identically
            s = -sigma
        else:
            s = q * dll[i] - sigma
        count += signbit(dplus)
    dplus = d[n - 1] + s
    count += signbit(dplus)
    return count


@_jit
def _bisect_ldl(d, dll, k, lo, hi, rtol, atol):
    """Bisect [lo, hi] for eigenvalue k (1-based). Returns (lo, hi, steps)."""
    steps = 0
    while True:
        width = hi - lo
        if width <= rtol * max(abs(lo), abs(hi)) or width <= atol:
            break
        mid = lo + 0.5 * width
        if mid <= lo or mid >= hi:
            break
        steps += 1
        if negcount_ldl(d, dll, mid) < k:
            lo = mid
        else:
            hi = mid
    return lo, hi, steps


@_jit
def _bisect_t(alpha, beta, k, lo, hi, rtol, atol):
    steps = 0
    while True:
        width = hi - lo
        if width <= rtol * max(abs(lo), abs(hi)) or width <= atol:
            break
        mid = lo + 0.5 * width
        if mid <= lo or mid >= hi:
            break
        steps += 1
        if negcount_t(alpha, beta, mid) < k:
            lo = mid
        else:
            hi = mid
    return lo, hi, steps


@_jit
def bracket_ldl(d, dll, k, lo, hi, grow):
    """Widen [lo, hi] geometrically until negcount(lo) < k <= negcount(hi).

    Returns (lo, hi, repairs).  Gives up after 64 widenings per side.
    """
    repairs = 0
    step = max(hi - lo, grow)
    for _ in range(64):
        if negcount_ldl(d, dll, lo) < k:
            break
        lo -= step
        step *= 2.0
        repairs += 1
    step = max(hi - lo, grow)
    for _ in range(64):
        if negcount_ldl(d, dll, hi) >= k:
            break
        hi += step
        step *= 2.0
        repairs += 1
    return lo, hi, repairs


@_jit
def bisect_many_ldl(d, dll, ks, lo, hi, rtol, atol, grow):
    """Bracket-repair and bisect a batch of eigenvalues of one LDL*.

    ``lo``/``hi`` are overwritten.  Returns (total steps, total repairs).
    """
    steps = 0
    repairs = 0
    for j in range(ks.shape[0]):
        a, b, rep = bracket_ldl(d, dll, ks[j], lo[j], hi[j], grow)
        a, b, st = _bisect_ldl(d, dll, ks[j], a, b, rtol, atol)
        lo[j] = a
        hi[j] = b
        steps += st
        repairs += rep
    return steps, repairs


@_jit
def bisect_many_t(alpha, beta, ks, glo, ghi, rtol, atol, lo, hi):
    steps = 0
    for j in range(ks.shape[0]):
        a, b, st = _bisect_t(alpha, beta, ks[j], glo, ghi, rtol, atol)
        lo[j] = a
        hi[j] = b
        steps += st
    return steps


# --------------------------------------------------------------------------
# qd transforms
# --------------------------------------------------------------------------


@_jit
def dstqds(d, dl, dll, tau):
    """L+ D+ L+^* = L D L^* - tau I (stationary, top-down)."""
    n = d.shape[0]
    dplus = np.empty(n)
    lplus = np.empty(max(n - 1, 0))
    s = np.empty(n)
    s[0] = -tau
    for i in range(n - 1):
        dplus[i] = s[i] + d[i]
        if math.isinf(s[i]) and math.isinf(dplus[i]):
            q = 1.0
        else:
            q = s[i] / dplus[i]
        if dll[i] == 0.0:  # decoupled, possibly by underflow of d*l*l
            lplus[i] = 0.0
            s[i + 1] = -tau
        else:
            lplus[i] = dl[i] / dplus[i]
            s[i + 1] = q * dll[i] - tau
    dplus[n - 1] = s[n - 1] + d[n - 1]
    return dplus, lplus, s


@_jit
def dqds(d, dl, dll, tau):
    """U- Omega- U-^* = L D L^* - tau I (progressive, bottom-up)."""
    n = d.shape[0]
    omega = np.empty(n)
    uminus = np.empty(max(n - 1, 0))
    p = np.empty(n)
    p[n - 1] = d[n - 1] - tau
    for i in range(n - 2, -1, -1):
        omega[i + 1] = p[i + 1] + dll[i]
        if dll[i] == 0.0 or (math.isinf(p[i + 1]) and math.isinf(omega[i + 1])):
            q = 1.0
        else:
            q = p[i + 1] / omega[i + 1]
        if dll[i] == 0.0:  # decoupled, possibly by underflow of d*l*l
            uminus[i] = 0.0
        else:
            uminus[i] = dl[i] / omega[i + 1]
        p[i] = q * d[i] - tau
    omega[0] = p[0]
    return omega, uminus, p


@_jit
def gammas(d, s, p, omega):
    n = d.shape[0]
    g = np.empty(n)
    for k in range(n - 1):
        g[k] = s[k] + d[k] / omega[k + 1] * p[k + 1]
    g[n - 1] = s[n - 1] + d[n - 1]
    return g


@_jit
def argmin_abs(g):
    """Index of the smallest |g_k|, NaN excluded, ties to the lowest index."""
    best = -1
    bestv = np.inf
    for k in range(g.shape[0]):
        v = abs(g[k])
        if v != v:
            continue
        if best < 0 or v < bestv:
            best = k
            bestv = v
    return best


@_jit
def ldl_factor(alpha, beta, mu):
    """Plain LDL^* of T - mu I; returns (d, l)."""
    n = alpha.shape[0]
    d = np.empty(n)
    l = np.empty(max(n - 1, 0))
    d[0] = alpha[0] - mu
    for i in range(n - 1):
        l[i] = beta[i] / d[i]
        d[i + 1] = (alpha[i + 1] - mu) - l[i] * beta[i]
    return d, l


# --------------------------------------------------------------------------
# Twisted solve
# --------------------------------------------------------------------------


@_jit
def twisted_solve(d, dl, dll, lam, rfix, thresh):
    """Solve N_r^* z = e_r for the twisted factorization of LDL^* - lam I.

    With ``rfix < 0`` both full factorizations are formed and r minimizes
    |gamma_k|; otherwise only the parts meeting at twist ``rfix`` are formed.
    Entries are zeroed once two consecutive |z_i| fall below ``thresh``
    (z_r = 1), which gives the numerical support [lo, hi].

    Returns (z, gamma_r, r, norm2, lo, hi, negcount, ops) where negcount is
    the inertia of the twisted factorization, i.e. the number of
    eigenvalues below lam.
    """
    n = d.shape[0]
    z = np.zeros(n)
    if rfix < 0:
        dplus, lplus, s = dstqds(d, dl, dll, lam)
        omega, uminus, p = dqds(d, dl, dll, lam)
        g = gammas(d, s, p, omega)
        r = argmin_abs(g)
        ops = 3 * n
        if r < 0:
            return z, np.nan, -1, np.nan, 0, -1, -1, ops
        gamma_r = g[r]
    else:
        r = rfix
        dplus = np.empty(n)
        lplus = np.empty(max(n - 1, 0))
        s = np.empty(n)
        s[0] = -lam
        for i in range(r):
            dplus[i] = s[i] + d[i]
            if math.isinf(s[i]) and math.isinf(dplus[i]):
                q = 1.0
            else:
                q = s[i] / dplus[i]
            if dll[i] == 0.0:  # decoupled, possibly by underflow of d*l*l
                lplus[i] = 0.0
                s[i + 1] = -lam
            else:
                lplus[i] = dl[i] / dplus[i]
                s[i + 1] = q * dll[i] - lam
        omega = np.empty(n)
        uminus = np.empty(max(n - 1, 0))
        p = np.empty(n)
        p[n - 1] = d[n - 1] - lam
        for i in range(n - 2, r - 1, -1):
            omega[i + 1] = p[i + 1] + dll[i]
            if dll[i] == 0.0 or (math.isinf(p[i + 1]) and math.isinf(omega[i + 1])):
                q = 1.0
            else:
                q = p[i + 1] / omega[i + 1]
            if dll[i] == 0.0:  # decoupled, possibly by underflow of d*l*l
                uminus[i] = 0.0
            else:
                uminus[i] = dl[i] / omega[i + 1]
            p[i] = q * d[i] - lam
        if r == n - 1:
            gamma_r = s[n - 1] + d[n - 1]
        else:
            gamma_r = s[r] + d[r] / omega[r + 1] * p[r + 1]
        ops = n

    neg = signbit(gamma_r)
    for i in range(r):
        neg += signbit(dplus[i])
    for i in range(r + 1, n):
        neg += signbit(omega[i])

    z[r] = 1.0
    lo = 0
    for i in range(r - 1, -1, -1):
        if dplus[i] != 0.0:
            z[i] = -lplus[i] * z[i + 1]
        elif i + 2 < n and dl[i] != 0.0:
            # zero pivot: step over it using the original factor
            z[i] = -(dl[i + 1] / dl[i]) * z[i + 2]
        else:
            z[i] = 0.0
        ops += 1
        if abs(z[i]) < thresh and abs(z[i + 1]) < thresh:
            z[i] = 0.0
            z[i + 1] = 0.0
            lo = i + 2
            break
    hi = n - 1
    for i in range(r, n - 1):
        if omega[i + 1] != 0.0:
            z[i + 1] = -uminus[i] * z[i]
        elif i >= 1 and dl[i] != 0.0:
            z[i + 1] = -(dl[i - 1] / dl[i]) * z[i - 1]
        else:
            z[i + 1] = 0.0
        ops += 1
        if abs(z[i + 1]) < thresh and abs(z[i]) < thresh:
            z[i] = 0.0
            z[i + 1] = 0.0
            hi = i - 1
            break
    norm2 = 0.0
    for i in range(lo, hi + 1):
        norm2 += z[i] * z[i]
    return z, gamma_r, r, norm2, lo, hi, neg, ops


# --------------------------------------------------------------------------
# Dense cyclic Jacobi (verification oracle)
# --------------------------------------------------------------------------


@_jit
def jacobi_cyclic(a, tol, max_sweeps):
    """Cyclic Jacobi on a dense symmetric matrix (overwritten).

    Returns (eigenvalues unsorted, eigenvectors as columns, sweeps).
    """
    n = a.shape[0]
    v = np.eye(n)
    sweeps = 0
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = math.sqrt(2.0 * off)
        if off <= tol:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - sn * akq
                    a[k, q] = sn * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - sn * aqk
                    a[q, k] = sn * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - sn * vkq
                    v[k, q] = sn * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweeps
