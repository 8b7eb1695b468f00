"""Recompute the frozen reference spectra used by the unit tests.

The matrices are built here from their textbook definitions, independently
of the package, and diagonalized with mpmath at 40 digits.  Run it with
``python3 tests/oracles/derive_frozen.py`` and paste the output into
``tests/frozen.py`` if a definition ever changes.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 40


def laguerre(n):
    return [2 * k + 1 for k in range(1, n + 1)], [k + 1 for k in range(1, n)]


def legendre(n):
    return [0] * n, [mp.mpf(j) / mp.sqrt((2 * j - 1) * (2 * j + 1)) for j in range(2, n + 1)]


def hermite(n):
    return [0] * n, [mp.sqrt(k) for k in range(1, n)]


def wilkinson(n):
    m = (n - 1) // 2
    return [abs(i) for i in range(-m, m + 1)], [1] * (n - 1)


def clement(n):
    return [0] * n, [mp.sqrt(k * (n - k)) for k in range(1, n)]


def spectrum(alpha, beta):
    n = len(alpha)
    a = mp.zeros(n)
    for i in range(n):
        a[i, i] = mp.mpf(alpha[i])
    for i in range(n - 1):
        # round to binary64 first, so the reference is for the stored matrix
        a[i, i + 1] = a[i + 1, i] = mp.mpf(float(beta[i]))
    e, _ = mp.eigsy(a)
    return sorted(e)


CASES = {
    "laguerre_5": laguerre(5),
    "legendre_6": legendre(6),
    "hermite_6": hermite(6),
    "wilkinson_21": wilkinson(21),
    "clement_5": clement(5),
}

if __name__ == "__main__":
    for name, (a, b) in CASES.items():
        vals = ", ".join(mp.nstr(x, 20) for x in spectrum(a, b))
        print(f"{name.upper()} = ({vals})")
