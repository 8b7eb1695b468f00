"""The eight families of test matrices."""

from __future__ import annotations

import numpy as np

from .tridiag import Tridiagonal

KINDS = (
    "uniform",
    "geometric",
    "one21",
    "clement",
    "wilkinson",
    "legendre",
    "laguerre",
    "hermite",
)

_ALIASES = {
    "onetwoone": "one21",
    "1-2-1": "one21",
    "121": "one21",
}

EPS = 2.0**-53


def canonical(kind: str) -> str:
    k = kind.lower().replace("_", "")
    k = _ALIASES.get(k, k)
    if k not in KINDS:
        raise ValueError(f"unknown matrix kind {kind!r}; choose from {', '.join(KINDS)}")
    return k


def generate(kind: str, n: int) -> Tridiagonal:
    kind = canonical(kind)
    if n < 1:
        raise ValueError("n must be at least 1")
    k = np.arange(1, n, dtype=np.float64)  # 1..n-1
    zeros = np.zeros(n - 1)
    if kind == "uniform":
        # eigenvalues eps + (k-1)(1-eps)/(n-1), carried on the diagonal
        if n == 1:
            return Tridiagonal(np.ones(1), zeros)
        a = EPS + np.arange(n) * (1 - EPS) / (n - 1)
        return Tridiagonal(a, zeros)
    if kind == "geometric":
        # eigenvalues eps^((n-k)/(n-1))
        if n == 1:
            return Tridiagonal(np.ones(1), zeros)
        a = EPS ** ((n - np.arange(1, n + 1)) / (n - 1))
        return Tridiagonal(a, zeros)
    if kind == "one21":
        return Tridiagonal(np.full(n, 2.0), np.ones(n - 1))
    if kind == "clement":
        return Tridiagonal(np.zeros(n), np.sqrt(k * (n - k)))
    if kind == "wilkinson":
        if n % 2 == 0:
            raise ValueError("n must be odd for Wilkinson matrices")
        m = (n - 1) // 2
        a = np.abs(np.arange(-m, m + 1, dtype=np.float64))
        return Tridiagonal(a, np.ones(n - 1))
    if kind == "legendre":
        j = k + 1  # beta_j for j = 2..n
        return Tridiagonal(np.zeros(n), j / np.sqrt((2 * j - 1) * (2 * j + 1)))
    if kind == "laguerre":
        return Tridiagonal(2.0 * np.arange(1, n + 1) + 1.0, k + 1.0)
    if kind == "hermite":
        return Tridiagonal(np.zeros(n), np.sqrt(k))
    raise AssertionError(kind)


def one21_eigenvalues(n: int) -> np.ndarray:
    return 2.0 - 2.0 * np.cos(np.pi * np.arange(1, n + 1) / (n + 1))
