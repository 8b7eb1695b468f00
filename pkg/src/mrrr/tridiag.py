"""Symmetric tridiagonal matrices: storage, norms, splitting and bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EPS64 = 2.0**-53
TINY64 = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class Tridiagonal:
    """Diagonal ``alpha`` (n) and off-diagonal ``beta`` (n-1)."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.alpha, dtype=np.float64)
        b = np.ascontiguousarray(self.beta, dtype=np.float64)
        if a.ndim != 1 or b.ndim != 1:
            raise ValueError("alpha and beta must be one-dimensional")
        if a.size < 1:
            raise ValueError("n must be at least 1")
        if b.size != a.size - 1:
            raise ValueError(f"beta has {b.size} entries, expected {a.size - 1}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("entries must be finite")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def n(self) -> int:
        return self.alpha.size

    def dense(self) -> np.ndarray:
        return np.diag(self.alpha) + np.diag(self.beta, 1) + np.diag(self.beta, -1)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """T @ x for a vector or a matrix of column vectors."""
        a, b = self.alpha, self.beta
        if x.ndim == 1:
            y = a * x
            y[:-1] += b * x[1:]
            y[1:] += b * x[:-1]
            return y
        y = a[:, None] * x
        y[:-1] += b[:, None] * x[1:]
        y[1:] += b[:, None] * x[:-1]
        return y


@dataclass(frozen=True)
class IrreducibleBlock:
    offset: int
    tridiag: Tridiagonal


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.hi - self.lo)


def one_norm(t: Tridiagonal) -> float:
    col = np.abs(t.alpha).copy()
    col[:-1] += np.abs(t.beta)
    col[1:] += np.abs(t.beta)
    return float(col.max())


def split(t: Tridiagonal, cfg) -> list[IrreducibleBlock]:
    """Cut t wherever an off-diagonal is negligible against the whole matrix."""
    n = t.n
    tol = cfg.split_tol_factor * cfg.eps_work * math.sqrt(n) * one_norm(t)
    cuts = np.flatnonzero(np.abs(t.beta) <= tol)
    blocks = []
    start = 0
    for c in list(cuts) + [n - 1]:
        stop = int(c) + 1
        blocks.append(
            IrreducibleBlock(start, Tridiagonal(t.alpha[start:stop], t.beta[start : stop - 1]))
        )
        start = stop
    return blocks


def gershgorin(t: Tridiagonal, eps: float = EPS64) -> Interval:
    n = t.n
    r = np.zeros(n)
    ab = np.abs(t.beta)
    r[:-1] += ab
    r[1:] += ab
    gl = float(np.min(t.alpha - r))
    gu = float(np.max(t.alpha + r))
    bnorm = max(abs(gl), abs(gu))
    # a zero matrix still needs a non-empty bracket
    pad = max((2 * n + 10) * bnorm * eps, 2 * TINY64)
    return Interval(gl - pad, gu + pad)


def scale_factor(t: Tridiagonal) -> float:
    """Power of two bringing the 1-norm into a safe range (1.0 if already safe).

    The safe range is bounded by fourth roots of the underflow and overflow
    thresholds of binary64, so squares of entries stay representable.
    """
    nrm = one_norm(t)
    if nrm == 0.0:
        return 1.0
    small = TINY64**0.25
    large = np.finfo(np.float64).max ** 0.25
    if small <= nrm <= large:
        return 1.0
    target = small if nrm < small else large
    return float(2.0 ** math.floor(math.log2(target / nrm)))


def scaled(t: Tridiagonal, s: float) -> Tridiagonal:
    if s == 1.0:
        return t
    return Tridiagonal(t.alpha * s, t.beta * s)


# --------------------------------------------------------------------------
# text format: n, then alpha, then beta, one number per line
# --------------------------------------------------------------------------


def write_matrix(t: Tridiagonal, path) -> None:
    lines = [str(t.n)]
    lines += [f"{v:.17g}" for v in t.alpha]
    lines += [f"{v:.17g}" for v in t.beta]
    Path(path).write_text("\n".join(lines) + "\n")


class MatrixFormatError(ValueError):
    pass


def read_matrix(path) -> Tridiagonal:
    tokens = Path(path).read_text().split()
    if not tokens:
        raise MatrixFormatError("empty matrix file")
    try:
        n = int(tokens[0])
    except ValueError:
        raise MatrixFormatError(f"first line must be an integer, got {tokens[0]!r}") from None
    if n < 1:
        raise MatrixFormatError("n must be at least 1")
    if len(tokens) != 2 * n:
        raise MatrixFormatError(f"expected {2 * n - 1} numbers after n, found {len(tokens) - 1}")
    try:
        vals = np.array([float(x) for x in tokens[1:]])
    except ValueError as e:
        raise MatrixFormatError(str(e)) from None
    try:
        return Tridiagonal(vals[:n], vals[n:])
    except ValueError as e:
        raise MatrixFormatError(str(e)) from None
