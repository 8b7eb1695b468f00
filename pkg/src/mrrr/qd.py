"""LDL* representations and the differential qd transforms that shift them."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K


class FactorizationFailure(ArithmeticError):
    """A shifted factorization produced NaN pivots."""


class TwistFailure(ArithmeticError):
    """Every twist pivot gamma_k is NaN."""


class RefCount:
    """Thread-safe counter of tasks still reading a representation."""

    def __init__(self, value: int = 0):
        self._v = value
        self._lock = threading.Lock()

    def add(self, k: int = 1) -> int:
        with self._lock:
            self._v += k
            return self._v

    def release(self) -> int:
        with self._lock:
            self._v -= 1
            return self._v

    @property
    def value(self) -> int:
        return self._v


def _frozen(x) -> np.ndarray:
    a = np.ascontiguousarray(x, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass
class Representation:
    """L D L^* with unit lower bidiagonal L, stored by its entries d and l.

    ``shift_accum`` is the total shift from the original (unsplit) matrix,
    so an eigenvalue x of this representation is x + shift_accum there.
    """

    d: np.ndarray
    l: np.ndarray
    shift_accum: float = 0.0
    depth: int = 0
    dl: np.ndarray = field(init=False, repr=False)
    dll: np.ndarray = field(init=False, repr=False)
    dependents: RefCount = field(default_factory=RefCount, repr=False, compare=False)

    def __post_init__(self):
        self.d = _frozen(self.d)
        self.l = _frozen(self.l)
        if self.l.size != max(self.d.size - 1, 0):
            raise ValueError("l must have n-1 entries")
        if not (np.all(np.isfinite(self.d)) and np.all(np.isfinite(self.l))):
            raise FactorizationFailure("representation has non-finite entries")
        dl = self.d[:-1] * self.l
        self.dl = _frozen(dl)
        self.dll = _frozen(dl * self.l)

    @property
    def n(self) -> int:
        return self.d.size

    def tridiagonal(self):
        """Multiply out L D L^* (diagonal, off-diagonal)."""
        diag = self.d.copy()
        diag[1:] += self.dll
        return diag, self.dl.copy()


@dataclass(frozen=True)
class StationaryResult:
    dplus: np.ndarray
    lplus: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class ProgressiveResult:
    omega_minus: np.ndarray
    uminus: np.ndarray
    p: np.ndarray


@dataclass(frozen=True)
class TwistData:
    dplus: np.ndarray
    lplus: np.ndarray
    s: np.ndarray
    omega_minus: np.ndarray
    uminus: np.ndarray
    p: np.ndarray
    gamma: np.ndarray
    r: int


def dstqds(rep: Representation, tau: float) -> StationaryResult:
    dplus, lplus, s = K.dstqds(rep.d, rep.dl, rep.dll, float(tau))
    if np.isnan(dplus).any():
        raise FactorizationFailure(f"stationary transform with shift {tau!r} hit NaN")
    return StationaryResult(dplus, lplus, s)


def dqds(rep: Representation, tau: float) -> ProgressiveResult:
    omega, uminus, p = K.dqds(rep.d, rep.dl, rep.dll, float(tau))
    if np.isnan(omega).any():
        raise FactorizationFailure(f"progressive transform with shift {tau!r} hit NaN")
    return ProgressiveResult(omega, uminus, p)


def compute_gammas(rep: Representation, lam: float) -> TwistData:
    dplus, lplus, s = K.dstqds(rep.d, rep.dl, rep.dll, float(lam))
    omega, uminus, p = K.dqds(rep.d, rep.dl, rep.dll, float(lam))
    g = K.gammas(rep.d, s, p, omega)
    r = int(K.argmin_abs(g))
    if r < 0:
        raise TwistFailure(f"no usable twist index at lambda={lam!r}")
    return TwistData(dplus, lplus, s, omega, uminus, p, g, r)


def shift_representation(rep: Representation, tau: float) -> Representation:
    st = dstqds(rep, tau)
    return Representation(
        st.dplus, st.lplus, shift_accum=rep.shift_accum + tau, depth=rep.depth + 1
    )
