"""Precision profiles and the solver configuration built from them."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

EPS_SINGLE = 2.0**-24
EPS_DOUBLE = 2.0**-53


@dataclass(frozen=True)
class Profile:
    name: str
    eps_out: float
    eps_work: float
    gaptol: float
    perturb: float
    rqi_mode: str  # "classic" or "relaxed"
    out_dtype: type = np.float64

    @property
    def mixed(self) -> bool:
        return self.eps_out > self.eps_work

    def kelg_bound(self, n: int) -> float:
        """Largest element growth the accuracy model tolerates at size n."""
        return max(10.0, self.eps_out / (self.eps_work * math.sqrt(n)))

    def krr_bound(self, n: int) -> float:
        """Largest eigenvalue-refinement constant the accuracy model tolerates."""
        return max(10.0, self.eps_out / (self.eps_work * math.sqrt(n)) * self.gaptol)


def standard64() -> Profile:
    return Profile(
        name="std64",
        eps_out=EPS_DOUBLE,
        eps_work=EPS_DOUBLE,
        gaptol=1e-3,
        perturb=8 * EPS_DOUBLE,
        rqi_mode="classic",
        out_dtype=np.float64,
    )


def mixed32in64(n: int = 1) -> Profile:
    """Single-precision input/output, double-precision arithmetic."""
    p = Profile(
        name="mixed32",
        eps_out=EPS_SINGLE,
        eps_work=EPS_DOUBLE,
        gaptol=1e-5,
        # half the output unit roundoff: the root perturbation alone then uses
        # about half of the eps_out*sqrt(n) residual budget, leaving room for
        # rounding the results to binary32
        perturb=EPS_SINGLE / 2,
        rqi_mode="relaxed",
        out_dtype=np.float32,
    )
    lower = p.eps_work * math.sqrt(n) / p.eps_out
    if n * p.eps_work > p.eps_out * math.sqrt(n) or lower > p.gaptol:
        raise ValueError(f"n={n} is too large for the mixed single/double profile")
    return p


def profile_by_name(name: str, n: int = 1) -> Profile:
    if name in ("std64", "standard64"):
        return standard64()
    if name in ("mixed32", "mixed32in64"):
        return mixed32in64(n)
    raise ValueError(f"unknown profile {name!r}")


def convert_out(v: np.ndarray, profile: Profile) -> np.ndarray:
    """Round a unit working-precision vector to the output format and renormalize."""
    if profile.out_dtype == np.float64:
        return np.asarray(v, dtype=np.float64)
    w = np.asarray(v, dtype=profile.out_dtype)
    nrm = np.linalg.norm(w.astype(np.float64))
    if nrm == 0.0 or nrm == 1.0:
        return w
    return (w / np.float32(nrm)).astype(profile.out_dtype)


def default_workers() -> int:
    env = os.environ.get("MRRR_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SolverConfig:
    profile: Profile = field(default_factory=standard64)
    gaptol: float | None = None
    split_tol_factor: float | None = None
    perturb_magnitude: float | None = None
    rqi_tol1: float | None = None
    rqi_tol2: float | None = None
    bisect_rtol_classify: float | None = None
    bisect_rtol_full: float | None = None
    max_shift_attempts: int = 6
    worker_count: int = 1
    seed: int = 0
    growth_threshold: float = 64.0
    max_rqi_iters: int = 10
    final_rqc: bool = False
    depth_first: bool | None = None
    max_depth: int = 12
    min_rtask_cluster: int = 64

    def __post_init__(self):
        p = self.profile
        defaults = dict(
            gaptol=p.gaptol,
            # mixed: the split threshold scales with the output precision
            split_tol_factor=p.eps_out / p.eps_work,
            perturb_magnitude=p.perturb,
            rqi_tol2=4 * p.eps_work,
            bisect_rtol_full=4 * p.eps_work,
            depth_first=p.mixed,
        )
        for k, v in defaults.items():
            if getattr(self, k) is None:
                object.__setattr__(self, k, v)
        if self.bisect_rtol_classify is None:
            object.__setattr__(self, "bisect_rtol_classify", 1e-2 * self.gaptol)
        if not 0 < self.gaptol < 1:
            raise ValueError("gaptol must lie in (0, 1)")
        if self.worker_count < 1:
            raise ValueError("worker_count must be at least 1")
        if self.max_shift_attempts < 1:
            raise ValueError("max_shift_attempts must be at least 1")

    @property
    def eps_work(self) -> float:
        return self.profile.eps_work

    @property
    def eps_out(self) -> float:
        return self.profile.eps_out

    def tol1(self, n: int) -> float:
        """Residual-over-gap threshold for accepting a singleton eigenvector."""
        if self.rqi_tol1 is not None:
            return self.rqi_tol1
        if self.profile.rqi_mode == "relaxed":
            return self.eps_out * math.sqrt(n)
        return n * self.eps_work

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)
