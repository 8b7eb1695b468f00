"""Accuracy, robustness, clustering and load-balance measures, plus a dense oracle."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as K
from .tridiag import Tridiagonal, one_norm

ORACLE_MAX_N = 512
EXACT_ORTHO_MAX_K = 4000


@dataclass
class QualityReport:
    n: int
    kind: str
    profile: str
    R: float
    O: float
    rho: float
    d_max: int
    phi_fail: bool
    workers: int
    t_values_s: float
    t_vectors_s: float
    uncertified_shift_count: int = 0
    total_shift_count: int = 0
    busy: list = field(default_factory=list)
    ortho_sampled: bool = False

    FIELDS = ("n", "kind", "profile", "R", "O", "rho", "d_max", "phi_fail", "workers",
              "t_values_s", "t_vectors_s")

    def as_row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in self.FIELDS}


def residual_orthogonality(t: Tridiagonal, values, vectors, block: int = 512,
                           sample: int = 64, seed: int = 0):
    """Largest relative residual (1-norm) and largest off-diagonal |x_i^T x_j|.

    Vectors in any float format are promoted to binary64 first.  Above
    ``EXACT_ORTHO_MAX_K`` columns, O is estimated from each vector against
    its neighbours and ``sample`` random partners.  Returns (R, O, sampled).
    """
    lam = np.asarray(values, dtype=np.float64)
    k = lam.size
    if k == 0:
        return 0.0, 0.0, False
    nrm = one_norm(t)
    R = 0.0
    for a in range(0, k, block):
        Z = np.asarray(vectors[:, a : a + block], dtype=np.float64)
        res = t.matvec(Z) - Z * lam[a : a + block]
        R = max(R, float(np.abs(res).sum(axis=0).max()))
    R = R / nrm if nrm > 0 else R
    O = 0.0
    sampled = k > EXACT_ORTHO_MAX_K
    Zall = np.asarray(vectors, dtype=np.float64)
    if not sampled:
        for a in range(0, k, block):
            G = Zall[:, a : a + block].T @ Zall
            idx = np.arange(G.shape[0])
            G[idx, a + idx] = 0.0
            O = max(O, float(np.abs(G).max()))
    else:
        rng = np.random.default_rng(seed)
        for i in range(k):
            partners = set(rng.integers(0, k, sample).tolist())
            partners.update(j for j in (i - 2, i - 1, i + 1, i + 2) if 0 <= j < k)
            partners.discard(i)
            p = np.fromiter(partners, dtype=np.int64)
            O = max(O, float(np.abs(Zall[:, p].T @ Zall[:, i]).max()))
    return R, O, sampled


def load_balance(busy) -> float:
    b = np.asarray(busy, dtype=np.float64)
    if b.size == 0 or b.max() <= 0:
        return 1.0
    return float(b.mean() / b.max())


def clustering(largest_cluster: int, n: int) -> float:
    """Largest top-level cluster (singletons count as 1) relative to n."""
    return max(int(largest_cluster), 1) / n


def phi_failed(uncertified: int, O: float, n: int, cfg) -> bool:
    """A run fails when any shift was uncertified or O exceeds its practical bound."""
    bound = max(n * cfg.eps_work / cfg.gaptol, cfg.eps_out * math.sqrt(n))
    return uncertified > 0 or O > bound


def robustness_phi(reports) -> float:
    reports = list(reports)
    if not reports:
        return 1.0
    fails = sum(bool(r.phi_fail) for r in reports)
    return 1.0 - fails / len(reports)


def oracle_eig(t: Tridiagonal, max_sweeps: int = 60):
    """Cyclic Jacobi on the dense matrix; returns ascending values and vectors."""
    n = t.n
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle limit: n={n} exceeds {ORACLE_MAX_N}")
    A = t.dense()
    tol = n * 2.0**-53 * float(np.linalg.norm(A))
    w, V, _ = K.jacobi_cyclic(A.copy(), tol, max_sweeps)
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def report_for(es, kind: str, cfg) -> QualityReport:
    R, O, sampled = residual_orthogonality(es.matrix, es.values, es.vectors)
    st = es.stats
    return QualityReport(
        n=es.n,
        kind=kind,
        profile=cfg.profile.name,
        R=R,
        O=O,
        rho=clustering(st.largest_cluster, es.n),
        d_max=st.d_max,
        phi_fail=phi_failed(st.uncertified_count, O, es.n, cfg),
        workers=cfg.worker_count,
        t_values_s=st.t_values,
        t_vectors_s=st.t_vectors,
        uncertified_shift_count=st.uncertified_count,
        total_shift_count=st.shift_count,
        busy=list(st.busy),
        ortho_sampled=sampled,
    )
