"""Top-level solver: root setup, initial bisection and the task machinery."""

from __future__ import annotations

import math
import threading
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .profiles import SolverConfig, convert_out
from .qd import Representation
from .rrr import SINGLETON, Partition, classify, make_root, reldist, select_shift
from .sturm import K_RR, bisect_ldl, bisect_t, inflate_shifted, negcount_t
from .tridiag import (
    IrreducibleBlock,
    Tridiagonal,
    gershgorin,
    scale_factor,
    scaled,
    split,
)
from .vector import rqi_singleton


class SelectionError(ValueError):
    """The requested index or value range is malformed."""


# --------------------------------------------------------------------------
# selections
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Selection:
    kind: str = "all"  # "all", "index" or "value"
    il: int = 0
    iu: int = 0
    vl: float = 0.0
    vu: float = 0.0


def All() -> Selection:
    return Selection("all")


def ByIndex(il: int, iu: int) -> Selection:
    """Eigenpairs il..iu (1-based, inclusive) in ascending order."""
    return Selection("index", il=int(il), iu=int(iu))


def ByValue(vl: float, vu: float) -> Selection:
    """Eigenpairs with eigenvalue in [vl, vu)."""
    return Selection("value", vl=float(vl), vu=float(vu))


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------


@dataclass
class SolveStats:
    d_max: int = 0
    largest_cluster: int = 1
    shift_count: int = 0
    uncertified_count: int = 0
    ops_values: int = 0
    ops_vectors: int = 0
    rqi_iters: int = 0
    rqi_max_iters: int = 0
    rqi_fallbacks: int = 0
    bracket_repairs: int = 0
    rtasks: int = 0
    depth_guard_hits: int = 0
    max_growth: float = 0.0
    busy: list = field(default_factory=list)
    t_values: float = 0.0
    t_vectors: float = 0.0
    blocks: int = 0
    write_counts: np.ndarray | None = None  # writes per output column

    def merge(self, o: "SolveStats") -> None:
        self.d_max = max(self.d_max, o.d_max)
        self.largest_cluster = max(self.largest_cluster, o.largest_cluster)
        self.max_growth = max(self.max_growth, o.max_growth)
        self.rqi_max_iters = max(self.rqi_max_iters, o.rqi_max_iters)
        for k in (
            "shift_count",
            "uncertified_count",
            "ops_values",
            "ops_vectors",
            "rqi_iters",
            "rqi_fallbacks",
            "bracket_repairs",
            "rtasks",
            "depth_guard_hits",
        ):
            setattr(self, k, getattr(self, k) + getattr(o, k))


@dataclass
class EigenSystem:
    n: int
    requested: np.ndarray  # 1-based global indices, ascending
    values: np.ndarray
    errors: np.ndarray
    vectors: np.ndarray | None  # n x k, column-major
    stats: SolveStats
    matrix: Tridiagonal  # the matrix actually solved (rounded for mixed)

    @property
    def k(self) -> int:
        return self.values.size


# --------------------------------------------------------------------------
# work units
# --------------------------------------------------------------------------


@dataclass
class BlockCtx:
    block: IrreducibleBlock
    first: int  # first requested local index (1-based)
    last: int
    col0: int  # output column of local index ``first``
    root: object = None
    spdiam: float = 0.0


@dataclass
class Node:
    """Brackets for consecutive eigenvalues of one representation."""

    rep: Representation
    ks: np.ndarray  # 1-based indices within rep
    lo: np.ndarray
    hi: np.ndarray
    lgap: float
    rgap: float
    bctx: BlockCtx


@dataclass
class Task:
    kind: str  # "S", "C" or "R"
    node: Node
    start: int
    stop: int
    join: object = None

    @property
    def rep(self):
        return self.node.rep


@dataclass
class _Join:
    """Shared state of the R-tasks refining one child representation."""

    parent: Node
    child: Node
    start: int
    stop: int
    remaining: int
    lock: threading.Lock = field(default_factory=threading.Lock)


class _Ctx:
    def __init__(self, cfg: SolverConfig, n: int, k: int, out_dtype, want_vectors: bool):
        self.cfg = cfg
        self.workers = cfg.worker_count
        self.values = np.zeros(k)
        self.errors = np.zeros(k)
        self.vectors = np.zeros((n, k), dtype=out_dtype, order="F") if want_vectors else None
        self.writes = np.zeros(k, dtype=np.int64)
        self.nleft = k
        self.scale = 1.0
        self.lock = threading.Lock()
        self.sched: _Scheduler | None = None

    def s_max(self) -> int:
        return max(1, math.ceil(self.nleft / self.workers))


# --------------------------------------------------------------------------
# scheduler: three FIFO queues polled high (R) -> medium (S) -> low (C)
# --------------------------------------------------------------------------


class _Scheduler:
    PRIORITY = ("R", "S", "C")

    def __init__(self, ctx: _Ctx, workers: int):
        self.ctx = ctx
        self.workers = workers
        self.queues = {k: deque() for k in self.PRIORITY}
        self.cond = threading.Condition()
        self.pending = 0
        self.error: BaseException | None = None
        self.stats = [SolveStats() for _ in range(workers)]
        self.busy = [0.0] * workers

    def submit(self, task: Task) -> None:
        with self.cond:
            self.queues[task.kind].append(task)
            self.pending += 1
            self.cond.notify()

    def _pop(self):
        for k in self.PRIORITY:
            if self.queues[k]:
                return self.queues[k].popleft()
        return None

    def _worker(self, wid: int) -> None:
        st = self.stats[wid]
        while True:
            with self.cond:
                while True:
                    if self.error is not None or self.pending == 0:
                        return
                    task = self._pop()
                    if task is not None:
                        break
                    self.cond.wait()
            t0 = time.thread_time()
            try:
                run_task(task, self.ctx, st)
            except BaseException as e:  # surfaced in run()
                with self.cond:
                    if self.error is None:
                        self.error = e
                    self.cond.notify_all()
                return
            finally:
                self.busy[wid] += time.thread_time() - t0
            with self.cond:
                self.pending -= 1
                if self.pending == 0:
                    self.cond.notify_all()

    def run(self) -> None:
        if self.workers == 1:
            self._worker(0)
        else:
            threads = [
                threading.Thread(target=self._worker, args=(w,), daemon=True)
                for w in range(self.workers)
            ]
            for th in threads:
                th.start()
            for th in threads:
                th.join()
        if self.error is not None:
            raise self.error


def run_task(task: Task, ctx: _Ctx, st: SolveStats) -> None:
    if task.kind == "S":
        run_s_task(task, ctx, st)
    elif task.kind == "C":
        run_c_task(task, ctx, st)
    else:
        run_r_task(task, ctx, st)
    task.node.rep.dependents.release()


def _dispatch(task: Task, ctx: _Ctx, st: SolveStats, inline: bool) -> None:
    task.node.rep.dependents.add()
    if inline:
        run_task(task, ctx, st)
    else:
        ctx.sched.submit(task)


def emit(node: Node, part: Partition, ctx: _Ctx, st: SolveStats, inline: bool) -> None:
    """Turn a partition of ``node`` into S-tasks (bundled) and C-tasks."""
    smax = ctx.s_max()
    run_start = None
    tasks = []
    for (a, b), kind in part:
        if kind == SINGLETON:
            if run_start is None:
                run_start = a
            if b - run_start >= smax:
                tasks.append(Task("S", node, run_start, b))
                run_start = None
        else:
            if run_start is not None:
                tasks.append(Task("S", node, run_start, a))
                run_start = None
            tasks.append(Task("C", node, a, b))
    if run_start is not None:
        tasks.append(Task("S", node, run_start, part.groups[-1][1]))
    for t in tasks:
        _dispatch(t, ctx, st, inline)


# --------------------------------------------------------------------------
# tasks
# --------------------------------------------------------------------------


def _gap(node: Node, j: int) -> float:
    lg = node.lo[j] - node.hi[j - 1] if j > 0 else node.lgap
    rg = node.lo[j + 1] - node.hi[j] if j < node.ks.size - 1 else node.rgap
    g = min(lg, rg)
    if not math.isfinite(g):
        g = max(abs(node.lo[j]), abs(node.hi[j]), node.bctx.spdiam)
    return max(g, 0.0)


def run_s_task(task: Task, ctx: _Ctx, st: SolveStats) -> None:
    node = task.node
    b = node.bctx
    cfg = ctx.cfg
    rep = node.rep
    off = b.block.offset
    m = b.block.tridiag.n
    scale = ctx.scale
    done = 0
    for j in range(task.start, task.stop):
        k = int(node.ks[j])
        if k < b.first or k > b.last:
            continue  # computed only to keep cluster edges intact
        ep = rqi_singleton(rep, k, float(node.lo[j]), float(node.hi[j]), cfg, _gap(node, j))
        col = b.col0 + (k - b.first)
        ctx.writes[col] += 1
        ctx.values[col] = ep.value / scale
        ctx.errors[col] = 0.5 * (ep.bracket[1] - ep.bracket[0]) / scale
        if ctx.vectors is not None:
            ctx.vectors[off : off + m, col] = convert_out(ep.vector, cfg.profile)
        st.ops_vectors += ep.ops
        st.rqi_iters += ep.rqi_iters
        st.rqi_max_iters = max(st.rqi_max_iters, ep.rqi_iters)
        st.rqi_fallbacks += int(ep.fallback)
        st.d_max = max(st.d_max, rep.depth)
        done += 1
    with ctx.lock:
        ctx.nleft -= done


def _depth_guard(task: Task, ctx: _Ctx, st: SolveStats) -> None:
    """Too deep: treat the remaining cluster members as singletons."""
    st.depth_guard_hits += 1
    st.uncertified_count += 1
    node = task.node
    for j in range(task.start, task.stop):
        _dispatch(Task("S", node, j, j + 1), ctx, st, inline=True)


def run_c_task(task: Task, ctx: _Ctx, st: SolveStats) -> None:
    cfg = ctx.cfg
    node = task.node
    a, b = task.start, task.stop
    if node.rep.depth >= cfg.max_depth:
        _depth_guard(task, ctx, st)
        return
    ks = node.ks[a:b]
    lo = node.lo[a:b].copy()
    hi = node.hi[a:b].copy()
    out = select_shift(node.rep, ks, lo, hi, cfg, node.bctx.spdiam)
    n = node.rep.n
    st.ops_vectors += 2 * out.attempts * n
    st.shift_count += 1
    st.uncertified_count += int(not out.certified)
    st.max_growth = max(st.max_growth, out.element_growth)
    nu = 10 * K_RR * n * cfg.eps_work
    clo, chi = inflate_shifted(lo, hi, out.tau, nu)
    lgap = node.lo[a] - node.hi[a - 1] if a > 0 else node.lgap
    rgap = node.lo[b] - node.hi[b - 1] if b < node.ks.size else node.rgap
    child = Node(out.rep, ks.copy(), clo, chi, lgap, rgap, node.bctx)
    size = b - a
    smax = ctx.s_max()
    if not cfg.depth_first and size > max(smax, cfg.min_rtask_cluster):
        pieces = [(i, min(i + smax, size)) for i in range(0, size, smax)]
        join = _Join(node, child, a, b, len(pieces))
        st.rtasks += len(pieces)
        for p, q in pieces:
            _dispatch(Task("R", child, p, q, join), ctx, st, inline=False)
        return
    _refine(child, 0, size, ctx, st)
    _finish_cluster(child, ctx, st)


def _refine(child: Node, p: int, q: int, ctx: _Ctx, st: SolveStats) -> None:
    lo = child.lo[p:q]
    hi = child.hi[p:q]
    steps, repairs = bisect_ldl(child.rep, child.ks[p:q], lo, hi, ctx.cfg.bisect_rtol_classify)
    child.lo[p:q] = lo
    child.hi[p:q] = hi
    st.ops_vectors += steps * child.rep.n
    st.bracket_repairs += repairs


def _finish_cluster(child: Node, ctx: _Ctx, st: SolveStats) -> None:
    part = classify(child.lo, child.hi, ctx.cfg.gaptol)
    emit(child, part, ctx, st, inline=ctx.cfg.depth_first)


def run_r_task(task: Task, ctx: _Ctx, st: SolveStats) -> None:
    _refine(task.node, task.start, task.stop, ctx, st)
    join = task.join
    with join.lock:
        join.remaining -= 1
        last = join.remaining == 0
    if last:
        _finish_cluster(join.child, ctx, st)


# --------------------------------------------------------------------------
# selection mapping
# --------------------------------------------------------------------------


def _block_counts(blocks, x: float) -> np.ndarray:
    return np.array([negcount_t(b.tridiag, x) for b in blocks], dtype=np.int64)


def _distribute(base: np.ndarray, extra: np.ndarray, budget: int) -> np.ndarray:
    """Hand ``budget`` tied eigenvalues to blocks in order, capped by ``extra``."""
    out = base.copy()
    for i in range(out.size):
        take = min(int(extra[i]), budget)
        out[i] += take
        budget -= take
    return out


def _local_ranges(ts: Tridiagonal, blocks, sel: Selection, cfg) -> tuple[list, np.ndarray]:
    """Per-block (first, last) requested local indices and the global index list."""
    n = ts.n
    if sel.kind == "all":
        ranges = [(1, b.tridiag.n) for b in blocks]
        return ranges, np.arange(1, n + 1)
    g = gershgorin(ts, cfg.eps_work)
    if sel.kind == "value":
        lo_c = _block_counts(blocks, sel.vl)
        hi_c = _block_counts(blocks, sel.vu)
        ranges = [(int(a) + 1, int(b)) for a, b in zip(lo_c, hi_c)]
        total_lo = int(lo_c.sum())
        total_hi = int(hi_c.sum())
        return ranges, np.arange(total_lo + 1, total_hi + 1)
    il, iu = sel.il, sel.iu
    split_t = Tridiagonal(ts.alpha, _zeroed_beta(ts, blocks))
    rt = cfg.bisect_rtol_full
    lo, hi = bisect_t(split_t, [il, iu], g, rt)
    c_a1, c_b1 = _block_counts(blocks, lo[0]), _block_counts(blocks, hi[0])
    c_a2, c_b2 = _block_counts(blocks, lo[1]), _block_counts(blocks, hi[1])
    # ties: skip the first (il-1-N(a1)) eigenvalues in (a1, b1], keep (iu-N(a2)) in (a2, b2]
    start = _distribute(c_a1, c_b1 - c_a1, il - 1 - int(c_a1.sum()))
    stop = _distribute(c_a2, c_b2 - c_a2, iu - int(c_a2.sum()))
    ranges = [(int(a) + 1, int(b)) for a, b in zip(start, stop)]
    return ranges, np.arange(il, iu + 1)


def _zeroed_beta(ts: Tridiagonal, blocks) -> np.ndarray:
    beta = ts.beta.copy()
    for b in blocks[1:]:
        beta[b.offset - 1] = 0.0
    return beta


def _validate(sel: Selection, n: int) -> None:
    if sel.kind == "all":
        return
    if sel.kind == "index":
        if not (1 <= sel.il <= sel.iu <= n):
            raise SelectionError(f"index range {sel.il}..{sel.iu} not within 1..{n}")
        return
    if sel.kind == "value":
        if not (math.isfinite(sel.vl) and math.isfinite(sel.vu)) or not sel.vl < sel.vu:
            raise SelectionError(f"value range [{sel.vl}, {sel.vu}) is empty or invalid")
        return
    raise SelectionError(f"unknown selection kind {sel.kind!r}")


# --------------------------------------------------------------------------
# initial eigenvalues
# --------------------------------------------------------------------------


def _initial_brackets(rep: Representation, ks, block: IrreducibleBlock, mu: float, rtol, eps):
    g = gershgorin(block.tridiag, eps)
    k = len(ks)
    slack = 4 * abs(rep.d).max() * 1e-6  # roomy start; repairs cover the rest
    lo = np.full(k, g.lo - mu - slack)
    hi = np.full(k, g.hi - mu + slack)
    steps, repairs = bisect_ldl(rep, ks, lo, hi, rtol)
    return lo, hi, steps, repairs


def _parallel_map(fn, items, workers: int):
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# solve
# --------------------------------------------------------------------------


def solve(
    t: Tridiagonal,
    selection: Selection | None = None,
    cfg: SolverConfig | None = None,
    vectors: bool = True,
) -> EigenSystem:
    """Eigenvalues and (optionally) eigenvectors of a symmetric tridiagonal."""
    cfg = cfg or SolverConfig()
    sel = selection or All()
    _validate(sel, t.n)
    prof = cfg.profile
    if prof.mixed:
        t = Tridiagonal(
            t.alpha.astype(np.float32).astype(np.float64),
            t.beta.astype(np.float32).astype(np.float64),
        )
    n = t.n
    stats = SolveStats()
    t0 = time.perf_counter()

    s = scale_factor(t)
    ts = scaled(t, s)
    blocks = split(ts, cfg)
    stats.blocks = len(blocks)
    ranges, requested = _local_ranges(ts, blocks, sel, cfg)
    k = requested.size
    ctx = _Ctx(cfg, n, k, prof.out_dtype, vectors)
    ctx.scale = s

    bctxs = []
    col = 0
    for blk, (first, last) in zip(blocks, ranges):
        if last >= first:
            bctxs.append(BlockCtx(blk, first, last, col))
            col += last - first + 1
    assert col == k, (col, k)

    # trivial blocks
    big = []
    for b in bctxs:
        if b.block.tridiag.n == 1:
            ctx.values[b.col0] = b.block.tridiag.alpha[0] / s
            ctx.writes[b.col0] += 1
            if ctx.vectors is not None:
                ctx.vectors[b.block.offset, b.col0] = 1.0
        else:
            big.append(b)

    # roots and working index ranges (requested plus whole edge clusters)
    def build_root(b: BlockCtx):
        rng = np.random.default_rng([cfg.seed, b.block.offset])
        b.root = make_root(b.block, cfg, rng)
        b.spdiam = b.root.spdiam

    _parallel_map(build_root, big, cfg.worker_count)
    rtol_c = cfg.bisect_rtol_classify if vectors else cfg.bisect_rtol_full
    jobs = []
    for b in big:
        m = b.block.tridiag.n
        wf, wl = max(1, b.first - 1), min(m, b.last + 1)
        ks = np.arange(wf, wl + 1)
        chunk = max(1, math.ceil(ks.size / (4 * cfg.worker_count)))
        for i in range(0, ks.size, chunk):
            jobs.append((b, ks[i : i + chunk]))

    def run_job(job):
        b, ks = job
        return _initial_brackets(b.root.rep, ks, b.block, b.root.mu, rtol_c, cfg.eps_work)

    results = _parallel_map(run_job, jobs, cfg.worker_count)
    per_block: dict[int, list] = {}
    for (b, ks), (lo, hi, steps, rep_) in zip(jobs, results):
        per_block.setdefault(id(b), []).append((ks, lo, hi))
        stats.ops_values += steps * b.block.tridiag.n
        stats.bracket_repairs += rep_

    roots = []
    for b in big:
        parts = per_block[id(b)]
        ks = np.concatenate([p[0] for p in parts])
        lo = np.concatenate([p[1] for p in parts])
        hi = np.concatenate([p[2] for p in parts])
        if not vectors:
            for j, kk in enumerate(ks):
                if b.first <= kk <= b.last:
                    c = b.col0 + kk - b.first
                    ctx.values[c] = (0.5 * (lo[j] + hi[j]) + b.root.rep.shift_accum) / s
                    ctx.writes[c] += 1
                    ctx.errors[c] = 0.5 * (hi[j] - lo[j]) / s
            continue
        ks, lo, hi, lgap, rgap, extra = _extend_edges(b, ks, lo, hi, cfg, rtol_c)
        stats.ops_values += extra
        part = classify(lo, hi, cfg.gaptol)
        stats.largest_cluster = max(stats.largest_cluster, part.largest)
        node = Node(b.root.rep, ks, lo, hi, lgap, rgap, b)
        roots.append((node, part))
    stats.t_values = time.perf_counter() - t0

    t1 = time.perf_counter()
    if vectors and roots:
        workers = cfg.worker_count
        sched = _Scheduler(ctx, workers)
        ctx.sched = sched
        seed_stats = SolveStats()
        for node, part in roots:
            emit(node, part, ctx, seed_stats, inline=False)
        sched.run()
        for st in sched.stats:
            stats.merge(st)
        stats.merge(seed_stats)
        stats.busy = list(sched.busy)
    stats.t_vectors = time.perf_counter() - t1

    stats.write_counts = ctx.writes
    order = np.argsort(ctx.values, kind="stable")
    values = ctx.values[order].astype(prof.out_dtype)
    errors = ctx.errors[order]
    vecs = None
    if ctx.vectors is not None:
        vecs = np.asfortranarray(ctx.vectors[:, order])
    return EigenSystem(n, requested, values, errors, vecs, stats, t)


def _extend_edges(b: BlockCtx, ks, lo, hi, cfg, rtol):
    """Drop guard brackets after growing the working range over edge clusters.

    On entry ``ks`` holds the requested range plus one guard index on each
    side (where one exists).  The range grows outward while the guard is
    not separated from its neighbour; the final guards only supply the
    outer gaps.  Returns (ks, lo, hi, lgap, rgap, ops).
    """
    m = b.block.tridiag.n
    rep = b.root.rep
    ops = 0
    ks = list(ks)
    lo = list(lo)
    hi = list(hi)

    def bracket(kk):
        nonlocal ops
        a, c, st, _ = _initial_brackets(rep, [kk], b.block, b.root.mu, rtol, cfg.eps_work)
        ops += st * m
        return a[0], c[0]

    # left edge
    while ks[0] < b.first:
        if reldist(np.array(lo[:2]), np.array(hi[:2]))[0] >= cfg.gaptol:
            break
        if ks[0] == 1:
            break
        a, c = bracket(ks[0] - 1)
        ks.insert(0, ks[0] - 1)
        lo.insert(0, a)
        hi.insert(0, c)
    # right edge
    while ks[-1] > b.last:
        if reldist(np.array(lo[-2:]), np.array(hi[-2:]))[0] >= cfg.gaptol:
            break
        if ks[-1] == m:
            break
        a, c = bracket(ks[-1] + 1)
        ks.append(ks[-1] + 1)
        lo.append(a)
        hi.append(c)
    ks = np.array(ks, dtype=np.int64)
    lo = np.array(lo)
    hi = np.array(hi)
    lgap = math.inf
    rgap = math.inf
    # the outermost non-requested bracket becomes a gap if it is separated
    if ks[0] < b.first and reldist(lo[:2], hi[:2])[0] >= cfg.gaptol:
        lgap = lo[1] - hi[0]
        ks, lo, hi = ks[1:], lo[1:], hi[1:]
    if ks[-1] > b.last and reldist(lo[-2:], hi[-2:])[0] >= cfg.gaptol:
        rgap = lo[-1] - hi[-2]
        ks, lo, hi = ks[:-1], lo[:-1], hi[:-1]
    return ks, lo, hi, lgap, rgap, ops
