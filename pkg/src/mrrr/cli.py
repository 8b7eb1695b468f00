"""Command-line front end: generate, solve, verify, sweep."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .driver import All, ByIndex, ByValue, SelectionError, solve
from .matgen import KINDS, canonical, generate
from .metrics import ORACLE_MAX_N, QualityReport, oracle_eig, report_for
from .profiles import SolverConfig, default_workers, profile_by_name
from .tridiag import MatrixFormatError, one_norm, read_matrix, write_matrix

EXIT_OK = 0
EXIT_ROBUSTNESS = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _add_solve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="matrix file (n, then alpha, then beta)")
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--all", action="store_true", help="all eigenpairs (default)")
    sel.add_argument("--il", type=int, help="first eigenpair index (1-based)")
    sel.add_argument("--vl", type=float, help="lower end of the value range [vl, vu)")
    p.add_argument("--iu", type=int, help="last eigenpair index (inclusive)")
    p.add_argument("--vu", type=float, help="upper end of the value range")
    p.add_argument("--profile", choices=("std64", "mixed32"), default="std64")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: $MRRR_WORKERS or CPU count)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mrrr", description="MRRR symmetric tridiagonal eigensolver")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a test matrix")
    g.add_argument("kind", help="one of: " + ", ".join(KINDS))
    g.add_argument("n", type=int)
    g.add_argument("out")

    s = sub.add_parser("solve", help="compute eigenpairs and write a JSON report")
    _add_solve_flags(s)
    s.add_argument("--out", help="JSON report path (default: stdout)")
    s.add_argument("--vectors-out", help="write eigenvectors, one per line")

    v = sub.add_parser("verify", help="compare against the dense Jacobi oracle")
    _add_solve_flags(v)

    w = sub.add_parser("sweep", help="solve every kind at every size, write CSV")
    w.add_argument("--profile", choices=("std64", "mixed32"), default="std64")
    w.add_argument("--sizes", default="101,501,1001,2001")
    w.add_argument("--kinds", default=",".join(KINDS))
    w.add_argument("--workers", type=int, default=None)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", help="CSV path (default: stdout)")
    return ap


def _selection(args):
    if args.il is not None or args.iu is not None:
        if args.il is None or args.iu is None:
            raise UsageError("--il and --iu must be given together")
        if args.il > args.iu:
            raise UsageError(f"--il {args.il} exceeds --iu {args.iu}")
        return ByIndex(args.il, args.iu)
    if args.vl is not None or args.vu is not None:
        if args.vl is None or args.vu is None:
            raise UsageError("--vl and --vu must be given together")
        if not args.vl < args.vu:
            raise UsageError(f"--vl {args.vl} must be below --vu {args.vu}")
        return ByValue(args.vl, args.vu)
    return All()


def _config(profile: str, n: int, workers, seed: int) -> SolverConfig:
    w = workers if workers is not None else default_workers()
    if w < 1:
        raise UsageError("--workers must be at least 1")
    try:
        prof = profile_by_name(profile, n)
    except ValueError as e:
        raise DataError(str(e)) from None
    return SolverConfig(profile=prof, worker_count=w, seed=seed)


def _load(path: str):
    try:
        return read_matrix(path)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except MatrixFormatError as e:
        raise DataError(f"{path}: {e}") from None


def _solve(args):
    sel = _selection(args)
    t = _load(args.input)
    cfg = _config(args.profile, t.n, args.workers, args.seed)
    try:
        es = solve(t, sel, cfg)
    except SelectionError as e:
        raise UsageError(str(e)) from None
    return t, cfg, es


def cmd_generate(args) -> int:
    try:
        t = generate(canonical(args.kind), args.n)
    except ValueError as e:
        raise UsageError(str(e)) from None
    write_matrix(t, args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    t, cfg, es = _solve(args)
    rep = report_for(es, Path(args.input).stem, cfg)
    text = json.dumps(rep.as_row(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if args.vectors_out:
        digits = 9 if es.vectors.dtype == np.float32 else 17
        with open(args.vectors_out, "w") as fh:
            fh.write(f"{es.n} {es.k}\n")
            np.savetxt(fh, es.vectors.T, fmt=f"%.{digits}g")
    return EXIT_ROBUSTNESS if rep.phi_fail else EXIT_OK


def verify_against_oracle(t, es, cfg):
    """(max eigenvalue deviation, min alignment, passed) against the Jacobi oracle."""
    m = es.matrix
    w, V = oracle_eig(m)
    idx = es.requested - 1
    nrm = one_norm(m)
    eps = max(cfg.eps_work, cfg.eps_out)
    dev = float(np.max(np.abs(es.values.astype(np.float64) - w[idx]))) if es.k else 0.0
    gaps = np.full(m.n, np.inf)
    if m.n > 1:
        d = np.diff(w)
        gaps[:-1] = np.minimum(gaps[:-1], d)
        gaps[1:] = np.minimum(gaps[1:], d)
    align = 1.0
    if es.vectors is not None:
        cos = np.abs(np.einsum("ij,ij->j", V[:, idx], es.vectors.astype(np.float64)))
        sep = gaps[idx] > 1e-3 * nrm
        if sep.any():
            align = float(cos[sep].min())
    ok = dev <= 100 * m.n * eps * nrm and align >= 1 - 1e-6
    return dev, align, ok


def cmd_verify(args) -> int:
    t = _load(args.input)
    if t.n > ORACLE_MAX_N:
        raise DataError(f"oracle limit: n={t.n} exceeds {ORACLE_MAX_N}")
    t, cfg, es = _solve(args)
    dev, align, ok = verify_against_oracle(t, es, cfg)
    print(f"max eigenvalue deviation: {dev:.3e}")
    print(f"min vector alignment:     {align:.12f}")
    print("agreement: " + ("ok" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_ROBUSTNESS


def _csv_list(text: str, conv):
    try:
        return [conv(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(str(e)) from None


def run_sweep(profile: str, sizes, kinds, workers: int, seed: int = 0) -> list[QualityReport]:
    out = []
    for kind in kinds:
        for n in sizes:
            if kind == "wilkinson" and n % 2 == 0:
                continue
            t = generate(kind, n)
            cfg = SolverConfig(profile=profile_by_name(profile, n), worker_count=workers, seed=seed)
            es = solve(t, All(), cfg)
            out.append(report_for(es, kind, cfg))
    return out


def cmd_sweep(args) -> int:
    sizes = _csv_list(args.sizes, int)
    try:
        kinds = [canonical(k) for k in _csv_list(args.kinds, str)]
    except ValueError as e:
        raise UsageError(str(e)) from None
    workers = args.workers if args.workers is not None else default_workers()
    reports = run_sweep(args.profile, sizes, kinds, workers, args.seed)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        wr = csv.DictWriter(fh, fieldnames=QualityReport.FIELDS)
        wr.writeheader()
        for r in reports:
            wr.writerow(r.as_row())
    finally:
        if args.out:
            fh.close()
    return EXIT_ROBUSTNESS if any(r.phi_fail for r in reports) else EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as e:
        print(f"mrrr: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"mrrr: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # anything else is a bug
        print(f"mrrr: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
