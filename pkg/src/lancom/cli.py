"""Command-line interface: ``gen``, ``solve`` and ``compare``.

Exit codes: 0 converged (or success), 2 matvec budget exhausted without
convergence, 1 usage / validation / I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .compare import TOLERANCE_GRID, ReferenceUnavailable, compare
from .history import dumps
from .krylov_schur import ks_solve
from .lanczos import MemoryBudgetExceeded, lanczos_solve, lc_solve
from .sparse import gen_laplacian_L, read_matrix_market, write_matrix_market

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNCONVERGED = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _unit_float(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return v


def load_matrix(spec: str):
    """``laplacian-l:NX`` or a Matrix Market path."""
    if spec.startswith("laplacian-l:"):
        try:
            nx = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad generator spec '{spec}'") from None
        try:
            return gen_laplacian_L(nx)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return read_matrix_market(spec)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lancom", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"lancom {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a test matrix")
    g.add_argument("kind", choices=["laplacian-l"])
    g.add_argument("--nx", type=int, required=True, help="even grid size; order is 3 nx^2 / 4")
    g.add_argument("-o", "--output", help="Matrix Market path (default laplacian_l_NX.mtx)")

    s = sub.add_parser("solve", help="compute the k smallest eigenpairs")
    s.add_argument("--method", choices=["lc", "ks", "lanczos"], default="lc")
    s.add_argument("--matrix", required=True, help="Matrix Market file or laplacian-l:NX")
    s.add_argument("--k", type=_positive_int, default=1)
    s.add_argument("--m", type=_positive_int, default=60)
    s.add_argument("--ell", type=_positive_int, help="KS restart size (default m/2)")
    s.add_argument("--tol-res", type=_unit_float, default=1e-8)
    s.add_argument("--tol-ra", type=_unit_float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-matvecs", type=_positive_int)
    s.add_argument("--fill-in", choices=["on", "off"], default="on")
    s.add_argument("--output", help="JSON history path (default stdout)")
    s.add_argument("--csv", help="also write checkpoints as CSV")

    c = sub.add_parser("compare", help="matvec counts of LC versus KS")
    c.add_argument("--matrix", required=True)
    c.add_argument("--k", type=_positive_int, default=1)
    c.add_argument("--m", type=_positive_int, default=60)
    c.add_argument("--ell", type=_positive_int)
    c.add_argument("--tol-ra", type=_unit_float)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--max-matvecs", type=_positive_int)
    c.add_argument("--output", help="JSON report path")
    return p


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_gen(args) -> int:
    try:
        A = gen_laplacian_L(args.nx)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    path = args.output or f"laplacian_l_{args.nx}.mtx"
    write_matrix_market(A, path)
    print(f"wrote {path}: n={A.n}, nnz={A.nnz}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    A = load_matrix(args.matrix)
    common = dict(tol_res=args.tol_res, seed=args.seed, max_matvecs=args.max_matvecs)
    try:
        if args.method == "lc":
            res, hist = lc_solve(A, args.k, args.m, tol_ra=args.tol_ra,
                                 fill_in=args.fill_in == "on", **common)
        elif args.method == "ks":
            res, hist = ks_solve(A, args.k, args.m, args.ell,
                                 fill_in=args.fill_in == "on", **common)
        else:
            res, hist = lanczos_solve(A, args.k, **common)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args.output, hist.to_json())
    if args.csv:
        _write(args.csv, hist.to_csv())
    status = "converged" if res.converged else "not converged"
    print(f"{args.method}: {status} after {res.matvec_count} matvecs; "
          f"values {', '.join('%.12g' % v for v in res.values)}", file=sys.stderr)
    if hist.stagnated:
        print("warning: residual stagnated over consecutive checks", file=sys.stderr)
    return EXIT_OK if res.converged else EXIT_UNCONVERGED


def cmd_compare(args) -> int:
    A = load_matrix(args.matrix)
    try:
        rep = compare(A, args.k, args.m, args.ell, args.tol_ra, args.seed,
                      TOLERANCE_GRID, args.max_matvecs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(rep.table())
    if args.output:
        _write(args.output, dumps(rep.to_dict()))
    return EXIT_OK if all(c is not None for c in rep.lc_counts + rep.ks_counts) else EXIT_UNCONVERGED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"gen": cmd_gen, "solve": cmd_solve, "compare": cmd_compare}[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"lancom: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ReferenceUnavailable, MemoryBudgetExceeded) as exc:
        print(f"lancom: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:  # malformed input files
        print(f"lancom: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
