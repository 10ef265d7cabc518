"""Command-line front end: ``mobiuseig solve | generate | check``.

Exit codes: 0 on success, 2 for usage or input errors, 3 when a solve
produced no converged record.  ``check`` exits with 1 if any record fails.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path

from .eigensolvers import IterationConfig, algorithm_one, algorithm_two, subspace_iteration
from .errors import MobiusEigError
from .pencil import Pencil, read_l_diag
from .report import SpectrumReport, check_report
from .sparse_core import read_matrix_market
from .synth import PlantSpec, planted_pencil, read_spectrum, write_case

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3

log = logging.getLogger("mobiuseig")


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def parse_complex(text):
    """Parse ``"a+bi"``, ``"bi"`` or ``"a"`` (``j`` is accepted for ``i``)."""
    s = str(text).strip().replace(" ", "")
    if not s:
        raise argparse.ArgumentTypeError("empty complex number")
    s = re.sub(r"(?<![0-9.])j", "1j", s.replace("i", "j"))
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def parse_complex_list(text):
    return [parse_complex(part) for part in str(text).split(",") if part.strip()]


def format_complex(z):
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _existing(path):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"file not found: {p}")
    return p


def load_pencil(matrix, ldiag):
    J = read_matrix_market(_existing(matrix))
    d = read_l_diag(_existing(ldiag), J.order)
    return Pencil(J, d)


def build_parser():
    parser = argparse.ArgumentParser(prog="mobiuseig", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    so = sub.add_parser("solve", help="find eigenvalues of a pencil (J, L)")
    so.add_argument("--matrix", required=True, help="J in Matrix Market coordinate format")
    so.add_argument("--ldiag", required=True, help="L diagonal, 'index value' lines (1-based)")
    so.add_argument("--algorithm", choices=("one", "two", "subspace"), default="one")
    so.add_argument("--sigma", type=parse_complex, help="Cayley parameter (Re > 0), e.g. 4.8334")
    so.add_argument("--p", type=int, default=0, help="preconditioning power")
    so.add_argument("--r", type=int, default=4, help="number of iteration vectors")
    so.add_argument("--s", type=int, default=6, help="number of initial shifts")
    so.add_argument("--t", type=int, default=4, help="iterations between shift updates")
    so.add_argument("--eps", type=float, default=1.0, help="initial shift radius")
    so.add_argument("--tol", type=float, default=None, help="1e-4 (one, two) or 1e-5 (subspace)")
    so.add_argument("--max-iter", type=int, default=200)
    so.add_argument("--shift-scheme", choices=("endpoint", "odd"), default="endpoint")
    so.add_argument("--shifts", type=parse_complex_list, default=None, help="explicit initial shifts")
    so.add_argument("--no-conjugate-pairs", action="store_true", help="do not add conjugate partners")
    so.add_argument("--random-vectors", action="store_true", help="seeded random start vectors")
    so.add_argument("--shift-a", type=parse_complex, default=None, help="subspace shift a, e.g. 4i")
    so.add_argument("--block", type=int, default=8)
    so.add_argument("--ritz-period", type=int, default=4)
    so.add_argument("--max-cycles", type=int, default=100)
    so.add_argument("--seed", type=int, default=0)
    so.add_argument("--threads", type=int, default=1)
    so.add_argument("--out-json", default="report.json")
    so.add_argument("--out-csv", default="report.csv")

    ge = sub.add_parser("generate", help="write a pencil with a planted spectrum")
    ge.add_argument("--states", type=int, default=60)
    ge.add_argument("--algebraic", type=int, default=40)
    ge.add_argument("--plant", type=parse_complex_list, default=None,
                    help="comma-separated eigenvalues, conjugates added automatically")
    ge.add_argument("--seed", type=int, default=0)
    ge.add_argument("--density", type=float, default=None,
                    help="fraction of nonzeros in J (default 0.08, raised if infeasible)")
    ge.add_argument("--out-prefix", default="case_")

    ch = sub.add_parser("check", help="re-verify a report against its pencil")
    ch.add_argument("--matrix", required=True)
    ch.add_argument("--ldiag", required=True)
    ch.add_argument("--report", required=True)
    ch.add_argument("--spectrum", default=None, help="true spectrum JSON (optional)")
    ch.add_argument("--lam-rtol", type=float, default=1e-6)
    return parser


def cmd_solve(args, out=None):
    out = out or sys.stdout
    pencil = load_pencil(args.matrix, args.ldiag)
    if args.algorithm == "subspace":
        if args.shift_a is None:
            raise InputError("--shift-a is required for the subspace algorithm")
        tol = 1e-5 if args.tol is None else args.tol
        records = subspace_iteration(
            pencil, args.shift_a, block=args.block, ritz_period=args.ritz_period,
            tol=tol, max_cycles=args.max_cycles,
        )
        params = {"block": args.block, "ritz_period": args.ritz_period, "tol": tol,
                  "max_cycles": args.max_cycles}
        report = SpectrumReport("subspace", records, shift_a=args.shift_a, params=params)
    else:
        if args.sigma is None:
            raise InputError("--sigma is required for algorithms one and two")
        cfg = IterationConfig(
            r=args.r, s=args.s, p=args.p, t=args.t, eps=args.eps,
            tol=1e-4 if args.tol is None else args.tol, max_iter=args.max_iter,
            shifts=None if args.shifts is None else tuple(args.shifts),
            shift_scheme=args.shift_scheme, random_vectors=args.random_vectors,
            conjugate_pairs=not args.no_conjugate_pairs, seed=args.seed, threads=args.threads,
        )
        solver = algorithm_one if args.algorithm == "one" else algorithm_two
        records = solver(pencil, args.sigma, cfg)
        params = {k: v for k, v in vars(cfg).items() if k not in ("threads", "shifts")}
        params["shifts"] = None if cfg.shifts is None else [[z.real, z.imag] for z in cfg.shifts]
        report = SpectrumReport(args.algorithm, records, sigma=args.sigma, params=params)
    report.write_json(args.out_json)
    report.write_csv(args.out_csv)
    n_conv = len(report.converged)
    print(f"{n_conv} of {len(report.records)} records converged", file=out)
    for rec in report.converged:
        print(f"  lambda = {format_complex(rec.lam)}  O(r) = {rec.residual_order}", file=out)
    return EXIT_OK if n_conv else EXIT_NO_CONVERGENCE


def cmd_generate(args, out=None):
    out = out or sys.stdout
    kwargs = {"n_states": args.states, "m_algebraic": args.algebraic, "seed": args.seed,
              "density": args.density}
    if args.plant is not None:
        kwargs["planted_eigenvalues"] = tuple(args.plant)
    pencil, spectrum = planted_pencil(PlantSpec(**kwargs))
    for path in write_case(pencil, spectrum, args.out_prefix):
        print(f"wrote {path}", file=out)
    return EXIT_OK


def cmd_check(args, out=None):
    out = out or sys.stdout
    pencil = load_pencil(args.matrix, args.ldiag)
    report = SpectrumReport.read_json(_existing(args.report))
    spectrum = None if args.spectrum is None else read_spectrum(_existing(args.spectrum))
    results = check_report(pencil, report, spectrum, lam_rtol=args.lam_rtol)
    for res in results:
        print(res.line(), file=out)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed} passed, {failed} failed", file=out)
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {"solve": cmd_solve, "generate": cmd_generate, "check": cmd_check}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (InputError, MobiusEigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
