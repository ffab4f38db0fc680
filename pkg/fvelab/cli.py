"""
FVELab command line.

  python -m fvelab design  --k 4 --method II --params 0.5 --out schemes/4-1.json
  python -m fvelab check   --scheme preset:scheme-3-1 --r 3
  python -m fvelab solve   --scheme preset:scheme-3-1 --problem example-6-1 --N 8
  python -m fvelab study   --scheme preset:scheme-4-1 --problem example-6-1 --levels 2,4,8,16
  python -m fvelab study   --golden table-4
  python -m fvelab profile --scheme preset:scheme-4-1 --problem example-6-1 --N 16 --out prof.csv

Data goes to stdout, diagnostics to stderr. Exit codes: 0 success,
2 usage or parameter error, 3 numerical failure.
"""

import argparse
import os
import sys
from typing import List, Optional

from fvelab.config import get_settings
from fvelab.models.schemas import StudyConfig
from fvelab.services.analysis import error_profile
from fvelab.services.assembly import fve_solve
from fvelab.services.harness import (
    compare_golden,
    format_markdown,
    golden_study,
    load_golden,
    load_scheme_source,
    problem_preset,
    run_level,
    run_study,
    write_study_csv,
)
from fvelab.services.mesh import uniform_mesh
from fvelab.services.scheme import (
    DESIGN_METHODS,
    check_orthogonality,
    design,
    function_value_points,
    max_orthogonality_order,
    reference_dual_points,
    save_scheme,
)
from fvelab.utils.exceptions import InputError, NotApplicableError, NumericalError, ParameterError
from fvelab.utils.logger import setup_logger
from fvelab.utils.validators import parse_float_list, parse_int_list

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _real(x: float) -> str:
    return format(float(x), ".17g")


def cmd_design(args: argparse.Namespace) -> int:
    spec = design(args.k, args.method, parse_float_list(args.params))
    max_order, witness = max_orthogonality_order(reference_dual_points(spec).G)
    if args.out:
        save_scheme(spec, args.out)

    print(f"label: {spec.label}")
    print(f"k: {spec.k}")
    print("alphas: " + ", ".join(_real(a) for a in spec.alphas))
    print(f"max orthogonality order: {max_order}")
    if witness is not None:
        print("pi* nodes: " + ", ".join(_real(d) for d in witness))
    if max_order >= spec.k - 1:
        try:
            print("value points: " + ", ".join(_real(x) for x in function_value_points(spec)))
        except NotApplicableError as e:
            print(f"value points: none ({e})")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    spec = load_scheme_source(args.scheme)
    passed = check_orthogonality(spec, args.r)
    max_order, _ = max_orthogonality_order(reference_dual_points(spec).G)
    print(f"{'PASS' if passed else 'FAIL'} (max r = {max_order})")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    spec = load_scheme_source(args.scheme)
    problem = problem_preset(args.problem)
    report = run_level(spec, problem, args.N)
    print(f"h: {report.h:.4E}")
    print(f"|u-u_h|_1: {report.err_h1:.4E}")
    print(f"||u-u_h||_0: {report.err_l2:.4E}")
    print(f"|u_h-u_I|_1: {report.err_ui_h1:.4E}")
    print(f"||u_h-u_I||_0: {report.err_ui_l2:.4E}")
    print(f"max P1 |u'-u_h'|: {report.err_p1:.4E}")
    print("max P0 |u-u_h|: " + (f"{report.err_p0:.4E}" if report.err_p0 is not None else "n/a"))
    print(f"solver residual: {report.solver_residual:.2E}")
    return EXIT_OK


def cmd_study(args: argparse.Namespace) -> int:
    if args.golden:
        config = golden_study(args.golden)
    else:
        if not (args.scheme and args.problem and args.levels):
            raise ParameterError("study needs --scheme, --problem and --levels (or --golden)")
        config = StudyConfig(scheme=args.scheme, problem=args.problem, levels=parse_int_list(args.levels))

    report = run_study(config)
    sys.stdout.write(format_markdown(report))

    out = args.out
    if out is None:
        name = args.golden or f"{config.scheme.split(':', 1)[1]}_{config.problem}"
        out = os.path.join(get_settings().output_dir, f"{os.path.basename(name)}.csv")
    write_study_csv(report, out)

    if args.golden:
        diff = compare_golden(report, load_golden(args.golden))
        print(f"golden {args.golden}: {'PASS' if diff.passed else 'FAIL'} "
              f"({len(diff.mismatches)} of {diff.checked_cells} cells differ)")
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    spec = load_scheme_source(args.scheme)
    problem = problem_preset(args.problem)
    mesh = uniform_mesh(args.N, problem.a, problem.b)
    solution = fve_solve(problem, mesh, spec)
    frame = error_profile(solution, problem.u, problem.du, mesh, args.samples)
    if args.out:
        directory = os.path.dirname(args.out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        frame.to_csv(args.out, index=False, float_format="%.17g")
        logger.info(f"Wrote error profile to {args.out}")
    else:
        frame.to_csv(sys.stdout, index=False, float_format="%.17g")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fvelab", description="Finite volume element schemes in 1D")
    sub = parser.add_subparsers(dest="command", required=True)

    pd_ = sub.add_parser("design", help="Design a scheme and write its JSON file")
    pd_.add_argument("--k", type=int, required=True)
    pd_.add_argument("--method", choices=DESIGN_METHODS, required=True)
    pd_.add_argument("--params", default="", help="Comma separated method parameters")
    pd_.add_argument("--out", default=None)
    pd_.set_defaults(func=cmd_design)

    pc = sub.add_parser("check", help="Check the k-r-order orthogonal condition")
    pc.add_argument("--scheme", required=True, help="preset:<name> or file:<path>")
    pc.add_argument("--r", type=int, required=True)
    pc.set_defaults(func=cmd_check)

    ps = sub.add_parser("solve", help="Solve one problem on a uniform mesh and print its errors")
    ps.add_argument("--scheme", required=True)
    ps.add_argument("--problem", required=True)
    ps.add_argument("--N", type=int, required=True)
    ps.set_defaults(func=cmd_solve)

    pt = sub.add_parser("study", help="Run a convergence study")
    pt.add_argument("--scheme")
    pt.add_argument("--problem")
    pt.add_argument("--levels", help="Comma separated element counts")
    pt.add_argument("--golden", help="Reproduce and compare a shipped table (table-2 .. table-5)")
    pt.add_argument("--out", default=None)
    pt.set_defaults(func=cmd_study)

    pp = sub.add_parser("profile", help="Emit pooled per-element error profiles as CSV")
    pp.add_argument("--scheme", required=True)
    pp.add_argument("--problem", required=True)
    pp.add_argument("--N", type=int, required=True)
    pp.add_argument("--samples", type=int, default=33)
    pp.add_argument("--out", default=None)
    pp.set_defaults(func=cmd_profile)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
