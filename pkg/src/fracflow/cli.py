"""Command-line entry point ``fracflow``."""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from fracflow import harness
from fracflow.mesh import level_mesh, level_to_n
from fracflow.mittag_leffler import ml
from fracflow.problems import CONVENTIONS, DEFAULT_TERMS, get_problem
from fracflow.sparse import SingularMatrixError
from fracflow.stepper import SolverError


def int_list(text: str) -> tuple[int, ...]:
    """'1..4' -> (1, 2, 3, 4); '10,20,40' -> (10, 20, 40)."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(v) for v in text.split(",") if v.strip())


def float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--example", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--element", choices=("rt0", "rt1"), default="rt1")
    p.add_argument("--series-m", type=int, default=DEFAULT_TERMS, help="series truncation (modes 0..M)")
    p.add_argument("--convention", choices=CONVENTIONS, default="separable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracflow", description="Mixed FEM / convolution quadrature solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser("convergence", help="space or time convergence study")
    _add_problem_args(conv)
    conv.add_argument("--study", choices=("space", "time"), default="space")
    conv.add_argument("--alpha", type=float_list, default=(0.3, 0.7))
    conv.add_argument("--levels", type=int_list, default=(1, 2, 3, 4))
    conv.add_argument("--nsteps", type=int_list, default=(10, 20, 40, 80, 160))
    conv.add_argument("--tau", type=float, default=None, help="time step of a space study")
    conv.add_argument("--level", type=int, default=5, help="mesh level of a time study")
    conv.add_argument("--ref-level", type=int, default=None, help="reference level (example 1)")
    conv.add_argument("--out", help="CSV report path")
    conv.add_argument("--json", help="JSON report path")
    conv.add_argument("--plot", help="plot script path")

    run = sub.add_parser("run", help="single solve")
    _add_problem_args(run)
    run.add_argument("--alpha", type=float, default=0.5)
    run.add_argument("--level", type=int, default=2)
    run.add_argument("--nsteps", type=int, default=None)
    run.add_argument("--tau", type=float, default=None)

    mesh = sub.add_parser("mesh", help="mesh utilities")
    msub = mesh.add_subparsers(dest="mesh_command", required=True)
    info = msub.add_parser("info", help="entity counts of a refinement level")
    info.add_argument("--level", type=int, required=True)
    info.add_argument("--dump", help="write a plain-text mesh dump to this path")

    mle = sub.add_parser("ml-eval", help="evaluate the Mittag-Leffler function E_{alpha,beta}(z)")
    mle.add_argument("--alpha", type=float, required=True)
    mle.add_argument("--beta", type=float, default=1.0)
    mle.add_argument("--z", type=float, required=True)
    return parser


def _print_report(report: harness.ConvergenceReport) -> None:
    def f(v, spec):
        return "" if v is None else format(v, spec)

    print(",".join(harness.CSV_HEADER))
    for r in report.rows:
        print(
            f"{r.case},{r.alpha:g},{r.element},{r.level_or_n},{r.h_or_tau:.6g},"
            f"{r.err_u:.4e},{f(r.oc_u, '.3f')},{r.err_sigma:.4e},{f(r.oc_sigma, '.3f')}"
            + (f"  FAILED: {r.message}" if r.failed else "")
        )


def cmd_convergence(args) -> int:
    cfg = harness.StudyConfig(
        example=args.example,
        alphas=args.alpha,
        element=args.element,
        axis=args.study,
        levels=args.levels,
        nsteps=args.nsteps,
        tau=args.tau,
        level=args.level,
        ref_level=args.ref_level,
        series_m=args.series_m,
        convention=args.convention,
    )
    report = harness.run_study(cfg)
    _print_report(report)
    harness.emit_report(report, args.out, args.json, args.plot)
    return 1 if report.failed else 0


def cmd_run(args) -> int:
    problem = get_problem(args.example, args.alpha, args.series_m, args.convention)
    if args.nsteps is not None:
        N = args.nsteps
    else:
        tau = args.tau if args.tau is not None else harness.default_tau(args.example)
        N = round(problem.T / tau)
    sol = harness.solve(problem, args.level, args.element, N)
    print(f"example {args.example}  alpha={args.alpha:g}  element={args.element}  level={args.level} "
          f"(n={level_to_n(args.level)})  N={N}  tau={problem.T / N:.6g}")
    print(f"scalar dofs {sol.u.size}  flux dofs {sol.flux.size}  |U^N|_2 = {np.linalg.norm(sol.u):.6e}")
    if problem.has_exact:
        eu, es = harness.exact_errors(problem, sol)
        print(f"err_u = {eu:.6e}  err_sigma = {es:.6e}")
    return 0


def cmd_mesh(args) -> int:
    m = level_mesh(args.level)
    print(f"level {args.level}: n={m.n} vertices={m.num_vertices} edges={m.num_edges} "
          f"triangles={m.num_triangles} boundary_edges={int(m.boundary.sum())} h={m.h:g}")
    if args.dump:
        m.dump(args.dump)
    return 0


def cmd_ml(args) -> int:
    v = ml(args.alpha, args.beta, args.z)
    print(repr(float(v)))
    return 0 if math.isfinite(v) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"convergence": cmd_convergence, "run": cmd_run, "mesh": cmd_mesh, "ml-eval": cmd_ml}
    try:
        return handlers[args.command](args)
    except (SolverError, SingularMatrixError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
