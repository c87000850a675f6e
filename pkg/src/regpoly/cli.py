"""Batch command line front end.

Every subcommand reads one JSON problem (``--input``) and writes CSV/JSON
files into ``--output`` (a directory), or the main CSV to stdout when no
output directory is given.

Exit codes: 0 success, 1 usage, 2 invalid input, 3 numerical failure
(including a golden-table mismatch).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import golden, numeric
from . import poly as polymod
from .collocate import Bvp1D, CollocationProblem, node_residuals, residual_csv, solve_bvp_1d, solve_collocation
from .expr import evaluate, parse, variables_for
from .hermite import HermiteProblem, basis_coefficients, interpolate_hermite, interpolate_operator_preserving
from .multivariate import MultiHermiteProblem, interpolate_hermite_nd
from .operators import DifferentialOperator
from .synthesis import BlendLog, Member, blend_many, condition_audit
from .verify import dense_oracle, error_report, residual_report, rows_csv
from . import wkb

EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

log = logging.getLogger("regpoly")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class GoldenMismatch(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# output helpers


class Output:
    def __init__(self, directory: str | None):
        self.dir = Path(directory) if directory else None
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)
        self.printed = False

    def write(self, name: str, text: str, primary: bool = False):
        if self.dir:
            (self.dir / name).write_text(text)
        elif primary and not self.printed:
            sys.stdout.write(text)
            self.printed = True


def _load(path: str | None) -> dict:
    if not path:
        raise ValueError("--input is required for this subcommand")
    with open(path) as fh:
        return json.load(fh)


def _variables(job: dict, n: int) -> tuple:
    if "variables" in job:
        return tuple(job["variables"])
    return variables_for(n, bool(job.get("time_axis", False)))


def _operator(job: dict, n: int, names) -> DifferentialOperator:
    terms = []
    for t in job["terms"]:
        alpha = t["alpha"]
        terms.append((parse(str(t["coeff"]), names), (alpha,) if isinstance(alpha, int) else tuple(alpha)))
    return DifferentialOperator(n, tuple(terms), job.get("lambda"), job.get("Lambda"))


# --------------------------------------------------------------------------
# subcommands


def cmd_interpolate(args, out: Output):
    job = _load(args.input)
    n = int(job.get("dimension", 1))
    names = _variables(job, n)
    if n == 1:
        nodes = [numeric.parse_scalar(x) for x in job["nodes"]]
        k = int(job["k"])
        if "jets" in job:
            pairs = list(zip(nodes, job["jets"]))
        else:
            f = parse(job["f"], names)
            pairs = list(zip(nodes, [None] * len(nodes)))
        if not args.preserve_order:
            pairs.sort(key=lambda t: t[0])
        nodes = [x for x, _ in pairs]
        if "jets" in job:
            prob = HermiteProblem(tuple(nodes), k, tuple(tuple(j) for _, j in pairs))
        else:
            prob = HermiteProblem.from_function(f, nodes, k)
        p = interpolate_hermite(prob, scaled=bool(job.get("scaled", False)))
        coeffs = basis_coefficients(p)
        csv_text = "index,coefficient\n" + "".join(f"{m},{numeric.to_text(c)}\n" for m, c in enumerate(coeffs))
    else:
        f = parse(job["f"], names)
        prob = MultiHermiteProblem.from_function(f, [tuple(x) for x in job["nodes"]], tuple(job["beta"]))
        p = interpolate_hermite_nd(prob, axes=job.get("axes", "all"))
        csv_text = polymod.coefficients_csv(p)
    out.write("coefficients.csv", csv_text, primary=True)
    out.write("polynomial.json", polymod.dumps(p))


def cmd_preserve_ops(args, out: Output):
    job = _load(args.input)
    names = _variables(job, 1)
    f = parse(job["f"], names)
    ops = [_operator(o, 1, names) for o in job["operators"]]
    nodes = [numeric.parse_scalar(x) for x in job["nodes"]]
    if not args.preserve_order:
        nodes.sort()
    p = interpolate_operator_preserving(f, ops, nodes)
    out.write("coefficients.csv", polymod.coefficients_csv(p), primary=True)
    out.write("polynomial.json", polymod.dumps(p))


def cmd_solve_bvp1d(args, out: Output):
    job = _load(args.input)
    names = _variables(job, 1)
    P = lambda key: parse(str(job[key]), names)  # noqa: E731
    d, e = job["interval"]
    cd, ce = job["boundary"]
    prob = Bvp1D(P("a"), P("b"), P("c"), P("f"), d, e, cd, ce, tuple(job["nodes"]))
    p = solve_bvp_1d(prob)
    out.write("coefficients.csv", polymod.coefficients_csv(p, p.meta["labels"]), primary=True)
    out.write("polynomial.json", polymod.dumps(p))
    nodes = [(x,) for x in prob.nodes]
    out.write("residuals.csv", residual_csv(nodes, node_residuals(prob.operator(), prob.f, p, nodes)))


def _collocation_problem(job: dict) -> CollocationProblem:
    n = int(job["dimension"])
    names = _variables(job, n)
    bnd = job["boundary"]
    normal = bnd.get("normal")
    return CollocationProblem(
        operator=_operator(job["operator"], n, names),
        f=parse(str(job["rhs"]), names),
        g=parse(str(bnd["data"]), names),
        boundary=tuple(tuple(x) for x in bnd["nodes"]),
        interior=tuple(tuple(x) for x in job["interior"]["nodes"]),
        l=int(bnd.get("l", 0)),
        normal=parse(str(normal), names) if normal is not None else None,
        normal_axis=bnd.get("normal_axis"),
    )


def cmd_solve_collocation(args, out: Output):
    job = _load(args.input)
    prob = _collocation_problem(job)
    p = solve_collocation(prob, axes=job.get("axes", "all"))
    out.write("polynomial.json", polymod.dumps(p))
    res = node_residuals(prob.operator, prob.f, p, prob.interior)
    text = residual_csv(list(prob.interior), res) if prob.interior else "node,residual\n"
    out.write("residuals.csv", text, primary=True)


def cmd_synthesize(args, out: Output):
    paths = args.input_files or ([args.input] if args.input else [])
    if not paths:
        raise ValueError("synthesize needs polynomial JSON files (--input a.json b.json ...)")
    members = []
    for path in paths:
        with open(path) as fh:
            p = polymod.from_json_dict(json.load(fh))
        if "nodes" not in p.meta:
            raise ValueError(f"{path}: polynomial JSON carries no node list")
        k = args.k if args.k is not None else p.meta.get("k")
        if k is None:
            raise ValueError(f"{path}: no match order; pass --k")
        members.append(Member(tuple(tuple(x) for x in p.meta["nodes"]), p, int(k)))
    blog = BlendLog()
    result = blend_many(members, k=args.k, jobs=args.jobs, log=blog)
    rows = condition_audit(result, members)
    audit = rows_csv(
        ["node", "order", "target", "achieved", "abs_diff"],
        [
            (" ".join(numeric.to_text(c) for c in x), " ".join(map(str, g)), a, b, d)
            for x, g, a, b, d in rows
        ],
    )
    out.write("audit.csv", audit, primary=True)
    out.write("polynomial.json", polymod.dumps(result.poly))
    worst = max((float(r[-1]) for r in rows), default=0.0)
    log.info("blended %d members in %d rounds, worst condition error %.3g", len(members), blog.rounds, worst)
    if args.tolerance is not None and worst > args.tolerance:
        raise ArithmeticError(f"blended polynomial misses a condition by {worst:.3g}")


def cmd_wkb(args, out: Output):
    job = _load(args.input)
    n = int(job["n"])
    names = _variables(job, n)
    model = wkb.WkbModel(n, tuple(parse(str(b), names) for b in job["b"]), tuple(job["y"]), int(job["K"]), job.get("D"))
    expansion = wkb.expand(model)
    out.write("coefficients.csv", wkb.coefficient_csv(expansion), primary=True)
    kernel = job.get("kernel")
    if kernel:
        header = ["t"] + [f"x{i + 1}" for i in range(n)] + ["p"]
        rows = []
        for t in kernel["t"]:
            for x in kernel["x"]:
                x = (x,) if np.ndim(x) == 0 else tuple(x)
                rows.append([numeric.to_text(numeric.num(t))] + [numeric.to_text(numeric.num(c)) for c in x]
                            + [numeric.to_text(wkb.assemble_kernel(expansion, t, x))])
        out.write("kernel.csv", rows_csv(header, rows))


def cmd_verify(args, out: Output):
    job = _load(args.input)
    kind = job.get("type", "hermite")
    names = _variables(job, 1)
    grid_size = int(job.get("grid", 200))
    if kind == "hermite":
        f = parse(job["f"], names)
        nodes = sorted(numeric.parse_scalar(x) for x in job["nodes"])
        prob = HermiteProblem.from_function(f, nodes, int(job["k"]))
        p = interpolate_hermite(prob)
        grid = np.linspace(float(nodes[0]), float(nodes[-1]), grid_size)
        err = [float(p((numeric.num(x),)) - evaluate(f, (numeric.num(x),))) for x in grid]
        rep = error_report(grid, err, alpha=args.alpha)
        rows = list(rep.rows())
        if prob.size <= 40:
            q = dense_oracle(prob)
            diff = max(abs(float(p((numeric.num(x),)) - q((numeric.num(x),)))) for x in grid)
            rows.append(("oracle_sup_diff", diff, grid_size))
    elif kind == "bvp1d":
        P = lambda key: parse(str(job[key]), names)  # noqa: E731
        d, e = job["interval"]
        cd, ce = job["boundary"]
        prob = Bvp1D(P("a"), P("b"), P("c"), P("f"), d, e, cd, ce, tuple(job["nodes"]))
        p = solve_bvp_1d(prob)
        rows = residual_report(p, prob, np.linspace(float(d), float(e), grid_size), alpha=args.alpha).rows()
    else:
        raise ValueError(f"unknown verify type {kind!r}")
    text = rows_csv(["quantity", "value", "grid_size"], rows)
    out.write("report.csv", text, primary=True)
    if args.tolerance is not None:
        bad = [q for q, v, _ in rows if q in ("sup", "df_sup", "oracle_sup_diff") and v > args.tolerance]
        if bad:
            raise ArithmeticError(f"{', '.join(bad)} above tolerance {args.tolerance}")


def cmd_golden(args, out: Output):
    rows = golden.compare(golden.compute(), args.tolerance)
    text = rows_csv(
        ["index", "computed", "reference", "abs_diff", "tolerance", "ok"],
        [(m, numeric.to_text(c), ref, d, t, "yes" if ok else "no") for m, c, ref, d, t, ok in rows],
    )
    out.write("golden.csv", text, primary=True)
    bad = [r for r in rows if not r[-1]]
    if bad:
        first = bad[0]
        raise GoldenMismatch(
            f"{len(bad)} of {len(rows)} coefficients outside tolerance (first: a_{first[0]}, |diff| = {first[3]:.3g})"
        )


COMMANDS = {
    "interpolate": cmd_interpolate,
    "preserve-ops": cmd_preserve_ops,
    "solve-bvp1d": cmd_solve_bvp1d,
    "solve-collocation": cmd_solve_collocation,
    "synthesize": cmd_synthesize,
    "wkb": cmd_wkb,
    "verify": cmd_verify,
    "golden": cmd_golden,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", help="problem JSON file")
    common.add_argument("--output", help="output directory (default: main CSV to stdout)")
    common.add_argument("--precision", choices=numeric.MODES, default=numeric.DOUBLE)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for synthesize")
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--verbose", action="store_true")

    parser = _Parser(prog="regpoly", description="Regular polynomial interpolation and collocation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name in ("interpolate", "preserve-ops"):
            sp.add_argument("--preserve-order", action="store_true", help="keep input node order")
        if name == "synthesize":
            sp.add_argument("input_files", nargs="*", help="polynomial JSON files")
            sp.add_argument("--k", type=int, default=None)
        if name == "verify":
            sp.add_argument("--alpha", type=float, default=0.5, help="Hoelder exponent")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"regpoly: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    np.random.seed(args.seed)
    try:
        with numeric.precision(args.precision):
            COMMANDS[args.command](args, Output(args.output))
    except (ArithmeticError, numeric.SingularBlockError) as exc:
        print(f"regpoly {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"regpoly {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
