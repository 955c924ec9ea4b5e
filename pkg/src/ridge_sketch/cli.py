"""Command-line interface: ``generate``, ``sweep``, ``lcurve`` and ``bench``.

Exit codes: 0 on success, 2 for usage errors, 1 for numerical or I/O failures
(a JSON error record is written to stderr). ``RIDGE_SKETCH_SEED`` overrides
every ``--seed`` flag.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import matio
from .core import ProblemInstance, RidgeSketchError
from .generate import GeneratorSpec, generate_problem
from .report import build_report, write_csv, write_report
from .sketch import KINDS, EmbeddingSpec
from .solver import LsqrConfig
from .sweep import METHODS, SweepRequest, lcurve_points, run_sweep

log = logging.getLogger("ridge_sketch")

SEED_ENV = "RIDGE_SKETCH_SEED"


class UsageError(Exception):
    pass


def parse_lambdas(text: str) -> list[float]:
    """``a:b:Klog`` gives K log-spaced values from a to b; otherwise a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or not parts[2].endswith("log"):
            raise UsageError(f"bad lambda grid {text!r}; expected a:b:Klog")
        try:
            a, b, k = float(parts[0]), float(parts[1]), int(parts[2][:-3])
        except ValueError as exc:
            raise UsageError(f"bad lambda grid {text!r}: {exc}") from None
        if a <= 0 or b <= 0 or k < 1:
            raise UsageError(f"lambda grid needs a, b > 0 and K >= 1, got {text!r}")
        return [float(v) for v in np.logspace(np.log10(a), np.log10(b), k)]
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad lambda list {text!r}: {exc}") from None
    if not vals or any(not v > 0 for v in vals):
        raise UsageError("lambdas must be a nonempty list of positive numbers")
    return vals


def _seed(value: int) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        return int(env)
    return value


def _stem(path: Path) -> Path:
    return path.with_suffix("") if path.suffix in (".rskm", ".mtx") else path


def _cmd_generate(args) -> int:
    spec = GeneratorSpec(
        m=args.m, n=args.n, sigma_max=args.sigma_max, sigma_min=args.sigma_min,
        noise_norm=args.noise, seed=_seed(args.seed),
    )
    problem, x_true = generate_problem(spec)
    out = Path(args.output)
    stem = _stem(out)
    if out.suffix == ".mtx":
        matio.write_matrix_market(out, problem.A)
    else:
        matio.write_rskm(out, problem.A)
    b_path = stem.with_suffix(".b")
    matio.write_rskm(b_path, problem.b)
    meta = dict(problem.meta)
    meta.update({
        "m": spec.m,
        "n": spec.n,
        "orientation": problem.orientation.value,
        "matrix": out.name,
        "rhs": b_path.name,
        "x_true": x_true.tolist(),
    })
    meta_path = stem.with_suffix(".meta.json")
    meta_path.write_text(json.dumps(meta, indent=1) + "\n")
    print(json.dumps({"matrix": str(out), "rhs": str(b_path), "meta": str(meta_path)}))
    return 0


def load_problem(matrix_path, rhs_path=None) -> ProblemInstance:
    matrix_path = Path(matrix_path)
    stem = _stem(matrix_path)
    A = matio.read_matrix(matrix_path)
    b = matio.read_vector(rhs_path or stem.with_suffix(".b"))
    meta = {}
    meta_path = stem.with_suffix(".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        meta.pop("x_true", None)
    return ProblemInstance.from_arrays(A, b, meta)


def _embedding(args, problem) -> EmbeddingSpec | None:
    if args.embedding is None and args.sketch_size is None:
        if args.seed is None and not os.environ.get(SEED_ENV):
            return None
    m, n = problem.shape
    kind = args.embedding or "gaussian"
    if args.sketch_size is not None:
        s = args.sketch_size
    elif args.oversampling is not None:
        s = int(round(args.oversampling * min(m, n)))
    else:
        s = min(4 * min(m, n), max(m, n))
    return EmbeddingSpec(kind, s, _seed(args.seed or 0))


def _cmd_sweep(args) -> int:
    problem = load_problem(args.input, args.rhs)
    lambdas = parse_lambdas(args.lambdas)
    req = SweepRequest(
        problem=problem,
        lambdas=lambdas,
        method=args.method,
        embedding=_embedding(args, problem),
        alpha=args.alpha,
        solver=LsqrConfig(args.tol, args.max_iter, record_history=not args.no_history),
        threads=args.threads,
    )
    result = run_sweep(req)
    doc = build_report(req, result, source=args.input, include_solution=not args.no_solutions)
    if args.report:
        write_report(args.report, doc)
    if args.csv:
        write_csv(args.csv, result)
    if not args.report and not args.csv:
        sys.stdout.write(result.to_csv())
    log.info("solved %d lambdas with %s", len(lambdas), args.method)
    return 0


def _cmd_lcurve(args) -> int:
    doc = json.loads(Path(args.report).read_text())
    recs = doc["records"]
    curve = lcurve_points(
        [r["lambda"] for r in recs],
        [r["residual_norm"] for r in recs],
        [r["solution_norm"] for r in recs],
    )
    if args.output:
        with open(args.output, "w") as fh:
            fh.write("lambda,log10_residual,log10_solution_norm,corner\n")
            for i, (l, r, s) in enumerate(zip(curve.lambdas, curve.log_residual, curve.log_solution)):
                fh.write(f"{l!r},{r!r},{s!r},{int(i == curve.corner)}\n")
    if args.json:
        Path(args.json).write_text(json.dumps(curve.to_json(), indent=1) + "\n")
    print(json.dumps({"corner": curve.corner,
                      "corner_lambda": None if curve.corner is None else curve.lambdas[curve.corner]}))
    return 0


def _cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}")
    if args.input:
        problem = load_problem(args.input, args.rhs)
    else:
        problem, _ = generate_problem(GeneratorSpec(
            m=args.m, n=args.n, sigma_max=args.sigma_max, sigma_min=args.sigma_min,
            noise_norm=1e-3, seed=_seed(args.seed or 0)))
    m, n = problem.shape
    s = int(round(args.oversampling * min(m, n)))
    if s > max(m, n):
        raise UsageError(f"oversampling {args.oversampling} gives s = {s} > {max(m, n)}")
    lambdas = parse_lambdas(args.lambdas)
    summary = {}
    for method in methods:
        per_lambda = []
        totals = []
        for run in range(args.runs):
            req = SweepRequest(
                problem, lambdas, method,
                embedding=EmbeddingSpec(args.embedding, s, _seed(args.seed or 0) + run),
                alpha=args.alpha,
                solver=LsqrConfig(args.tol, record_history=False),
                threads=args.threads,
            )
            t0 = time.perf_counter()
            res = run_sweep(req)
            totals.append(time.perf_counter() - t0)
            per_lambda.append(statistics.median(r.factor_time + r.solve_time for r in res.records))
        summary[method] = {
            "median_per_lambda_time": statistics.median(per_lambda),
            "median_total_time": statistics.median(totals),
            "runs": args.runs,
        }
    doc = {"m": m, "n": n, "s": s, "embedding": args.embedding, "lambdas": lambdas, "methods": summary}
    if args.report:
        write_report(args.report, doc)
    print(json.dumps(doc["methods"], indent=1))
    return 0


def _bounded(kind, lo=None, hi=None, lo_open=False):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise argparse.ArgumentTypeError(f"{text} is below the allowed range")
        if hi is not None and v >= hi:
            raise argparse.ArgumentTypeError(f"{text} is above the allowed range")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ridge-sketch", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic problem")
    g.add_argument("--m", type=_bounded(int, 1), required=True)
    g.add_argument("--n", type=_bounded(int, 1), required=True)
    g.add_argument("--sigma-max", type=float, default=1.0)
    g.add_argument("--sigma-min", type=float, default=1e-6)
    g.add_argument("--noise", type=_bounded(float, 0.0), default=1e-3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True, help="matrix path (.rskm or .mtx)")
    g.set_defaults(func=_cmd_generate)

    def solver_flags(q):
        q.add_argument("--tol", type=_bounded(float, 0.0, 1.0, lo_open=True), default=1e-6)
        q.add_argument("--threads", type=_bounded(int, 1), default=os.cpu_count() or 1)
        q.add_argument("--seed", type=int, default=None)
        q.add_argument("--alpha", type=_bounded(float, 1.0), default=2.0,
                       help="oversampling for lowrank")

    s = sub.add_parser("sweep", help="solve for a grid of lambdas")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-b", "--rhs", default=None, help="defaults to <stem>.b")
    s.add_argument("--method", choices=METHODS, default="chol")
    s.add_argument("--lambdas", default="10:1e-10:13log")
    s.add_argument("--embedding", choices=KINDS, default=None)
    s.add_argument("--sketch-size", type=_bounded(int, 1), default=None)
    s.add_argument("--oversampling", type=float, default=None, help="s = oversampling * min(m, n)")
    s.add_argument("--max-iter", type=_bounded(int, 1), default=None)
    s.add_argument("--report", default=None, help="JSON report path")
    s.add_argument("--csv", default=None, help="CSV path")
    s.add_argument("--no-solutions", action="store_true", help="omit x from the report")
    s.add_argument("--no-history", action="store_true", help="omit residual histories")
    solver_flags(s)
    s.set_defaults(func=_cmd_sweep)

    lc = sub.add_parser("lcurve", help="L-curve points and corner from a sweep report")
    lc.add_argument("-r", "--report", required=True)
    lc.add_argument("-o", "--output", default=None, help="CSV path")
    lc.add_argument("--json", default=None)
    lc.set_defaults(func=_cmd_lcurve)

    bn = sub.add_parser("bench", help="compare per-lambda cost of methods")
    bn.add_argument("--methods", default="chol,qr_baseline")
    bn.add_argument("--oversampling", type=float, default=20.0)
    bn.add_argument("--embedding", choices=KINDS, default="srtt")
    bn.add_argument("--m", type=int, default=20000)
    bn.add_argument("--n", type=int, default=500)
    bn.add_argument("--sigma-max", type=float, default=1.0)
    bn.add_argument("--sigma-min", type=float, default=1e-6)
    bn.add_argument("--lambdas", default="10:1e-10:15log")
    bn.add_argument("--runs", type=_bounded(int, 1), default=5)
    bn.add_argument("-i", "--input", default=None)
    bn.add_argument("-b", "--rhs", default=None)
    bn.add_argument("--report", default=None)
    solver_flags(bn)
    bn.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (RidgeSketchError, ArithmeticError, OSError, ValueError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        index = getattr(exc, "index", None)
        if index is not None:
            record["lambda_index"] = index
        print(json.dumps(record), file=sys.stderr)
        return 1


def run_cli(argv) -> int:
    """Run with ``argv`` and return the exit code, converting argparse exits."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
