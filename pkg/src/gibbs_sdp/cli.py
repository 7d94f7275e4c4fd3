"""Command-line entry point: ``gibbs-sdp {gen,solve,verify,bench,cost-model}``.

Exit codes: 0 success, 1 Larger or infeasible at the queried guess, 2 bad
input, 3 internal or numerical failure.
"""

import argparse
import json
import logging
import sys

import numpy as np

from .bench import BenchSpec, reports_to_csv, run_benchmark, solve_instance
from .exceptions import (DimensionError, GibbsSDPError, InvalidInstanceError,
                         PreconditionError)
from .generators import KINDS, GeneratorSpec, generate
from .model import load_instance, save_instance, verify_dual
from .qsim.params import (QsimConfig, hbar_sampler_cost, measurement_cost,
                          payoff_sampler_cost, theoretical_cost_report)

EXIT_OK, EXIT_LARGER, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
INPUT_ERRORS = (InvalidInstanceError, PreconditionError, DimensionError, ValueError, OSError,
                KeyError)

log = logging.getLogger("gibbs_sdp")


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_gen(args):
    inst, answer = generate(GeneratorSpec(args.kind, args.n, args.m, args.s, args.seed))
    save_instance(inst, args.out)
    if answer is not None:
        path = args.answer_out or f"{args.out}.answer.json"
        _write_json(answer.to_dict(), path)
        log.info("hidden answer written to %s", path)
    return EXIT_OK


def cmd_solve(args):
    inst = load_instance(args.instance)
    report = solve_instance(inst, args.path, instance_id=inst.name or args.instance,
                            alpha=args.alpha, delta=args.delta, xi=args.xi,
                            profile=args.profile, seed=args.seed)
    _write_json(report.to_dict(), args.out_report)
    if report.status in ("dual", "optimized"):
        return EXIT_OK
    if report.status == "larger":
        return EXIT_LARGER
    print(f"run ended with status {report.status}: {report.detail}", file=sys.stderr)
    return EXIT_INTERNAL


def _read_dual(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, list):
        return np.asarray(data, dtype=float)
    if "y" in data:
        return np.asarray(data["y"], dtype=float)
    if isinstance(data.get("dual"), dict) and "y" in data["dual"]:
        return np.asarray(data["dual"]["y"], dtype=float)
    raise ValueError(f"{path}: expected a list, {{'y': [...]}} or a report with dual.y")


def cmd_verify(args):
    inst = load_instance(args.instance)
    y = _read_dual(args.dual)
    alpha = args.alpha if args.alpha is not None else np.inf
    ok, cert = verify_dual(inst, y, alpha, args.delta)
    out = {"feasible": bool(cert.slack_ok), "objective": cert.objective,
           "min_slack": cert.min_slack}
    if args.alpha is not None:
        out.update(bound=cert.bound, objective_ok=bool(cert.objective_ok))
    _write_json(out, None)
    return EXIT_OK if ok else EXIT_LARGER


def cmd_bench(args):
    spec = BenchSpec.load(args.spec)
    reports = run_benchmark(spec, workers=args.workers)
    reports_to_csv(reports, args.out_csv)
    if args.out_reports:
        with open(args.out_reports, "w") as fh:
            for rep in reports:
                fh.write(rep.to_json() + "\n")
    return EXIT_OK


def cmd_cost_model(args):
    cfg = QsimConfig(delta=args.delta, xi=args.xi, alpha=args.alpha, R=args.R, n=args.n,
                     m=args.m, s=args.s, profile=args.profile)
    rep = theoretical_cost_report(args.n, args.m, args.s, args.R, args.delta)
    out = {"parameters": cfg.summary(),
           "G_hbar": hbar_sampler_cost(cfg), "G_M": payoff_sampler_cost(cfg),
           "T_meas": measurement_cost(args.s, cfg.eps / 2, args.n, cfg.p_e),
           "bounds": {"G_hbar": rep.G_hbar_bound, "G_M": rep.G_M_bound,
                      "total": rep.total_bound, "headline": rep.headline_bound}}
    _write_json(out, None)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="gibbs-sdp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated instance as JSON")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--s", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--answer-out", help="hidden answer file (lower-bound kinds)")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="optimize, or decide a single guess with --alpha")
    s.add_argument("--instance", required=True)
    s.add_argument("--path", choices=("classical", "qsim"), default="classical")
    s.add_argument("--alpha", type=float)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--xi", type=float, default=1.0)
    s.add_argument("--profile", choices=("paper", "practical"), default="practical")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-report", default="-")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a dual vector against an instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--dual", required=True)
    v.add_argument("--alpha", type=float, help="also check b.y <= (1 + delta) alpha")
    v.add_argument("--delta", type=float, default=0.0)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a benchmark spec and write the CSV")
    b.add_argument("--spec", required=True)
    b.add_argument("--out-csv", required=True)
    b.add_argument("--out-reports", help="also write one JSON report per line")
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("cost-model", help="print derived parameters and cost bounds")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--s", type=int, default=1)
    c.add_argument("--R", type=float, default=1.0)
    c.add_argument("--delta", type=float, default=0.1)
    c.add_argument("--xi", type=float, default=1.0)
    c.add_argument("--alpha", type=float, default=1.0)
    c.add_argument("--profile", choices=("paper", "practical"), default="paper")
    c.set_defaults(func=cmd_cost_model)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GibbsSDPError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
