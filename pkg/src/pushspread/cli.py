"""Command-line entry point: ``pushspread <command> ...``."""

import argparse
import csv
import json
import logging
import math
import sys

from . import bounds, spectral
from .config_model import sample_multigraph, sample_simple_regular
from .errors import CapacityError, DivergenceError, DomainError, InputError, SamplingError
from .experiment import ExperimentSpec, sweep
from .graph import format_edge_csv, read_graph
from .push import final_phase_diagnostics, run_incremental, run_static
from .rng import make_rng
from .theory import TheoryParams, c_d, integrate, predict_T

EXIT_VIOLATION = 1
EXIT_INPUT = 2


def _emit(text, path=None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_gen(args):
    rng = make_rng(args.seed)
    if args.multigraph:
        g, attempts = sample_multigraph(args.n, args.d, rng), 1
    else:
        g, attempts = sample_simple_regular(args.n, args.d, rng, args.max_attempts)
    _emit(format_edge_csv(g), args.out)
    print(f"attempts={attempts} simple={str(g.simple).lower()}", file=sys.stderr)
    return 0


def cmd_run(args):
    if args.graph:
        g = read_graph(args.graph)
        if args.mode == "incremental":
            raise InputError("incremental mode samples its own graph; drop --graph")
        trace = run_static(g, args.start, args.seed, phase_exponent=args.phase_exponent)
    elif args.mode == "incremental":
        trace, g = run_incremental(args.n, args.d, args.seed, require_simple=not args.multigraph,
                                   phase_exponent=args.phase_exponent, strict=False)
    else:
        rng = make_rng(args.seed)
        if args.multigraph:
            g = sample_multigraph(args.n, args.d, rng)
        else:
            g = sample_simple_regular(args.n, args.d, rng).graph
        trace = run_static(g, args.start, rng, phase_exponent=args.phase_exponent)
        trace.seed = args.seed
    fp = final_phase_diagnostics(trace, g)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(trace.to_json())
    summary = {
        "n": trace.n, "d": trace.d, "mode": trace.mode, "seed": trace.seed,
        "T": trace.T, "T0": trace.T0, "T1": trace.T1, "coverage": trace.coverage,
        "violations": len(trace.violations),
        "final_phase_flags": fp.flags if fp.applicable else None,
    }
    print(json.dumps(summary))
    return EXIT_VIOLATION if trace.violations else 0


def cmd_theory(args):
    params = TheoryParams(args.n, args.d, p_start=args.p0, u_start=args.u0,
                          eps=args.eps, phase_exponent=args.phase_exponent)
    traj = integrate(params)
    lead, pred = predict_T(args.n, args.d, phase_exponent=args.phase_exponent)
    header = {
        "C_d": c_d(args.d),
        "t_1": traj.t1,
        "t_2": traj.t2,
        "middle_length": traj.middle_length,
        "predicted_T": lead,
        "band": list(pred.final_band),
    }
    if args.out == "json":
        body = dict(header, rows=[
            {"t": t, "p": float(traj.p[t]), "u": float(traj.u[t]), "f": float(traj.f[t]), "r": float(traj.r[t])}
            for t in range(len(traj.p))
        ])
        _emit(json.dumps(body) + "\n", args.output)
        return 0
    lines = [f"# {k}={json.dumps(v)}" for k, v in header.items()]
    out = [*lines]
    rows = [["t", "p", "u", "f", "r"]]
    for t in range(len(traj.p)):
        rows.append([t, repr(float(traj.p[t])), repr(float(traj.u[t])), repr(float(traj.f[t])), repr(float(traj.r[t]))])
    text = "\n".join(out) + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n"
    _emit(text, args.output)
    return 0


def cmd_spectral(args):
    g = read_graph(args.graph)
    prof = spectral.spectrum(g, cap=args.cap, estimate=args.estimate)
    data = prof.to_dict()
    if args.C is not None:
        data["expander_ok"] = prof.expander_ok(args.C)
    _emit(json.dumps(data) + "\n", args.output)
    return 0


def cmd_typicality(args):
    g = read_graph(args.graph)
    eps = args.eps if args.eps is not None else math.log(g.n) ** (-1 / 9)
    rep = spectral.typicality_check(g, eps, args.budget, args.seed)
    _emit(json.dumps(rep.to_dict()) + "\n", args.output)
    return 0


def cmd_bounds(args):
    if args.which == "chernoff":
        b = bounds.chernoff_tail(args.mu, args.t)
    elif args.which == "talagrand":
        b = bounds.talagrand_tail(args.m, args.t, args.r, args.c)
    else:
        b = bounds.lemma1_tail(args.mu, args.eps, args.d, args.n)
    print(json.dumps(b.to_dict()))
    return 0


def cmd_sweep(args):
    spec = ExperimentSpec.load(args.spec)
    res = sweep(spec, workers=args.workers, out_dir=args.out_dir)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["cell", "n", "d", "runs", "meanT", "C_hat", "C_d"])
    for s in res.summaries:
        w.writerow([s["cell"], s["n"], s["d"], s["runs"],
                    "" if s["meanT"] is None else f"{s['meanT']:.3f}",
                    "" if s["C_hat"] is None else f"{s['C_hat']:.4f}", f"{s['C_d']:.4f}"])
    if res.violations:
        print(f"identity violations: {res.violations}", file=sys.stderr)
        return EXIT_VIOLATION
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="pushspread", description="Push rumor spreading on regular graphs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a random regular graph as an edge-list CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--multigraph", action="store_true", help="keep loops and parallel edges")
    p.add_argument("--max-attempts", type=int, default=1000)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="one push run, optionally writing its trace")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["static", "incremental"], default="static")
    p.add_argument("--graph")
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--multigraph", action="store_true")
    p.add_argument("--phase-exponent", type=float, default=7.0)
    p.add_argument("--trace")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("theory", help="integrate the mean-field recursion")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p0", type=float)
    p.add_argument("--u0", type=float)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--phase-exponent", type=float, default=7.0)
    p.add_argument("--out", choices=["csv", "json"], default="csv")
    p.add_argument("--output", help="file to write (default stdout)")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("spectral", help="adjacency spectrum, lambda and Alon-Boppana slack")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", choices=["json"], default="json")
    p.add_argument("--output")
    p.add_argument("--cap", type=int, default=spectral.DENSE_CAP)
    p.add_argument("--estimate", action="store_true", help="Lanczos estimate above the cap")
    p.add_argument("--C", type=float, help="also test lambda <= C sqrt(d)")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("typicality", help="sampled (p, eps)-typicality check")
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=float, help="default ln(n)^(-1/9)")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=["json"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_typicality)

    p = sub.add_parser("bounds", help="tail-bound calculators")
    bs = p.add_subparsers(dest="which", required=True)
    q = bs.add_parser("chernoff")
    q.add_argument("--mu", type=float, required=True)
    q.add_argument("--t", type=float, required=True)
    q = bs.add_parser("talagrand")
    q.add_argument("--m", type=float, required=True)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--c", type=float, required=True)
    q = bs.add_parser("lemma1")
    q.add_argument("--mu", type=float, required=True)
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--n", type=int)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="run an experiment spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run" and not args.graph and (args.n is None or args.d is None):
        print("error: run needs --n and --d, or --graph", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, DomainError, SamplingError, CapacityError, DivergenceError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
