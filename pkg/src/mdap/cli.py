"""``mdap`` command line: gen, solve, exact, bound, bench.

Exit codes: 0 success, 1 usage error, 2 runtime failure.  Results go to
stdout (or --out); logs and progress go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .axial import axial_greedy, axial_lower_bound, dfm_slice_bound
from .bdts import RetryPolicy, bdts
from .bench import ALGORITHMS, ExperimentConfig, fit_scaling, records_to_csv, records_to_jsonl, run_trials
from .bilinear import bilinear_restarts
from .errors import DegenerateFit, MdapError
from .exact import exact_axial, exact_planar, parisi_value, planar_row_min_lower_bound
from .fileio import instance_to_dict, load_instance, save_instance
from .matching import min_cost_matching
from .model import sample_tensor

log = logging.getLogger("mdap")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _instance_flags(p, d_default=3):
    p.add_argument("--input", help="instance JSON file")
    p.add_argument("--n", type=int, help="side length when generating")
    p.add_argument("--d", type=int, default=d_default)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mdap", description="Random 3-dimensional assignment solvers and benchmarks.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="sample an Exp(1) instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")

    s = sub.add_parser("solve", help="run a heuristic")
    s.add_argument("algo", choices=("planar-bdts", "axial-greedy", "bilinear"))
    _instance_flags(s)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--mode", choices=("distributional", "fixed"))
    s.add_argument("--retries", type=int, default=8)
    s.add_argument("--restarts", type=int, default=1)
    s.add_argument("--out")

    e = sub.add_parser("exact", help="exhaustive oracles for tiny instances")
    e.add_argument("problem", choices=("planar", "axial", "matching"))
    _instance_flags(e)
    e.add_argument("--out")

    b = sub.add_parser("bound", help="reference values and lower bounds")
    b.add_argument("which", choices=("parisi", "planar-rowmin", "axial-slices", "dfm"))
    _instance_flags(b)
    b.add_argument("--i", type=int, help="1-based slice for dfm (default: sum over all)")

    x = sub.add_parser("bench", help="multi-trial experiment")
    x.add_argument("algo", choices=ALGORITHMS)
    x.add_argument("--n", type=int, nargs="+", required=True)
    x.add_argument("--k", type=int)
    x.add_argument("--trials", type=int, default=10)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--mode", choices=("distributional", "fixed"), default="distributional")
    x.add_argument("--retries", type=int, default=8)
    x.add_argument("--jobs", type=int, default=1)
    x.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    x.add_argument("--timing", action="store_true", help="fill runtime_ms (output is then not reproducible)")
    x.add_argument("--out")
    return ap


def _tensor(args, d=3):
    if args.input:
        t = load_instance(args.input)
    elif args.n is not None:
        t = sample_tensor(args.n, d, args.seed)
    else:
        raise UsageError("give --input FILE or --n N")
    if t.d != d:
        raise UsageError(f"expected a d={d} instance, got d={t.d}")
    return t


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _planar_doc(algo, P, cost, **extra):
    return {"algo": algo, "n": P.n, "sigma": list(P.sigma), "pi": list(P.pi), "cost": cost, **extra}


def cmd_gen(args):
    t = sample_tensor(args.n, args.d, args.seed)
    if args.out:
        save_instance(t, args.out)
    else:
        _emit(json.dumps(instance_to_dict(t)) + "\n", None)


def cmd_solve(args):
    if args.algo == "planar-bdts":
        mode = args.mode or ("fixed" if args.input else "distributional")
        policy = RetryPolicy(max_escalations=args.retries)
        if mode == "distributional":
            if args.input or args.n is None:
                raise UsageError("distributional mode samples its own costs: give --n and --seed, not --input")
            inp = (args.n, args.seed)
        else:
            inp = _tensor(args)
        P, rep = bdts(inp, k=args.k, mode=mode, policy=policy)
        doc = _planar_doc("planar-bdts", P, rep.cost, mode=mode, k=args.k, cost_upper=rep.cost_upper,
                          greedy_cost=rep.greedy_cost, main_cost=rep.main_cost,
                          final_cost=rep.final_cost, escalations=rep.escalations)
    elif args.algo == "axial-greedy":
        L, rep = axial_greedy(_tensor(args))
        doc = {"algo": "axial-greedy", "n": L.n, "K": L.K.tolist(), "cost": rep.total,
               "slice_costs": list(rep.slice_costs)}
    else:
        t = _tensor(args)
        res = bilinear_restarts(t, restarts=args.restarts, seed=args.seed)
        f = res.final
        doc = {"algo": "bilinear", "n": t.n, "sigma": list(f.y), "pi": list(f.z), "cost": f.Z,
               "iterations": f.iteration, "converged": res.converged, "trace": list(res.trace)}
    _emit(json.dumps(doc) + "\n", args.out)


def cmd_exact(args):
    if args.problem == "matching":
        t = _tensor(args, d=2)
        res = min_cost_matching(t.array)
        doc = {"problem": "matching", "n": t.n, "perm": res.perm.tolist(), "cost": res.cost}
    elif args.problem == "planar":
        P, cost = exact_planar(_tensor(args))
        doc = _planar_doc("exact-planar", P, cost)
    else:
        L, cost = exact_axial(_tensor(args))
        doc = {"problem": "axial", "n": L.n, "K": L.K.tolist(), "cost": cost}
    _emit(json.dumps(doc) + "\n", args.out)


def cmd_bound(args):
    if args.which == "parisi":
        if args.n is None:
            raise UsageError("parisi needs --n")
        v = parisi_value(args.n)
    elif args.which == "dfm":
        if args.n is None:
            raise UsageError("dfm needs --n")
        if args.i is None:
            v = sum(dfm_slice_bound(i, args.n) for i in range(1, args.n + 1))
        else:
            v = dfm_slice_bound(args.i, args.n)
    elif args.which == "planar-rowmin":
        v = planar_row_min_lower_bound(_tensor(args, d=args.d))
    else:
        v = axial_lower_bound(_tensor(args, d=args.d))
    print(f"{v:.6f}")


def cmd_bench(args):
    cfg = ExperimentConfig(args.algo, tuple(args.n), trials=args.trials, master_seed=args.seed,
                           k=args.k, mode=args.mode, retries=args.retries, jobs=args.jobs,
                           record_timing=args.timing)
    total = len(cfg.n_values) * cfg.trials
    done = [0]

    def progress(rec):
        done[0] += 1
        log.info("[%d/%d] n=%d trial=%d cost=%r", done[0], total, rec.n, rec.trial, rec.cost)

    recs = run_trials(cfg, on_record=progress)
    fmt = records_to_csv if args.format == "csv" else records_to_jsonl
    _emit(fmt(recs), args.out)
    failed = sum(r.failed for r in recs)
    if failed:
        log.warning("%d of %d runs exhausted their escalation cap", failed, total)
    try:
        fit = fit_scaling(recs)
        log.warning("log-log slope %.4f (intercept %.4f, rms residual %.4f)",
                    fit.slope, fit.intercept, fit.residual)
    except DegenerateFit:
        pass


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "exact": cmd_exact, "bound": cmd_bound, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.cmd](args)
    except UsageError as e:
        print(f"mdap: error: {e}", file=sys.stderr)
        return 1
    except (MdapError, ValueError, OSError) as e:
        print(f"mdap: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
