"""Command-line entry point: ``cik {simulate,knockoff,filter,approx,validate}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from cik import approx, diagnostics, experiments, io, models
from cik import filter as kfilter
from cik.rng import substream


def _support_of(spec):
    return None if spec.support is None else tuple(spec.support)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(type(o).__name__)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, default=_json_default)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_simulate(args):
    config = io.read_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)

    def progress(done, total):
        print(f"replicate {done}/{total}", file=sys.stderr)

    report = experiments.run_simulation(config, threads=args.threads, progress=progress)
    io.write_report(report, args.out)
    summary = args.summary or io.summary_path(args.out)
    io.write_summary(report, summary)
    for rec in report.records:
        print(
            f"u={io.fmt(rec['u'])} power={rec['mean_power']:.4f} (se {rec['se_power']:.4f}) "
            f"fdr={rec['mean_fdr']:.4f} (se {rec['se_fdr']:.4f})"
        )
    if not report.complete:
        print("interrupted: partial results written", file=sys.stderr)
        return 130
    return 0


def cmd_knockoff(args):
    spec = io.read_model(args.model)
    x, meta = io.read_matrix_file(args.x, _support_of(spec))
    if x.shape[1] != spec.p:
        raise ValueError(f"{args.x}: {x.shape[1]} columns, model has p = {spec.p}")
    kw = {}
    if args.gibbs:
        if spec.variant != "gibbs-mix":
            raise ValueError("--gibbs applies to the gibbs-mix variant only")
        kw["config"] = io.read_gibbs_config(args.gibbs)
    seed = 0 if args.seed is None else args.seed
    xk = models.sample_knockoff(spec, x, substream(seed), **kw)
    header = None if meta.header is None else [h + "_knockoff" for h in meta.header]
    io.write_matrix(args.out, xk, header)
    return 0


def cmd_filter(args):
    x = io.read_matrix(args.x)
    xk = io.read_matrix(args.xk)
    y = io.read_vector(args.y)
    seed = 0 if args.seed is None else args.seed
    res = kfilter.run_filter(
        kfilter.RegressionData(x, y, xk), args.q, plus=not args.no_plus, rng=substream(seed)
    )
    _emit(res.to_dict(), args.out)
    return 0


def cmd_approx(args):
    atoms = io.read_matrix(args.atoms)
    measure = approx.SmoothedMeasure.build(
        atoms, args.epsilon, args.mode, lip_b=args.lip_b, vol_B=args.vol_b
    )
    seed = 0 if args.seed is None else args.seed
    bound = approx.dbl_bound_check(measure, args.n_draws, substream(seed, 0))
    out = {
        "mode": args.mode,
        "epsilon": args.epsilon,
        "p": measure.p,
        "n_atoms": len(atoms),
        "c_smooth": measure.c_smooth,
        "e_norm_m": bound.estimate,
        "e_norm_m_se": bound.se,
        "bl_bound": bound.bound,
    }
    if args.pairs_out:
        t, tt = approx.sample_pair(measure, substream(seed, 1), args.n_pairs)
        p = measure.p
        header = [f"t{i + 1}" for i in range(p)] + [f"t_knockoff{i + 1}" for i in range(p)]
        io.write_matrix(args.pairs_out, np.hstack([t, tt]), header)
    _emit(out, args.out)
    return 0


def cmd_validate(args):
    spec = io.read_model(args.model)
    seed = 0 if args.seed is None else args.seed
    results = diagnostics.validate(spec, substream(seed), n_draws=args.n_draws)
    _emit(results, args.out)
    ok = all(r.get("pass", True) for r in results)
    return 0 if ok else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="cik", description="Conditional-independence knockoffs")
    ap.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    ap.add_argument(
        "--threads", type=int, default=None, help="worker threads (default: $CIK_THREADS or 1)"
    )
    sub = ap.add_subparsers(dest="command", required=True)

    # --seed is accepted before or after the subcommand
    def seeded(p):
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        return p

    s = seeded(sub.add_parser("simulate", help="power/FDR simulation"))
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="per-knockoff report CSV")
    s.add_argument("--summary", default=None, help="summary CSV (default <out>_summary.csv)")
    s.set_defaults(func=cmd_simulate)

    s = seeded(sub.add_parser("knockoff", help="sample knockoffs for the rows of X"))
    s.add_argument("--model", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--gibbs", default=None, help="Gibbs sampler settings JSON (gibbs-mix)")
    s.set_defaults(func=cmd_knockoff)

    s = seeded(sub.add_parser("filter", help="knockoff+ selection from X, X~ and y"))
    s.add_argument("--x", required=True)
    s.add_argument("--xk", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--q", type=float, default=0.1)
    s.add_argument("--no-plus", action="store_true", help="use the plain knockoff threshold")
    s.add_argument("--out", default=None, help="write JSON here instead of stdout")
    s.set_defaults(func=cmd_filter)

    s = seeded(sub.add_parser("approx", help="Gaussian smoothing of an atom list"))
    s.add_argument("--atoms", required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--mode", choices=("tv", "bl"), default="bl")
    s.add_argument("--lip-b", type=float, default=None, help="Lipschitz constant (tv mode)")
    s.add_argument("--vol-b", type=float, default=None, help="volume of B (tv mode)")
    s.add_argument("--n-draws", type=int, default=10_000)
    s.add_argument("--pairs-out", default=None, help="CSV of sampled (t, t~) pairs")
    s.add_argument("--n-pairs", type=int, default=1000)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_approx)

    s = seeded(sub.add_parser("validate", help="swap and membership diagnostics"))
    s.add_argument("--model", required=True)
    s.add_argument("--n-draws", type=int, default=1000)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"cik {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
