"""Command-line interface.

Subcommands: simulate (one run), sweep (config-driven experiments), kcore
(fixed-point prediction, optional Monte Carlo check), explore (neighborhood
exploration of a configuration model), oracle (self-check battery), opperc
(oriented-percolation survival), fit (scaling classification of n,T data).
Global flags: --seed, --threads, --out.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiments
from .cp import simulate_cp
from .degrees import iid_degree_sequence
from .experiments import (
    build_graph,
    fit_scaling,
    parse_config,
    parse_penalty_spec,
    parse_pmf_spec,
)
from .graphs import build_configuration_model
from .renorm import survival_estimate, write_survival_csv
from .rng import stream
from .structure import explore_neighborhood, jl_fixed_point, k_core


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker processes for replica ensembles")
    sp.add_argument("--out", default=None, help="output path prefix")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="degcp",
        description="Degree-penalized contact processes on random graphs.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p_sim = sub.add_parser("simulate", help="one contact-process run", epilog=(
        "Writes a survival report as JSON (keys t_ext, censored, local_ext, "
        "infestation_intervals); --trace adds a CSV with columns "
        "time,event_type,vertex,aux."))
    p_sim.add_argument("--graph", required=True,
                       help="e.g. star:K=20 | cm:pmf=powerlaw:tau=2.5,zmax=auto | path")
    p_sim.add_argument("--n", type=int, default=None, help="graph size where needed")
    p_sim.add_argument("--penalty", default="product:mu=0.5")
    p_sim.add_argument("--lam", type=float, default=1.0)
    p_sim.add_argument("--xi0", default="all", help="'all', 'root', or comma list")
    p_sim.add_argument("--horizon", type=float, default=100.0)
    p_sim.add_argument("--trace", default=None, help="CSV path for the event trace")
    _add_common(p_sim)

    p_sweep = sub.add_parser("sweep", help="run a config-driven experiment", epilog=(
        "CSV columns per scenario: extinction_scaling/core_survival/phase_sweep: "
        "grid_*, grid_index, replica, seed_key, t_ext, censored, escaped, n; "
        "star_survival: ..., K, t_survival, censored; attack_distribution: "
        "..., n, M, q_M, sup_diff; op_percolation: ..., delta, depth, survival, "
        "ci_lo, ci_hi."))
    p_sweep.add_argument("config", help="config file (schema=1 header + INI sections)")
    _add_common(p_sweep)

    p_kcore = sub.add_parser("kcore", help="k-core fixed-point prediction")
    p_kcore.add_argument("--pmf", required=True, help="e.g. binomial:n=10,p=0.35")
    p_kcore.add_argument("--k", type=int, required=True)
    p_kcore.add_argument("--simulate-n", type=int, default=None,
                         help="also prune a sampled CM of this size")
    _add_common(p_kcore)

    p_exp = sub.add_parser("explore", help="neighborhood exploration of a CM")
    p_exp.add_argument("--pmf", required=True)
    p_exp.add_argument("--n", type=int, required=True)
    p_exp.add_argument("--v0", type=int, default=0)
    p_exp.add_argument("--r", type=int, default=2)
    _add_common(p_exp)

    p_orc = sub.add_parser("oracle", help="run the oracle battery; nonzero exit on failure")
    _add_common(p_orc)

    p_op = sub.add_parser("opperc", help="oriented-percolation survival estimates",
                          epilog="CSV columns: delta,depth,survival,ci_lo,ci_hi")
    p_op.add_argument("--delta", required=True, help="comma list of deltas")
    p_op.add_argument("--depth", type=int, default=200)
    p_op.add_argument("--reps", type=int, default=10000)
    _add_common(p_op)

    p_fit = sub.add_parser("fit", help="classify the growth of (n, T) data")
    p_fit.add_argument("--points", default=None, help="n:T,n:T,... pairs")
    p_fit.add_argument("--csv", default=None, help="CSV file with n,T columns")
    _add_common(p_fit)

    args = ap.parse_args(argv)
    return _dispatch(args)


def _dispatch(args) -> int:
    if args.cmd == "simulate":
        rng = stream(args.seed, 0)
        graph = build_graph(args.graph, args.n, rng)
        pen = parse_penalty_spec(args.penalty, args.lam)
        if args.xi0 == "all":
            xi0 = range(graph.n) if hasattr(graph, "degrees") else [0]
        elif args.xi0 == "root":
            xi0 = [0]
        else:
            xi0 = [int(x) for x in args.xi0.split(",")]
        trace = [] if args.trace else None
        rep = simulate_cp(graph, pen, xi0, args.horizon, stream(args.seed, 1), trace=trace)
        if args.trace:
            with open(args.trace, "w") as fh:
                fh.write("time,event_type,vertex,aux\n")
                for t, ev, v, aux in trace:
                    fh.write(f"{t!r},{ev},{v},{aux}\n")
        _emit(args, rep.to_json_dict())
        return 0

    if args.cmd == "sweep":
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if args.out:
            cfg.out = args.out
        if args.seed:
            cfg.seed = args.seed
        csv_path, json_path, summary = experiments.run_experiment(cfg, args.threads)
        print(f"wrote {csv_path} and {json_path}", file=sys.stderr)
        if cfg.scenario == "oracle_suite":
            failed = int(summary["cells"][0].get("failed", 0))
            return 1 if failed else 0
        return 0

    if args.cmd == "kcore":
        pmf = parse_pmf_spec(args.pmf, args.simulate_n)
        rep = jl_fixed_point(pmf, args.k)
        out = rep.to_json_dict()
        if args.simulate_n:
            rng = stream(args.seed, 0)
            deg = iid_degree_sequence(pmf, args.simulate_n, rng)
            g = build_configuration_model(deg, rng)
            core, _ = k_core(g, args.k)
            out["mc_density"] = core.n / args.simulate_n
        _emit(args, out)
        return 0

    if args.cmd == "explore":
        rng = stream(args.seed, 0)
        pmf = parse_pmf_spec(args.pmf, args.n)
        deg = iid_degree_sequence(pmf, args.n, rng)
        res = explore_neighborhood(deg, args.v0, args.r, rng)
        _emit(args, {
            "ball_size": res.ball.n,
            "collisions": res.collisions,
            "surplus": res.surplus,
            "tree_size": res.tree_size,
            "forward_degrees": res.forward_degrees[:50],
        })
        return 0

    if args.cmd == "oracle":
        from .oracles import run_all

        results = run_all(args.seed)
        bad = 0
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
            bad += not ok
        return 1 if bad else 0

    if args.cmd == "opperc":
        deltas = [float(x) for x in args.delta.split(",")]
        ests = [
            survival_estimate(d, args.depth, args.reps, stream(args.seed, i))
            for i, d in enumerate(deltas)
        ]
        if args.out:
            write_survival_csv(ests, args.out)
        else:
            print("delta,depth,survival,ci_lo,ci_hi")
            for e in ests:
                print(f"{e.delta!r},{e.depth},{e.p!r},{e.ci_lo!r},{e.ci_hi!r}")
        return 0

    if args.cmd == "fit":
        if args.points:
            pairs = [p.split(":") for p in args.points.split(",")]
            ns = [float(a) for a, _ in pairs]
            ts = [float(b) for _, b in pairs]
        elif args.csv:
            data = np.loadtxt(args.csv, delimiter=",", skiprows=1)
            ns, ts = data[:, 0], data[:, 1]
        else:
            raise SystemExit("fit needs --points or --csv")
        _emit(args, fit_scaling(ns, ts).to_json_dict())
        return 0

    raise SystemExit(f"unknown command {args.cmd!r}")


def _emit(args, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


if __name__ == "__main__":
    raise SystemExit(main())
