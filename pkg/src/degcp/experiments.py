"""Config-driven experiments: extinction-time scaling, star survival,
attacked-degree laws, k-core survival trends, oriented-percolation sweeps,
and the scaling-fit classifier behind the phase table.

Config files are plain text with a ``schema=1`` first line followed by INI
sections; see :func:`parse_config`. Outputs are CSV rows (one per grid point
and replica, each carrying its substream seed for exact replay) plus a JSON
summary. Identical configs produce byte-identical outputs.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .cp import simulate_cp
from .degrees import (
    DegreePMF,
    binomial_pmf,
    binomial_thinning_pmf,
    delta_pmf,
    explicit_pmf,
    iid_degree_sequence,
    power_law_pmf,
    stretched_heavy_pmf,
    uniform_pmf,
)
from .graphs import (
    build_configuration_model,
    build_star,
    build_star_row,
    cycle_graph,
    path_graph,
    random_regular_multigraph,
)
from .penalty import PenaltySpec
from .renorm import survival_estimate
from .rng import stream
from .structure import jl_fixed_point, k_core
from .trees import sample_gw_tree

__all__ = [
    "ScalingFit",
    "fit_scaling",
    "ExperimentConfig",
    "parse_config",
    "parse_pmf_spec",
    "parse_penalty_spec",
    "build_graph",
    "run_experiment",
    "phase_table",
    "SCENARIOS",
]

SCENARIOS = (
    "phase_sweep",
    "extinction_scaling",
    "star_survival",
    "core_survival",
    "attack_distribution",
    "oracle_suite",
    "op_percolation",
)

GROWTH_ORDER = ("bounded", "logarithmic", "polynomial", "exponential")


# -- scaling fits -------------------------------------------------------------


@dataclass
class ScalingFit:
    """Best growth model for a series of (n, T) points.

    ``classification`` is the slowest-growing model whose R^2 (computed in
    the original T scale) comes within 0.05 of the best; an argmax alone
    cannot separate a logarithm from a small-exponent polynomial on a short
    grid, and a faster class is only claimed when no slower one explains the
    data about as well. ``gap`` is the margin between the two best R^2.
    """

    classification: str
    params: dict
    r2: dict
    gap: float

    def to_json_dict(self):
        return {
            "classification": self.classification,
            "params": {k: list(v) for k, v in self.params.items()},
            "r2": self.r2,
            "gap": self.gap,
        }


def _r2_original(y, pred):
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else -math.inf
    return 1.0 - ss_res / ss_tot


def fit_scaling(ns, ts, gap_rule: float = 0.05) -> ScalingFit:
    """Least-squares fits of T against constant, a + b log n, a n^b, a e^(bn).

    Requires at least 4 points. The log model is fit directly, the
    polynomial on log-log and the exponential on semi-log scale; all four
    are scored by R^2 in the original scale.
    """
    n = np.asarray(ns, dtype=float)
    t = np.asarray(ts, dtype=float)
    if n.size < 4:
        raise ValueError("at least 4 points required")
    params = {}
    r2 = {}

    # bounded: predicts the mean, R^2 = 0 by construction (1.0 when exact)
    params["bounded"] = (float(t.mean()),)
    r2["bounded"] = _r2_original(t, np.full_like(t, t.mean()))

    def linfit(x, y):
        A = np.vstack([np.ones_like(x), x]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        return coef

    a, b = linfit(np.log(n), t)
    params["logarithmic"] = (float(a), float(b))
    r2["logarithmic"] = _r2_original(t, a + b * np.log(n))

    if np.all(t > 0):
        la, lb = linfit(np.log(n), np.log(t))
        params["polynomial"] = (float(math.exp(la)), float(lb))
        r2["polynomial"] = _r2_original(t, np.exp(la) * n**lb)
        ea, eb = linfit(n, np.log(t))
        params["exponential"] = (float(math.exp(ea)), float(eb))
        with np.errstate(over="ignore"):
            r2["exponential"] = _r2_original(t, np.exp(ea + eb * n))
    else:
        params["polynomial"] = (float("nan"), float("nan"))
        params["exponential"] = (float("nan"), float("nan"))
        r2["polynomial"] = -math.inf
        r2["exponential"] = -math.inf

    finite = {k: v for k, v in r2.items() if np.isfinite(v)}
    if not finite:
        return ScalingFit("ambiguous", params, r2, 0.0)
    best = max(finite.values())
    ranked = sorted(finite.values(), reverse=True)
    gap = best - ranked[1] if len(ranked) > 1 else best
    for kind in GROWTH_ORDER:
        if finite.get(kind, -math.inf) >= best - gap_rule:
            return ScalingFit(kind, params, r2, float(gap))
    return ScalingFit("ambiguous", params, r2, float(gap))


# -- spec parsing ----------------------------------------------------------------


def _parse_kv(body: str) -> dict:
    out = {}
    if not body:
        return out
    for item in body.split(","):
        if not item.strip():
            continue
        key, _, val = item.partition("=")
        out[key.strip()] = val.strip()
    return out


def parse_pmf_spec(spec: str, n: int | None = None) -> DegreePMF:
    """Degree-distribution specs used in configs and on the command line.

    ``powerlaw:tau=2.5,zmin=1,zmax=auto`` (auto caps at n^(1/(tau-1))),
    ``binomial:n=10,p=0.35``, ``delta:c=3``, ``uniform:values=1|2``,
    ``stretched:zeta=0.5,g=0.3,grid=8|16|32|64,filler=3``.
    """
    kind, _, body = spec.partition(":")
    kv = _parse_kv(body)
    if kind == "powerlaw":
        tau = float(kv.get("tau", 2.5))
        zmin = int(kv.get("zmin", 1))
        zmax = kv.get("zmax", "auto")
        if zmax == "auto":
            if n is None:
                raise ValueError("zmax=auto needs the graph size")
            zmax = max(zmin + 1, int(round(n ** (1.0 / (tau - 1.0)))))
        return power_law_pmf(tau, zmin, int(zmax))
    if kind == "binomial":
        return binomial_pmf(int(kv["n"]), float(kv["p"]))
    if kind == "delta":
        return delta_pmf(int(kv["c"]))
    if kind == "uniform":
        return uniform_pmf([int(x) for x in kv["values"].split("|")])
    if kind == "stretched":
        grid = [int(x) for x in kv["grid"].split("|")]
        return stretched_heavy_pmf(
            float(kv.get("zeta", 0.5)), float(kv.get("g", 0.3)), grid,
            filler=int(kv.get("filler", 3))
        )
    raise ValueError(f"unknown pmf spec {spec!r}")


def parse_penalty_spec(spec: str, lam: float) -> PenaltySpec:
    """``product:mu=0.5`` | ``max:mu=0.75`` | ``monomial:a=1,mu=.5,nu=.5`` |
    ``constant:c=1``, with the rate ``lam`` supplied separately."""
    kind, _, body = spec.partition(":")
    kv = _parse_kv(body)
    if kind == "product":
        return PenaltySpec.product(lam, float(kv["mu"]))
    if kind == "max":
        return PenaltySpec.max_(lam, float(kv["mu"]))
    if kind == "monomial":
        return PenaltySpec.monomial(lam, float(kv.get("a", 1.0)), float(kv["mu"]),
                                    float(kv["nu"]))
    if kind == "constant":
        return PenaltySpec.constant(lam, float(kv.get("c", 1.0)))
    raise ValueError(f"unknown penalty spec {spec!r}")


def build_graph(spec: str, n: int | None, rng):
    """Graph specs: ``cm:pmf=powerlaw:tau=2.5,zmax=auto`` | ``regular:d=3`` |
    ``star:K=20`` | ``star_row:K=10,ell=2,stars=5`` | ``path`` | ``cycle`` |
    ``gw:pmf=...,depth=12`` (returns a LazyTree)."""
    kind, _, body = spec.partition(":")
    kv = _parse_kv(body) if kind != "cm" and kind != "gw" else {}
    if kind == "cm":
        # the pmf sub-spec itself contains ':' and ',', so split manually
        assert body.startswith("pmf="), "cm spec must be cm:pmf=<pmf spec>"
        pmf = parse_pmf_spec(body[4:], n)
        deg = iid_degree_sequence(pmf, n, rng)
        return build_configuration_model(deg, rng)
    if kind == "gw":
        assert body.startswith("pmf="), "gw spec must be gw:pmf=<pmf spec>,depth=<d>"
        sub, _, rest = body[4:].rpartition(",depth=")
        pmf = parse_pmf_spec(sub, n)
        return sample_gw_tree(pmf, int(rest), rng)
    if kind == "regular":
        return random_regular_multigraph(n, int(kv.get("d", 3)), rng)
    if kind == "star":
        return build_star(int(kv["K"]))
    if kind == "star_row":
        return build_star_row(int(kv["K"]), int(kv["ell"]), int(kv["stars"])).graph
    if kind == "path":
        return path_graph(n)
    if kind == "cycle":
        return cycle_graph(n)
    raise ValueError(f"unknown graph spec {spec!r}")


# -- configuration ----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    scenario: str
    seed: int
    reps: int
    out: str
    horizon: float | None  # None = 1000 log n default
    graph: str
    pmf: str | None
    penalty_kind: str
    lam: float
    grid: dict = field(default_factory=dict)
    raw: str = ""

    def validate(self):
        errors = []
        if self.scenario not in SCENARIOS:
            errors.append(f"unknown scenario {self.scenario!r}")
        if self.reps < 1:
            errors.append("reps must be >= 1")
        if self.scenario in ("extinction_scaling", "core_survival", "phase_sweep"):
            if "n" not in self.grid:
                errors.append(f"{self.scenario} needs a [grid] n = ... line")
        if self.scenario == "star_survival" and "K" not in self.grid:
            errors.append("star_survival needs a [grid] K = ... line")
        if self.scenario == "op_percolation" and "delta" not in self.grid:
            errors.append("op_percolation needs a [grid] delta = ... line")
        if self.scenario == "attack_distribution" and "M" not in self.grid:
            errors.append("attack_distribution needs a [grid] M = ... line")
        if errors:
            raise ValueError("invalid config: " + "; ".join(errors))
        return self


_KNOWN_KEYS = {
    "experiment": {"scenario", "seed", "reps", "out", "horizon"},
    "graph": {"kind", "pmf"},
    "penalty": {"kind", "lam", "mu", "nu", "a", "c"},
    "grid": None,  # free-form
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the sectioned key-value format with its ``schema=1`` header."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines or lines[0].strip().replace(" ", "") != "schema=1":
        raise ValueError("config must start with a 'schema=1' line")
    cp = configparser.ConfigParser()
    cp.read_string("\n".join(lines[1:]))
    unknown = []
    for section in cp.sections():
        if section not in _KNOWN_KEYS:
            unknown.append(f"[{section}]")
            continue
        allowed = _KNOWN_KEYS[section]
        if allowed is not None:
            unknown.extend(
                f"[{section}] {k}" for k in cp[section] if k not in allowed
            )
    if unknown:
        raise ValueError("invalid config keys: " + ", ".join(sorted(unknown)))

    exp = cp["experiment"] if cp.has_section("experiment") else {}
    graph_sec = cp["graph"] if cp.has_section("graph") else {}
    pen = cp["penalty"] if cp.has_section("penalty") else {}
    grid = {}
    if cp.has_section("grid"):
        for key, val in cp["grid"].items():
            grid[key] = [x.strip() for x in val.split(",") if x.strip()]

    horizon = exp.get("horizon", "auto")
    kind = pen.get("kind", "product")
    pen_body = {k: pen[k] for k in ("mu", "nu", "a", "c") if k in pen}
    penalty_kind = kind + (":" + ",".join(f"{k}={v}" for k, v in pen_body.items())
                           if pen_body else "")
    gspec = graph_sec.get("kind", "cm")
    if "pmf" in graph_sec and gspec in ("cm", "gw"):
        gspec = f"{gspec}:pmf={graph_sec['pmf']}"
    return ExperimentConfig(
        scenario=exp.get("scenario", "extinction_scaling"),
        seed=int(exp.get("seed", 0)),
        reps=int(exp.get("reps", 10)),
        out=exp.get("out", "degcp_out"),
        horizon=None if horizon == "auto" else float(horizon),
        graph=gspec,
        pmf=graph_sec.get("pmf"),
        penalty_kind=penalty_kind,
        lam=float(pen.get("lam", 1.0)),
        grid=grid,
        raw=text,
    ).validate()


# -- runner --------------------------------------------------------------------


def _grid_points(grid: dict):
    keys = sorted(grid)
    if not keys:
        return [{}]
    points = [{}]
    for key in keys:
        points = [dict(pt, **{key: val}) for pt in points for val in grid[key]]
    return points


def _default_horizon(cfg: ExperimentConfig, n: int) -> float:
    if cfg.horizon is not None:
        return cfg.horizon
    return 1000.0 * math.log(max(3, n))


def _penalty(cfg: ExperimentConfig, point: dict) -> PenaltySpec:
    spec = cfg.penalty_kind
    if "mu" in point:
        kind, _, body = spec.partition(":")
        kv = _parse_kv(body)
        kv["mu"] = point["mu"]
        spec = kind + ":" + ",".join(f"{k}={v}" for k, v in sorted(kv.items()))
    lam = float(point.get("lam", cfg.lam))
    return parse_penalty_spec(spec, lam)


def _replica_extinction(cfg, point, g_seed, r_seed, n):
    graph = build_graph(cfg.graph, n, stream(cfg.seed, g_seed))
    pen = _penalty(cfg, point)
    horizon = _default_horizon(cfg, n)
    if hasattr(graph, "degrees"):
        xi0 = range(graph.n)
    else:
        xi0 = [0]
    rep = simulate_cp(graph, pen, xi0, horizon, stream(cfg.seed, r_seed))
    t = horizon if rep.censored else rep.t_ext
    return {"t_ext": t, "censored": int(rep.censored), "escaped": int(rep.escaped)}


def run_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Execute every (grid point, replica) pair and write CSV + JSON outputs.

    Rows are keyed by grid coordinates, replica id, and the substream seed
    that exactly reproduces the run. Completed grid points are checkpointed
    in ``<out>.checkpoint.json`` and skipped on rerun, so an interrupted
    sweep resumes where it stopped.
    """
    del threads  # replicas already run from disjoint substreams; kept for CLI parity
    points = _grid_points(cfg.grid)
    csv_path = cfg.out + ".csv"
    json_path = cfg.out + ".json"
    ck_path = cfg.out + ".checkpoint.json"
    done = set()
    if os.path.exists(ck_path):
        with open(ck_path) as fh:
            done = set(json.load(fh)["completed"])
    mode = "a" if done else "w"

    rows_for_summary = []
    header_written = bool(done)
    with open(csv_path, mode, newline="") as fh:
        writer = None
        for gi, point in enumerate(points):
            rows = _run_grid_point(cfg, gi, point)
            rows_for_summary.extend(rows)
            if str(gi) in done:
                continue
            for row in rows:
                if writer is None:
                    writer = csv.DictWriter(fh, fieldnames=list(row))
                    if not header_written:
                        writer.writeheader()
                        header_written = True
                writer.writerow(row)
            done.add(str(gi))
            with open(ck_path, "w") as ck:
                json.dump({"completed": sorted(done)}, ck, sort_keys=True)
    summary = _summarize(cfg, points, rows_for_summary)
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return csv_path, json_path, summary


def _run_grid_point(cfg: ExperimentConfig, gi: int, point: dict):
    rows = []
    base = {f"grid_{k}": v for k, v in sorted(point.items())}
    for rep_i in range(cfg.reps):
        seed_key = (gi + 1) * 1_000_003 + rep_i
        row = dict(base)
        row.update({"grid_index": gi, "replica": rep_i, "seed_key": seed_key})
        row.update(_scenario_row(cfg, point, rep_i, seed_key))
        rows.append({k: _fmt(v) for k, v in row.items()})
        if cfg.scenario in ("op_percolation", "attack_distribution", "oracle_suite"):
            break  # these scenarios aggregate their replicas internally
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _scenario_row(cfg: ExperimentConfig, point: dict, rep_i: int, seed_key: int):
    scen = cfg.scenario
    if scen in ("extinction_scaling", "core_survival", "phase_sweep"):
        n = int(point["n"])
        return dict(
            _replica_extinction(cfg, point, 2 * seed_key, 2 * seed_key + 1, n), n=n
        )
    if scen == "star_survival":
        from .cp import star_survival_experiment

        K = int(point["K"])
        pen = _penalty(cfg, point)
        res = star_survival_experiment(
            K, pen, 1, cfg.horizon or 2000.0, stream(cfg.seed, seed_key)
        )
        return {
            "K": K,
            "t_survival": float(res.times[0]),
            "censored": int(res.censored[0]),
        }
    if scen == "attack_distribution":
        n = int(point.get("n", 10**5))
        M = int(point["M"])
        rng = stream(cfg.seed, seed_key)
        pmf = parse_pmf_spec(cfg.pmf or "powerlaw:tau=2.5,zmax=auto", n)
        deg = iid_degree_sequence(pmf, n, rng)
        from .graphs import targeted_attack

        g = build_configuration_model(deg, rng)
        atk = targeted_attack(g, M)
        thinned, qM = binomial_thinning_pmf(pmf, M)
        vals, freqs = atk.empirical_pmf()
        emp = dict(zip(vals.tolist(), freqs.tolist()))
        sup = max(
            abs(emp.get(int(z), 0.0) - thinned.pmf(int(z)))
            for z in range(0, M + 1)
        )
        return {"n": n, "M": M, "q_M": qM, "sup_diff": sup}
    if scen == "op_percolation":
        delta = float(point["delta"])
        depth = int(point.get("depth", 200))
        est = survival_estimate(delta, depth, cfg.reps, stream(cfg.seed, seed_key))
        return {
            "delta": delta,
            "depth": depth,
            "survival": est.p,
            "ci_lo": est.ci_lo,
            "ci_hi": est.ci_hi,
        }
    if scen == "oracle_suite":
        from .oracles import run_all

        results = run_all(cfg.seed)
        bad = [name for name, ok, _ in results if not ok]
        return {"oracles": len(results), "failed": len(bad), "failing": ";".join(bad)}
    raise ValueError(f"scenario {cfg.scenario!r} not runnable")


def _summarize(cfg: ExperimentConfig, points, rows):
    summary = {"scenario": cfg.scenario, "seed": cfg.seed, "grid": cfg.grid}
    by_point = {}
    for row in rows:
        by_point.setdefault(int(row["grid_index"]), []).append(row)
    cells = []
    for gi, point in enumerate(points):
        rws = by_point.get(gi, [])
        cell = {"grid_index": gi, "point": point, "rows": len(rws)}
        if cfg.scenario in ("extinction_scaling", "core_survival", "phase_sweep"):
            ts = np.array([float(r["t_ext"]) for r in rws])
            cens = np.array([int(r["censored"]) for r in rws])
            cell.update(
                median_t_ext=float(np.median(ts)),
                mean_t_ext=float(ts.mean()),
                censored_fraction=float(cens.mean()),
            )
        if cfg.scenario == "star_survival":
            ts = np.array([float(r["t_survival"]) for r in rws])
            cell.update(median_survival=float(np.median(ts)))
        if cfg.scenario in ("attack_distribution", "op_percolation", "oracle_suite"):
            cell.update(rws[0] if rws else {})
        cells.append(cell)
    summary["cells"] = cells

    if cfg.scenario in ("extinction_scaling", "core_survival", "phase_sweep"):
        ns = [int(c["point"]["n"]) for c in cells]
        meds = [c["median_t_ext"] for c in cells]
        if len(set(ns)) >= 4:
            fit = fit_scaling(ns, meds)
            summary["fit"] = fit.to_json_dict()
        if len(ns) >= 2:
            lo, hi = min(zip(ns, meds)), max(zip(ns, meds))
            summary["growth_ratio"] = hi[1] / max(lo[1], 1e-12)
        if cfg.scenario == "phase_sweep":
            summary["verdict"] = _verdict(summary, cells)
    return summary


def _verdict(summary, cells):
    cens = max(c.get("censored_fraction", 0.0) for c in cells)
    ratio = summary.get("growth_ratio", 1.0)
    cls = summary.get("fit", {}).get("classification")
    if cens >= 0.5 or ratio >= 20.0 or cls == "exponential":
        return "long-survival"
    if cls in ("bounded", "logarithmic"):
        return "fast-extinction"
    if cls == "polynomial":
        return "slow-extinction"
    return "ambiguous"


def phase_table(configs):
    """Run a phase_sweep config per cell and collect the verdicts."""
    out = []
    for cfg in configs:
        _, _, summary = run_experiment(cfg)
        out.append(
            {
                "penalty": cfg.penalty_kind,
                "lam": cfg.lam,
                "graph": cfg.graph,
                "verdict": summary.get("verdict", "ambiguous"),
                "summary": summary,
            }
        )
    return out
