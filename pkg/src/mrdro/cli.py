"""Command-line entry point: ``mrdro run|dominance|solve``.

Exit codes: 0 success, 2 configuration or input error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .applications import (
    Application,
    PortfolioSpec,
    ResourceAllocationSpec,
    load_returns_csv,
    write_results_csv,
)
from .errors import ConfigError, MrDroError, SolveFailed
from .fusion import EventLog, PredictionErrors, compute_errors
from .reform import load_instance, solve_instance
from .sim import (
    ErrorSegment,
    ModelSpec,
    SourceErrorModel,
    TrialPlan,
    TruthModel,
    generate_event_log,
    results_rows,
    run_oos_study,
    run_trials,
    summarize,
    synthetic_returns,
    write_summary_csv,
    write_trajectory_csv,
    write_trust_history_csv,
)
from .trust import UpdateConfig, estimate_dominance, run_trust_sequence, write_trust_csv

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_SOLVE = 0, 2, 3

DOMINANCE_HEADER = ["seed", "group", "source_y", "source_z", "estimate", "fsd", "samples", "final_trust_y"]


def load_config(path) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def _get(cfg, key, section=None, default=KeyError):
    if key in cfg:
        return cfg[key]
    if default is KeyError:
        where = f"[{section}] " if section else ""
        raise ConfigError(f"missing key {where}'{key}'")
    return default


def _update_configs(cfg) -> tuple:
    out = []
    for k, t in enumerate(cfg.get("trust", [])):
        method = _get(t, "method", f"trust.{k}")
        try:
            out.append(UpdateConfig(method, t.get("step"), t.get("eta"), t.get("beta"), t.get("error_norm", "L1")))
        except ConfigError as exc:
            raise ConfigError(f"[[trust]] #{k + 1}: {exc}") from None
    return tuple(out)


def _error_model(cfg, lo, hi) -> SourceErrorModel:
    e = _get(cfg, "errors")
    base = ErrorSegment(_get(e, "mean", "errors"), _get(e, "std", "errors"),
                        e.get("lognormal"), e.get("shape", 0.5))
    segs, starts = [base], []
    for k, sh in enumerate(e.get("shift", [])):
        starts.append(_get(sh, "start", f"errors.shift.{k}"))
        segs.append(ErrorSegment(sh.get("mean", base.mean), sh.get("std", base.std),
                                 sh.get("lognormal", base.lognormal), sh.get("shape", base.shape)))
    return SourceErrorModel(tuple(segs), tuple(starts), e.get("lo", lo), e.get("hi", hi))


def _application(cfg):
    kind = _get(cfg, "application")
    if kind == "resource":
        r = cfg.get("resource", {})
        spec = ResourceAllocationSpec(
            int(_get(r, "regions", "resource")), r.get("underage", 5000.0), r.get("overage", 1000.0),
            r.get("budget", 200.0), r.get("demand_lo", 0.0), r.get("demand_hi", 30.0))
        truth = TruthModel.uniform(r.get("truth_lo", 10.0), r.get("truth_hi", 20.0), spec.regions)
        return Application.resource(spec), truth, (spec.demand_lo, spec.demand_hi)
    if kind == "portfolio":
        p = cfg.get("portfolio", {})
        if "returns_csv" in p:
            history = load_returns_csv(p["returns_csv"])
        else:
            history = synthetic_returns(int(_get(p, "assets", "portfolio")), int(p.get("periods", 400)),
                                        int(p.get("returns_seed", 0)))
        spec = PortfolioSpec(history.shape[1], p.get("alpha", 0.2), p.get("rho", 10.0))
        return Application.portfolio(spec), TruthModel.replay(history), (-1.0, 1.0)
    raise ConfigError(f"'application' must be resource or portfolio, got {kind!r}")


def build_plan(cfg, seed=None, trials=None, events=None, epsilon=None) -> TrialPlan:
    """Trial plan from a parsed config plus command-line overrides."""
    try:
        app, truth, (lo, hi) = _application(cfg)
        errors = _error_model(cfg, lo, hi)
        seeds = list(_get(cfg, "seeds"))
        if seed is not None:
            seeds = [seed + k for k in range(trials or 1)]
        elif trials is not None:
            seeds = seeds[:trials] if trials <= len(seeds) else list(range(seeds[0], seeds[0] + trials))
        updates = _update_configs(cfg)
        models = None
        if "models" in cfg:
            table = {m.name: m for m in (tuple(ModelSpec.mr_dro(u) for u in updates)
                                         + tuple(ModelSpec.single(h) for h in range(errors.num_sources)))}
            unknown = [n for n in cfg["models"] if n not in table]
            if unknown:
                raise ConfigError(f"unknown model(s) in 'models': {unknown}")
            models = tuple(table[n] for n in cfg["models"])
        return TrialPlan(
            app, truth, errors, tuple(seeds), int(events if events is not None else _get(cfg, "events")),
            float(epsilon if epsilon is not None else cfg.get("epsilon", 0.01)),
            models=models, updates=updates, t0=cfg.get("t0"), warmup=int(cfg.get("warmup", 1)),
            window=cfg.get("window"), norm=cfg.get("norm", "L1"), solver=cfg.get("solver", "highs"),
            timing=bool(cfg.get("timing", True)), support_policy=cfg.get("support_policy", "clip"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    plan = build_plan(cfg, args.seed, args.trials, args.events, args.epsilon)
    out = args.out or cfg.get("out", "results")
    os.makedirs(out, exist_ok=True)
    results = run_trials(plan, workers=int(cfg.get("workers", 1)))
    ok = [r for r in results if r.ok]
    rows = summarize(ok)
    write_summary_csv(rows, os.path.join(out, "summary.csv"))
    write_trajectory_csv(ok, os.path.join(out, "trajectory.csv"))
    write_trust_history_csv(ok, os.path.join(out, "trust_history.csv"))
    write_results_csv(results_rows(ok), os.path.join(out, "results.csv"))
    holdout = cfg.get("holdout")
    if holdout and len(ok) == len(results):
        oos = run_oos_study(plan, int(holdout))
        with open(os.path.join(out, "oos.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "model", "oos_loss", "oos_loss_k"])
            for o in oos:
                for name, v in zip(o.models, o.losses):
                    w.writerow([o.seed, name, repr(float(v)), repr(float(v) / 1000.0)])
    if args.json:
        print(json.dumps(rows, indent=1))
    else:
        for row in rows:
            print(f"{row['model']:<26} objective {row['objective_mean']:12.6g}"
                  f"  loss {row['loss_mean']:12.6g} +/- {row['loss_std']:.4g}")
    failed = [r.failure for r in results if not r.ok]
    for f in failed:
        print(f"solve failure: {f}", file=sys.stderr)
    return EXIT_SOLVE if failed else EXIT_OK


def cmd_dominance(args) -> int:
    cfg = load_config(args.config)
    d = cfg.get("dominance", {})
    try:
        app, truth, (lo, hi) = _application(cfg)
        errors = _error_model(cfg, lo, hi)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    H = errors.num_sources
    pair = tuple(int(v) for v in d.get("pair", (0, 1)))
    if len(pair) != 2 or pair[0] == pair[1] or not all(0 <= v < H for v in pair):
        raise ConfigError(f"[dominance] 'pair' must name two distinct sources in 0..{H - 1}, got {list(pair)}")
    events = int(args.events or d.get("events", cfg.get("events", 300)))
    seeds = list(cfg.get("seeds", [0]))
    if args.seed is not None:
        seeds = [args.seed + k for k in range(args.trials or 1)]
    elif args.trials:
        seeds = seeds[: args.trials]
    norm = d.get("norm", "L1")
    groups = d.get("groups", [[k] for k in range(errors.dim)])
    step = float(d.get("step", 0.01))
    out = args.out or cfg.get("out", "results")
    os.makedirs(out, exist_ok=True)
    rows = []
    for seed in seeds:
        log = generate_event_log(truth, errors, events, seed)
        err = compute_errors(log).errors[list(pair)]
        sub = log.predictions[:, list(pair)]
        trust = run_trust_sequence(EventLog(sub, log.realizations), UpdateConfig.minmax(step, norm), [0.5, 0.5], groups)
        if d.get("trajectory", False):
            write_trust_csv(trust, os.path.join(out, f"dominance_trust_{seed}.csv"))
        for g, dims in enumerate(groups):
            rep = estimate_dominance(PredictionErrors(err), (0, 1), norm, dims)
            rows.append([seed, g, pair[0], pair[1], rep.estimate, rep.fsd_flag, rep.samples, float(trust.t[g, 0])])
    with open(os.path.join(out, "dominance.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DOMINANCE_HEADER)
        for r in rows:
            w.writerow(r[:4] + [repr(r[4]), int(r[5]), r[6], repr(r[7])])
    if args.json:
        print(json.dumps([dict(zip(DOMINANCE_HEADER, r)) for r in rows], indent=1))
    else:
        for g in range(len(groups)):
            est = np.mean([r[4] for r in rows if r[1] == g])
            fsd = sum(r[5] for r in rows if r[1] == g)
            print(f"group {g}: P[Y<Z] = {est:.3f}, FSD in {fsd}/{len(seeds)} seeds")
    return EXIT_OK


def _parse_sweep(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--sweep expects comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError("--sweep needs at least one radius")
    return sorted(vals)


def cmd_solve(args) -> int:
    try:
        inst = load_instance(args.instance)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed instance {args.instance}: {exc!r}") from None
    radii = _parse_sweep(args.sweep) if args.sweep else [inst.epsilon if args.epsilon is None else args.epsilon]
    records = []
    for eps in radii:
        sol = solve_instance(inst.replace(epsilon=eps), args.solver)
        records.append({"epsilon": eps, "objective": sol.value, "x": sol.x.tolist(), "lambda": sol.lam})
    if args.json:
        print(json.dumps(records if args.sweep else records[0]))
    else:
        for r in records:
            print(f"epsilon {r['epsilon']!r}  objective {r['objective']!r}")
            print("x " + " ".join(repr(v) for v in r["x"]))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrdro", description="Multi-reference distributionally robust optimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--out", help="output directory (default: config 'out' or ./results)")
        p.add_argument("--seed", type=int, help="first seed; overrides the configured seeds")
        p.add_argument("--trials", type=int, help="number of seeded trials")
        p.add_argument("--events", type=int, help="number of events")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("run", help="run seeded trials and write summary/trajectory/trust CSVs")
    common(p)
    p.add_argument("--epsilon", type=float, help="Wasserstein radius override")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("dominance", help="probability-dominance analysis between two sources")
    common(p)
    p.set_defaults(func=cmd_dominance)

    p = sub.add_parser("solve", help="solve a serialized instance")
    p.add_argument("instance", help="JSON instance file")
    p.add_argument("--epsilon", type=float, help="radius override")
    p.add_argument("--sweep", help="comma-separated radii to solve in turn")
    p.add_argument("--solver", default="simplex", choices=["simplex", "highs"])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolveFailed as exc:
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    except MrDroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
