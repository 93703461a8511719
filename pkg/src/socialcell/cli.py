"""Command line front end.

Subcommands:

* ``run``      simulate one scenario and write matchings/trace/metrics
* ``sweep``    replicate a scenario over a swept variable and aggregate
* ``validate`` recompute the built-in reference network checks
* ``audit``    re-load a saved matching and audit it for swap stability

Exit codes: 0 success, 1 configuration/input problems, 2 runtime failures,
3 failed validate/audit checks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import config as cfgmod
from . import harness, matching, radio
from .errors import ConfigError, InputError, SocialCellError
from .reference import golden_checks


def _say(args, text: str):
    if not args.quiet:
        print(text)


def _load_config(args) -> cfgmod.ScenarioConfig:
    if args.config:
        cfg = cfgmod.load_config(args.config)
    else:
        cfg = cfgmod.ScenarioConfig()
    if args.override:
        cfg = cfgmod.apply_overrides(cfg, args.override)
    if getattr(args, "seed", None) is not None:
        cfg = cfgmod.apply_overrides(cfg, [f"seed={args.seed}"])
    return cfg


def _ensure_outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    probe = os.path.join(path, ".write-test")
    with open(probe, "w") as fh:
        fh.write("ok")
    os.remove(probe)
    return path


def _build_problem(cfg: cfgmod.ScenarioConfig):
    """Build the association problem for a single run.

    A single run is treated as replication 0 of a one-point experiment so
    that its streams line up with what the sweep harness would draw.
    """
    topo_seed = harness.replication_seed(cfg.seed, 0, 0, harness.STREAM_TOPOLOGY)
    social_seed = harness.replication_seed(cfg.seed, 0, 0, harness.STREAM_SOCIAL)
    engine_seed = harness.replication_seed(cfg.seed, 0, 0, harness.STREAM_ENGINE)
    scenario = cfgmod.scenario_from_config(cfg, seed=topo_seed)
    graph = cfgmod.social_graph_from_config(cfg, scenario, seed=social_seed)
    _, _, xmat = cfgmod.social_pipeline_from_config(cfg, graph)
    engine = cfgmod.engine_config_from_config(cfg, seed=engine_seed)
    problem = matching.build_problem(scenario, graph, xmat, engine)
    return scenario, problem


def cmd_run(args) -> int:
    cfg = _load_config(args)
    sha = cfgmod.config_sha(cfg)
    out = _ensure_outdir(args.out)
    scenario, problem = _build_problem(cfg)

    t0 = time.perf_counter()
    result = matching.anneal_on_problem(problem)
    final = result.matching
    stabilized = False
    if cfg.stabilize:
        stab = matching.greedy_stabilize(problem, final.assign)
        final = problem.matching(stab.assign)
        stabilized = True
    social_report = problem.report(final.assign)
    baseline_report = problem.report(problem.rssi_assignment)
    elapsed = time.perf_counter() - t0

    meta = {"config_sha": sha, "seed": str(cfg.seed)}
    radio.positions_to_csv(scenario, os.path.join(out, "positions.csv"))
    matching.matching_to_csv(final, social_report,
                             os.path.join(out, "matching_social-aware.csv"),
                             meta=meta)
    matching.matching_to_csv(problem.matching(problem.rssi_assignment),
                             baseline_report,
                             os.path.join(out, "matching_max-rssi.csv"),
                             meta=meta)
    matching.trace_to_csv(result.trace, os.path.join(out, "trace_social-aware.csv"))

    def method_stats(report):
        return {
            "avg_rate_bps": float(report.ue_rates.sum() / problem.n_ues),
            "welfare": float(report.welfare),
            "unserved": list(report.unserved),
        }

    metrics = {
        "config_sha": sha,
        "config": cfgmod.config_as_dict(cfg),
        "relay_ues": [int(v) for v in problem.relay_ues],
        "methods": {
            harness.METHOD_SOCIAL: {**method_stats(social_report),
                                    "iterations": result.best_iteration,
                                    "stabilized": stabilized},
            harness.METHOD_BASELINE: {**method_stats(baseline_report),
                                      "iterations": 0},
        },
        "elapsed_s": elapsed,
    }
    with open(os.path.join(out, "metrics.json"), "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")

    soc = metrics["methods"][harness.METHOD_SOCIAL]
    base = metrics["methods"][harness.METHOD_BASELINE]
    _say(args, f"run complete in {elapsed:.2f}s; outputs in {out}")
    _say(args, f"  social-aware: avg_rate={soc['avg_rate_bps']:.1f} bps "
               f"welfare={soc['welfare']:.1f} iters={soc['iterations']}")
    _say(args, f"  max-rssi:     avg_rate={base['avg_rate_bps']:.1f} bps "
               f"welfare={base['welfare']:.1f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _ensure_outdir(args.out)
    spec = harness.ExperimentSpec.from_config(cfg)
    t0 = time.perf_counter()
    result = harness.run_experiment(spec)
    paths = harness.emit_results(result, out)
    _say(args, f"sweep complete in {time.perf_counter() - t0:.2f}s")
    for p in paths.values():
        _say(args, f"  wrote {p}")
    return 0


def cmd_validate(args) -> int:
    alpha, beta = 0.5, 0.5
    if args.config or args.override:
        cfg = _load_config(args)
        alpha, beta = cfg.alpha, cfg.beta
    rows = golden_checks(alpha=alpha, beta=beta)
    failed = 0
    for row in rows:
        status = "PASS" if row.ok else "FAIL"
        if not row.ok:
            failed += 1
        _say(args, f"{status}  {row.name:<22} expected={row.expected} actual={row.actual}")
    _say(args, f"{len(rows) - failed}/{len(rows)} reference checks passed")
    return 0 if failed == 0 else 3


def cmd_audit(args) -> int:
    cfg = _load_config(args)
    sha = cfgmod.config_sha(cfg)
    meta, rows = matching.load_matching_csv(args.matching)
    saved_sha = meta.get("config_sha", "")
    if saved_sha and saved_sha != sha:
        raise ConfigError(
            f"matching file was produced under config {saved_sha}, current "
            f"config hashes to {sha}; re-run before auditing")
    _, problem = _build_problem(cfg)
    assign = matching.assignment_from_rows(problem, rows)
    violations = matching.audit_stability(problem, assign)
    if not violations:
        _say(args, "stable: no approved swap found")
        return 0
    for v in violations:
        other = "<open slot>" if v.other_ue is None else f"ue{v.other_ue}"
        _say(args, f"unstable: ue{v.ue} <-> {other} via sn{v.target_sn} "
                   f"(welfare delta {v.welfare_delta:+.6g})")
    _say(args, f"{len(violations)} approved swap(s) remain")
    return 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socialcell",
        description="Socially weighted user association simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=False):
        p.add_argument("--config", default="", help="path to a key=value config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the base seed from the config")
        p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        if needs_out:
            p.add_argument("--out", default="out", help="output directory")

    p_run = sub.add_parser("run", help="simulate one scenario")
    common(p_run, needs_out=True)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a replicated parameter sweep")
    common(p_sweep, needs_out=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="check the built-in reference network")
    common(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_audit = sub.add_parser("audit", help="audit a saved matching for stability")
    common(p_audit)
    p_audit.add_argument("--matching", required=True,
                         help="matching CSV produced by the run command")
    p_audit.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SocialCellError, OSError, RuntimeError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
