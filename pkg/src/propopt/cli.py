"""Command-line pipeline: gen-data, train, optimize, compare.

Every command resolves its configuration (file plus flag overrides), runs,
and drops a JSON manifest next to its primary output with the command,
config hash, seeds, paths, wall time, and tool version, so any artifact can
be regenerated exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ToolkitConfig, config_hash, load_config
from .data import generate, load, save, split
from .errors import ConfigurationError, PropoptError
from .ga import GaConfig, run_ga, run_sao, write_trace
from .solver import BladeGeometry, Requirement
from .space import sample_requirement
from .surrogate import (
    RandomForest,
    RegressionTree,
    evaluate_model,
    fit_forest,
    fit_tree,
    load_model,
    predict_tree,
    save_model,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _load_toolkit_config(path: str | None) -> ToolkitConfig:
    if path is None:
        return ToolkitConfig()
    return load_config(path)


def _write_manifest(path: Path, command: str, cfg: ToolkitConfig,
                    seeds: dict, inputs: dict, outputs: dict,
                    wall_time: float) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "config_hash": config_hash(cfg),
        "seeds": seeds,
        "inputs": {k: str(v) for k, v in inputs.items()},
        "outputs": {k: str(v) for k, v in outputs.items()},
        "wall_time_s": wall_time,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _geometry_dict(geom: BladeGeometry | None) -> dict | None:
    if geom is None:
        return None
    return dataclasses.asdict(geom)


def _parse_requirement(text: str) -> Requirement:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigurationError(
            f"requirement must be thrust,speed,rpm - got {text!r}")
    try:
        req = Requirement(float(parts[0]), float(parts[1]), float(parts[2]))
    except ValueError:
        raise ConfigurationError(f"non-numeric requirement {text!r}") from None
    req.validate()
    return req


def _read_requirements_file(path) -> list[Requirement]:
    reqs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                reqs.append(_parse_requirement(line))
            except ConfigurationError as exc:
                raise ConfigurationError(f"{path}:{lineno}: {exc}") from None
    if not reqs:
        raise ConfigurationError(f"{path}: no requirements found")
    return reqs


def cmd_gen_data(args) -> int:
    started = time.time()
    cfg = _load_toolkit_config(args.config)
    space = cfg.space
    if args.seed is not None:
        space = replace(space, rng_seed=args.seed)
        cfg = replace(cfg, space=space)
    try:
        ds = generate(space, args.count, efficiency_floor=args.floor,
                      parallelism=args.jobs, solver_options=cfg.solver)
    except PropoptError as exc:
        print(f"gen-data: attempt budget exhausted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = Path(args.out)
    save(ds, out)
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "gen-data",
                    cfg,
                    seeds={"space_rng_seed": space.rng_seed},
                    inputs={"config": args.config or "<defaults>"},
                    outputs={"dataset": out},
                    wall_time=time.time() - started)
    print(f"gen-data: kept {len(ds)} records -> {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    started = time.time()
    cfg = _load_toolkit_config(args.config)
    ds = load(args.data, generation_config=cfg.space)
    if len(ds.records) < 2:
        print("train: dataset too small", file=sys.stderr)
        return EXIT_RUNTIME
    train_ds, test_ds = split(ds, args.test_frac, seed=args.seed)
    forest = fit_forest(train_ds, tree_count=args.trees, seed=args.seed)
    tree = fit_tree(ds)

    report = evaluate_model(forest, test_ds)
    training_residuals = [
        float(abs(predict_tree(tree, rec.requirement)[5] - rec.efficiency))
        for rec in ds.records
    ]
    out_forest = Path(args.out_forest)
    out_tree = Path(args.out_tree)
    save_model(forest, out_forest)
    save_model(tree, out_tree)

    summary = {
        "forest": {
            "tree_count": args.trees,
            "test_count": len(test_ds.records),
            "accuracy": report.accuracy,
            "mean_residual": report.mean_residual,
        },
        "tree": {
            "leaf_count": tree.leaf_count,
            "max_abs_training_residual": max(training_residuals),
        },
    }
    report_path = Path(args.report) if args.report else out_forest.with_suffix(
        ".report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"train: forest accuracy {report.accuracy:.4f} "
          f"(mean residual {report.mean_residual:+.5f}) on "
          f"{len(test_ds.records)} held-out records")
    print(f"train: tree max |training residual| "
          f"{summary['tree']['max_abs_training_residual']:.3e}")
    _write_manifest(out_forest.with_suffix(out_forest.suffix + ".manifest.json"),
                    "train", cfg,
                    seeds={"split_and_forest_seed": args.seed},
                    inputs={"config": args.config or "<defaults>",
                            "dataset": args.data},
                    outputs={"forest": out_forest, "tree": out_tree,
                             "report": report_path},
                    wall_time=time.time() - started)
    return EXIT_OK


def _load_surrogates(args):
    forest = load_model(args.forest)
    tree = load_model(args.tree)
    if not isinstance(forest, RandomForest):
        raise ConfigurationError(f"{args.forest}: not a forest model file")
    if not isinstance(tree, RegressionTree):
        raise ConfigurationError(f"{args.tree}: not a single-tree model file")
    return forest, tree


def cmd_optimize(args) -> int:
    started = time.time()
    cfg = _load_toolkit_config(args.config)
    req = _parse_requirement(args.requirement)
    ga_cfg = cfg.ga
    if args.budget is not None:
        ga_cfg = replace(ga_cfg, eval_budget=args.budget)
    if args.seed is not None:
        ga_cfg = replace(ga_cfg, rng_seed=args.seed)
    cfg = replace(cfg, ga=ga_cfg)

    if args.method == "sao":
        train_data = load(args.data, generation_config=cfg.space)
        forest, tree = _load_surrogates(args)
        result = run_sao(req, forest, tree, train_data, ga_cfg, cfg.space,
                         solver_options=cfg.solver)
    else:
        result = run_ga(req, [], ga_cfg, cfg.space, solver_options=cfg.solver)

    trace_path = Path(args.trace_out)
    write_trace(result, trace_path, seed=ga_cfg.rng_seed)
    summary = {
        "method": result.trace.method_tag,
        "requirement": dataclasses.asdict(req),
        "best_geometry": _geometry_dict(result.best_geometry),
        "best_eta": result.best_efficiency,
        "evaluations": result.evaluations_used,
    }
    summary_path = (Path(args.summary_out) if args.summary_out
                    else trace_path.with_suffix(".summary.json"))
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"optimize[{result.trace.method_tag}]: best eta "
          f"{result.best_efficiency:.4f} in {result.evaluations_used} "
          f"evaluations -> {trace_path}")
    _write_manifest(trace_path.with_suffix(trace_path.suffix + ".manifest.json"),
                    "optimize", cfg,
                    seeds={"ga_rng_seed": ga_cfg.rng_seed},
                    inputs={"config": args.config or "<defaults>",
                            "forest": args.forest or "",
                            "tree": args.tree or "",
                            "dataset": args.data or ""},
                    outputs={"trace": trace_path, "summary": summary_path},
                    wall_time=time.time() - started)
    return EXIT_OK


def cmd_compare(args) -> int:
    started = time.time()
    cfg = _load_toolkit_config(args.config)
    train_data = load(args.data, generation_config=cfg.space)
    forest, tree = _load_surrogates(args)

    if args.requirements_file:
        requirements = _read_requirements_file(args.requirements_file)
    else:
        rng = np.random.default_rng(args.seed)
        requirements = [sample_requirement(cfg.space, rng)
                        for _ in range(args.sample)]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    budget = args.budget if args.budget is not None else cfg.ga.eval_budget

    rows = []
    derived_seeds = []
    sao_wins = 0
    for r_index, req in enumerate(requirements):
        for repeat in range(args.repeats):
            seed = args.seed + repeat
            derived_seeds.append(seed)
            ga_cfg = replace(cfg.ga, eval_budget=budget, rng_seed=seed)
            ga_res = run_ga(req, [], ga_cfg, cfg.space,
                            solver_options=cfg.solver)
            sao_res = run_sao(req, forest, tree, train_data, ga_cfg,
                              cfg.space, solver_options=cfg.solver)
            ga_path = out_dir / f"req{r_index}_rep{repeat}_ga.csv"
            sao_path = out_dir / f"req{r_index}_rep{repeat}_sao.csv"
            write_trace(ga_res, ga_path, seed=seed)
            write_trace(sao_res, sao_path, seed=seed)
            winner = ("SAO" if sao_res.best_efficiency >= ga_res.best_efficiency
                      else "GA")
            sao_wins += winner == "SAO"
            rows.append((req, repeat, ga_res.best_efficiency,
                         sao_res.best_efficiency, winner))

    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        fh.write("thrust_n,speed_mps,rpm,repeat,ga_best,sao_best,winner\n")
        for req, repeat, ga_best, sao_best, winner in rows:
            fh.write("%.17g,%.17g,%.17g,%d,%.17g,%.17g,%s\n" % (
                req.thrust_req, req.ship_speed, req.rpm, repeat,
                ga_best, sao_best, winner))
    win_rate = sao_wins / len(rows)
    print(f"compare: SAO won {sao_wins}/{len(rows)} pairs "
          f"(win rate {win_rate:.3f}) -> {summary_path}")
    _write_manifest(out_dir / "manifest.json", "compare", cfg,
                    seeds={"base_seed": args.seed,
                           "derived_seeds": derived_seeds},
                    inputs={"config": args.config or "<defaults>",
                            "forest": args.forest, "tree": args.tree,
                            "dataset": args.data,
                            "requirements_file": args.requirements_file or ""},
                    outputs={"out_dir": out_dir, "summary": summary_path},
                    wall_time=time.time() - started)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="propopt",
        description="Propeller design optimization: generate data, train "
                    "inverse surrogates, and run GA/SAO searches.")
    parser.add_argument("--version", action="version",
                        version=f"propopt {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen-data", help="generate a labeled design corpus")
    p.add_argument("-c", "--config", default=None)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--floor", type=float, default=0.5)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="fit forest and tree on a corpus")
    p.add_argument("-c", "--config", default=None)
    p.add_argument("-d", "--data", required=True)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--test-frac", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-forest", required=True)
    p.add_argument("--out-tree", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("optimize", help="run one GA or SAO search")
    p.add_argument("-c", "--config", default=None)
    p.add_argument("--method", choices=("ga", "sao"), required=True)
    p.add_argument("--requirement", required=True,
                   help="thrust_n,speed_mps,rpm")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--forest", default=None)
    p.add_argument("--tree", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--trace-out", required=True)
    p.add_argument("--summary-out", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compare", help="GA vs SAO at equal budget")
    p.add_argument("-c", "--config", default=None)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--requirements-file", default=None)
    group.add_argument("--sample", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--forest", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("-d", "--data", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "optimize" and args.method == "sao":
        missing = [flag for flag, value in
                   (("--forest", args.forest), ("--tree", args.tree),
                    ("--data", args.data)) if not value]
        if missing:
            parser.error(f"--method sao requires {', '.join(missing)}")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"propopt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PropoptError as exc:
        print(f"propopt: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"propopt: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
