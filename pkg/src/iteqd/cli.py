"""Command-line entry point tying the modules into reproducible experiments.

Commands: ``map create|stats|export``, ``adapt run``, ``bench variants``,
``descriptors compute``. Every option resolves with precedence
command line > ITEQD_<NAME> environment variable > config file > default,
where the config file is flat ``key=value`` text. All output files carry
the tool version and a hash of the resolved configuration. Exit codes:
0 ok, 1 usage/config error, 2 runtime error.

Seeds for multi-run commands are split with numpy's SeedSequence.spawn,
so adding parallelism never changes serial results.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .adapt import adapt, arm_adapt_config, trial_log_jsonl
from .archive import GridSpec, load_archive, save_archive, serialize_archive
from .arm import (
    AdaptationEvaluator,
    MapCreationEvaluator,
    N_JOINTS,
    DEFAULT_WORKSPACE,
    NO_DAMAGE,
    Target,
    load_damage_csv,
    standard_damage_suite,
    target_prior_fn,
)
from .bench import BenchConfig, NoiseModel, VariantKind, best_at_cut, run_variant, summarize
from .gait import (
    DESCRIPTOR_KINDS,
    composed_descriptor,
    descriptor,
    load_trajectory_csv,
    random_descriptor_basis,
)
from .map_elites import (
    DiscreteMutation,
    MapElitesConfig,
    PolynomialMutation,
    run_map_elites,
    run_random_sampling,
)

ENV_PREFIX = "ITEQD_"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class SyntheticEvaluator:
    """Toy unit-cube task for pipeline tests: descriptor is the first six
    genome components, performance their overall mean, always valid."""

    genome_length = 36

    def evaluate(self, genome):
        g = np.asarray(genome, dtype=float)
        return g[:6].copy(), float(g.mean()), True

    def evaluate_batch(self, genomes):
        g = np.asarray(genomes, dtype=float)
        return g[:, :6].copy(), g.mean(axis=1), np.ones(len(g), dtype=bool)


def synthetic_grid_spec() -> GridSpec:
    return GridSpec(lower=(0.0,) * 6, upper=(1.0,) * 6, bins=(5,) * 6)


class _ThreadedBatchEvaluator:
    """Splits evaluate_batch across worker threads; results match serial."""

    def __init__(self, inner, workers: int):
        self.inner = inner
        self.workers = workers
        self.genome_length = inner.genome_length

    def evaluate(self, genome):
        return self.inner.evaluate(genome)

    def evaluate_batch(self, genomes):
        chunks = [c for c in np.array_split(genomes, self.workers) if len(c)]
        with ThreadPoolExecutor(max_workers=self.workers) as ex:
            parts = list(ex.map(self.inner.evaluate_batch, chunks))
        descs = np.concatenate([p[0] for p in parts])
        perfs = np.concatenate([p[1] for p in parts])
        valids = np.concatenate([p[2] for p in parts])
        return descs, perfs, valids


def _load_config_file(path) -> dict[str, str]:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge CLI > env > config file > defaults for every known key."""
    file_values = _load_config_file(args.config) if getattr(args, "config", None) else {}
    resolved = {}
    for key, default in defaults.items():
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            resolved[key] = cli_val
            continue
        env_val = os.environ.get(ENV_PREFIX + key.upper())
        source = env_val if env_val is not None else file_values.get(key)
        if source is None:
            resolved[key] = default
            continue
        if isinstance(default, bool):
            resolved[key] = source.lower() in ("1", "true", "yes", "on")
        elif isinstance(default, int):
            resolved[key] = int(source)
        elif isinstance(default, float):
            resolved[key] = float(source)
        else:
            resolved[key] = source
    return resolved


# Keys that cannot influence computed results: output locations and the
# worker count (parallelism never changes serial results by construction).
_HASH_EXCLUDED = frozenset(
    {"out", "progress", "out_log", "out_summary", "out_runs", "out_jsonl", "workers"}
)


def config_hash(resolved: dict) -> str:
    blob = "\n".join(
        f"{k}={resolved[k]}" for k in sorted(resolved) if k not in _HASH_EXCLUDED
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def _meta(resolved: dict) -> dict[str, str]:
    return {"tool_version": __version__, "config_hash": config_hash(resolved)}


# ---------------------------------------------------------------- map create

MAP_CREATE_DEFAULTS = dict(
    task="arm",
    iterations=100_000,
    seed=0,
    init_random=400,
    batch_size=1,
    workers=1,
    mutation="",  # per-task default when empty
    mutation_rate=-1.0,  # per-mutation default when negative
    eta_m=10.0,
    levels=21,
    checkpoint_every=100_000,
    baseline="map_elites",  # or random_sampling
    out="archive.csv",
    progress="",
)


def _build_mutation(cfg: dict, task: str):
    kind = cfg["mutation"] or ("polynomial" if task == "arm" else "discrete")
    if kind == "polynomial":
        rate = cfg["mutation_rate"] if cfg["mutation_rate"] >= 0 else 0.125
        return PolynomialMutation(rate=rate, eta_m=cfg["eta_m"])
    if kind == "discrete":
        rate = cfg["mutation_rate"] if cfg["mutation_rate"] >= 0 else 0.05
        return DiscreteMutation(rate=rate, levels=cfg["levels"])
    raise UsageError(f"unknown mutation kind {kind!r}")


def cmd_map_create(args) -> int:
    cfg = _resolve(args, MAP_CREATE_DEFAULTS)
    task = cfg["task"]
    if task == "arm":
        evaluator = MapCreationEvaluator()
        spec = DEFAULT_WORKSPACE.grid_spec()
        genome_length = N_JOINTS
    elif task == "synthetic":
        evaluator = SyntheticEvaluator()
        spec = synthetic_grid_spec()
        genome_length = SyntheticEvaluator.genome_length
    else:
        raise UsageError(f"map create supports tasks arm|synthetic, got {task!r}")
    mutation = _build_mutation(cfg, task)
    try:
        me_config = MapElitesConfig(
            total_iterations=cfg["iterations"],
            genome_length=genome_length,
            mutation=mutation,
            seed=cfg["seed"],
            init_random_count=min(cfg["init_random"], cfg["iterations"]),
            batch_size=cfg["batch_size"],
            checkpoint_every=cfg["checkpoint_every"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg["workers"] > 1:
        evaluator = _ThreadedBatchEvaluator(evaluator, cfg["workers"])
    progress = cfg["progress"] or None
    runner = run_map_elites if cfg["baseline"] == "map_elites" else run_random_sampling
    grid = runner(
        me_config,
        spec,
        evaluator,
        progress_path=progress,
        progress_header=_meta(cfg) if progress else None,
    )
    save_archive(grid, cfg["out"], extra_metadata=_meta(cfg))
    st = grid.stats()
    print(
        f"wrote {cfg['out']}: {st.filled_count} filled cells, "
        f"mean {st.mean_performance:.6g}, max {st.max_performance:.6g}"
    )
    return 0


def cmd_map_stats(args) -> int:
    grid = load_archive(args.archive)
    st = grid.stats()
    print(
        json.dumps(
            {
                "filled": st.filled_count,
                "cells": grid.spec.cell_count,
                "mean_performance": st.mean_performance,
                "max_performance": st.max_performance,
                "evaluations": grid.evaluations,
                "genome_length": grid.genome_length,
            }
        )
    )
    return 0


def cmd_map_export(args) -> int:
    grid = load_archive(args.archive)
    if args.format == "csv":
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize_archive(grid))
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(
                json.dumps(
                    {"header": {"tool_version": __version__, "source": str(args.archive)}},
                    sort_keys=True,
                )
                + "\n"
            )
            for flat, elite in grid.sorted_items():
                fh.write(
                    json.dumps(
                        {
                            "cell": flat,
                            "descriptor": [float(v) for v in elite.descriptor],
                            "performance": elite.performance,
                            "genome": [float(v) for v in elite.genome],
                        }
                    )
                    + "\n"
                )
    print(f"exported {grid.filled_count} cells to {args.out}")
    return 0


# ----------------------------------------------------------------- adapt run

ADAPT_RUN_DEFAULTS = dict(
    task="arm",
    archive="archive.csv",
    damage="",
    bin_x=0.0,
    bin_y=0.5,
    target_radius=0.05,
    kappa=0.3,
    rho=0.1,
    noise_var=0.03,
    alpha=0.9,
    use_alpha_stop=False,
    max_trials=31,
    perf_floor=float("nan"),  # nan disables the clamp
    prescreen=False,
    noise=False,
    noise_seed=0,
    skip_if_above=float("nan"),
    condition="none",
    map_id="0",
    out_log="trials.jsonl",
    out_summary="",
)


def cmd_adapt_run(args) -> int:
    cfg = _resolve(args, ADAPT_RUN_DEFAULTS)
    if cfg["task"] != "arm":
        raise UsageError(f"adapt run supports the arm task, got {cfg['task']!r}")
    grid = load_archive(cfg["archive"])
    if grid.genome_length != N_JOINTS:
        raise UsageError(
            f"archive genome length {grid.genome_length} does not match the arm's {N_JOINTS}"
        )
    damage = load_damage_csv(cfg["damage"]) if cfg["damage"] else NO_DAMAGE
    target = Target(x=cfg["bin_x"], y=cfg["bin_y"], radius=cfg["target_radius"])
    evaluator = AdaptationEvaluator(damage, target, prescreen_collisions=cfg["prescreen"])
    trial_fn = NoiseModel(seed=cfg["noise_seed"], enabled=cfg["noise"]).wrap(evaluator)
    adapt_cfg = arm_adapt_config(
        kappa=cfg["kappa"],
        rho=cfg["rho"],
        noise_var=cfg["noise_var"],
        alpha=cfg["alpha"],
        use_alpha_stop=cfg["use_alpha_stop"],
        max_trials=cfg["max_trials"],
        target_radius=cfg["target_radius"],
        perf_floor=None if np.isnan(cfg["perf_floor"]) else cfg["perf_floor"],
    )
    t0 = time.perf_counter()
    skip_threshold = cfg["skip_if_above"]
    if not np.isnan(skip_threshold):
        # Drop-trigger mode: test the map's best prior cell once; adapt only
        # if that measurement falls below the threshold.
        prior_map = {
            k: target_prior_fn(target)(e.descriptor) for k, e in grid.sorted_items()
        }
        best_cell = min(prior_map, key=lambda k: (-prior_map[k], k))
        first = float(trial_fn(grid.cells[best_cell].genome))
        if first >= skip_threshold:
            print(
                json.dumps(
                    {"adapted": False, "measured": first, "threshold": skip_threshold}
                )
            )
            return 0
    outcome, log = adapt(grid, trial_fn, adapt_cfg, prior=target_prior_fn(target))
    seconds = time.perf_counter() - t0
    header = dict(_meta(cfg))
    header.update({"condition": cfg["condition"], "map_id": cfg["map_id"]})
    with open(cfg["out_log"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trial_log_jsonl(log, header=header))
    if cfg["out_summary"]:
        new = not os.path.exists(cfg["out_summary"])
        with open(cfg["out_summary"], "a", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            if new:
                fh.write(f"# iteqd {__version__} config_hash={config_hash(cfg)}\n")
                w.writerow(["condition", "map_id", "trials", "seconds", "best_perf"])
            w.writerow(
                [cfg["condition"], cfg["map_id"], outcome.trials, f"{seconds:.3f}",
                 format(outcome.best_measured, ".17g")]
            )
    print(
        json.dumps(
            {
                "adapted": True,
                "trials": outcome.trials,
                "best_measured": outcome.best_measured,
                "stop": outcome.stop,
            }
        )
    )
    return 0


# ------------------------------------------------------------ bench variants

BENCH_DEFAULTS = dict(
    archive="archive.csv",
    damage="",
    damage_suite=0,
    budget=17,
    seeds=1,
    seed=0,
    variants=",".join(k.value for k in VariantKind),
    bin_x=0.0,
    bin_y=0.5,
    kappa=0.3,
    rho=0.1,
    raw_rho=0.4,
    noise_var=0.03,
    noise=True,
    workers=1,
    cuts="",
    out="bench.csv",
    out_runs="",
    out_jsonl="",
)


def _bench_one(job):
    variant, damage_name, damage, seed_seq, grid, target, cfg, budget = job
    rng = np.random.default_rng(seed_seq)
    noise_seed = int(seed_seq.generate_state(1)[0])
    evaluator = AdaptationEvaluator(
        damage, target, prescreen_collisions=(variant is VariantKind.RAW_BO)
    )
    trial_fn = NoiseModel(seed=noise_seed, enabled=cfg["noise"]).wrap(evaluator)
    bench_cfg = BenchConfig(
        budget=budget,
        adapt=arm_adapt_config(
            kappa=cfg["kappa"], rho=cfg["rho"], noise_var=cfg["noise_var"], max_trials=budget
        ),
        raw_rho=cfg["raw_rho"],
    )
    log = run_variant(
        variant,
        trial_fn,
        budget,
        rng,
        config=bench_cfg,
        grid=grid,
        prior=target_prior_fn(target),
        genome_length=N_JOINTS,
    )
    return variant.value, damage_name, log


def cmd_bench_variants(args) -> int:
    cfg = _resolve(args, BENCH_DEFAULTS)
    grid = load_archive(cfg["archive"])
    if grid.genome_length != N_JOINTS:
        raise UsageError("bench variants requires an arm archive (genome length 8)")
    target = Target(x=cfg["bin_x"], y=cfg["bin_y"])
    if cfg["damage"]:
        damages = [(os.path.basename(cfg["damage"]), load_damage_csv(cfg["damage"]))]
    elif cfg["damage_suite"] > 0:
        damages = standard_damage_suite()[: cfg["damage_suite"]]
    else:
        damages = [("none", NO_DAMAGE)]
    try:
        variants = [VariantKind(v.strip()) for v in cfg["variants"].split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    budget = cfg["budget"]
    cuts = (
        tuple(int(c) for c in cfg["cuts"].split(",") if c.strip())
        if cfg["cuts"]
        else (budget,)
    )
    root = np.random.SeedSequence(cfg["seed"])
    children = root.spawn(len(variants) * len(damages) * cfg["seeds"])
    jobs = []
    i = 0
    for variant in variants:
        for damage_name, damage in damages:
            for _ in range(cfg["seeds"]):
                jobs.append((variant, damage_name, damage, children[i], grid, target, cfg, budget))
                i += 1
    if cfg["workers"] > 1:
        with ThreadPoolExecutor(max_workers=cfg["workers"]) as ex:
            results = list(ex.map(_bench_one, jobs))
    else:
        results = [_bench_one(j) for j in jobs]

    by_variant: dict[str, list] = {v.value: [] for v in variants}
    for variant_name, _, log in results:
        by_variant[variant_name].append(log)
    meta_line = f"# iteqd {__version__} config_hash={config_hash(cfg)}\n"
    with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
        fh.write(meta_line)
        w = csv.writer(fh)
        w.writerow(["variant", "cut", "n", "median", "p25", "p75"])
        for row in summarize(by_variant, cuts=cuts):
            w.writerow(
                [row["variant"], row["cut"], row["n"],
                 format(row["median"], ".17g"), format(row["p25"], ".17g"),
                 format(row["p75"], ".17g")]
            )
    if cfg["out_runs"]:
        with open(cfg["out_runs"], "w", encoding="utf-8", newline="") as fh:
            fh.write(meta_line)
            w = csv.writer(fh)
            w.writerow(["variant", "damage", "seed", "cut", "best_at_cut"])
            for seq, (variant_name, damage_name, log) in enumerate(results):
                seed_id = seq % cfg["seeds"]
                for cut in cuts:
                    w.writerow(
                        [variant_name, damage_name, seed_id, cut,
                         format(best_at_cut(log, cut), ".17g")]
                    )
    if cfg["out_jsonl"]:
        with open(cfg["out_jsonl"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps({"header": _meta(cfg)}, sort_keys=True) + "\n")
            for (variant_name, damage_name, log) in results:
                for rec in log:
                    entry = {"variant": variant_name, "damage": damage_name}
                    entry.update(
                        {
                            "trial": rec.trial,
                            "measured": rec.measured,
                            "best_so_far": rec.best_so_far,
                            "cell_index": rec.cell_index,
                        }
                    )
                    fh.write(json.dumps(entry, sort_keys=True) + "\n")
    print(f"wrote {cfg['out']} ({len(variants)} variants, {len(jobs)} runs)")
    return 0


# ------------------------------------------------------- descriptors compute

DESCRIPTORS_DEFAULTS = dict(
    kind="duty_factor",
    traj="",
    basis_seed=0,
    out="",
)


def cmd_descriptors_compute(args) -> int:
    cfg = _resolve(args, DESCRIPTORS_DEFAULTS)
    if not cfg["traj"]:
        raise UsageError("descriptors compute requires --traj FILE")
    traj = load_trajectory_csv(cfg["traj"])
    if cfg["kind"] == "random":
        basis = random_descriptor_basis(cfg["basis_seed"])
        value = composed_descriptor(basis, traj)
        payload = {
            "kind": "random",
            "basis": [[k, c] for k, c in basis],
            "value": [float(v) for v in value],
        }
    else:
        if cfg["kind"] not in DESCRIPTOR_KINDS:
            raise UsageError(
                f"unknown kind {cfg['kind']!r}; choose from {', '.join(DESCRIPTOR_KINDS)} or random"
            )
        value = descriptor(cfg["kind"], traj)
        payload = {"kind": cfg["kind"], "value": [float(v) for v in value]}
    payload["meta"] = _meta(cfg)
    text = json.dumps(payload)
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


# --------------------------------------------------------------------- main

def _add_common(p):
    p.add_argument("--config", help="flat key=value config file")


def build_parser() -> _Parser:
    parser = _Parser(prog="iteqd", description=__doc__)
    parser.add_argument("--version", action="version", version=f"iteqd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser("map", help="archive creation and inspection")
    map_sub = p_map.add_subparsers(dest="subcommand", required=True)

    pc = map_sub.add_parser("create", help="run the illumination loop and save an archive")
    _add_common(pc)
    pc.add_argument("--task", choices=["arm", "synthetic"])
    pc.add_argument("--iterations", type=int)
    pc.add_argument("--seed", type=int)
    pc.add_argument("--init-random", dest="init_random", type=int)
    pc.add_argument("--batch-size", dest="batch_size", type=int)
    pc.add_argument("--workers", type=int)
    pc.add_argument("--mutation", choices=["discrete", "polynomial"])
    pc.add_argument("--mutation-rate", dest="mutation_rate", type=float)
    pc.add_argument("--eta-m", dest="eta_m", type=float)
    pc.add_argument("--levels", type=int)
    pc.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    pc.add_argument("--baseline", choices=["map_elites", "random_sampling"])
    pc.add_argument("--out")
    pc.add_argument("--progress")
    pc.set_defaults(func=cmd_map_create)

    ps = map_sub.add_parser("stats", help="print archive statistics")
    ps.add_argument("archive")
    ps.set_defaults(func=cmd_map_stats)

    pe = map_sub.add_parser("export", help="re-export an archive")
    pe.add_argument("--archive", required=True)
    pe.add_argument("--out", required=True)
    pe.add_argument("--format", choices=["csv", "jsonl"], default="jsonl")
    pe.set_defaults(func=cmd_map_export)

    p_adapt = sub.add_parser("adapt", help="damage-recovery adaptation")
    adapt_sub = p_adapt.add_subparsers(dest="subcommand", required=True)
    pa = adapt_sub.add_parser("run", help="run the adaptation loop against an archive")
    _add_common(pa)
    pa.add_argument("--task", choices=["arm"])
    pa.add_argument("--archive")
    pa.add_argument("--damage", help="damage CSV (joint,condition,angle_rad)")
    pa.add_argument("--bin-x", dest="bin_x", type=float)
    pa.add_argument("--bin-y", dest="bin_y", type=float)
    pa.add_argument("--target-radius", dest="target_radius", type=float)
    pa.add_argument("--kappa", type=float)
    pa.add_argument("--rho", type=float)
    pa.add_argument("--noise-var", dest="noise_var", type=float)
    pa.add_argument("--alpha", type=float)
    pa.add_argument("--use-alpha-stop", dest="use_alpha_stop", action="store_const", const=True)
    pa.add_argument("--max-trials", dest="max_trials", type=int)
    pa.add_argument("--perf-floor", dest="perf_floor", type=float)
    pa.add_argument("--prescreen", action="store_const", const=True)
    pa.add_argument("--noise", action="store_const", const=True)
    pa.add_argument("--noise-seed", dest="noise_seed", type=int)
    pa.add_argument("--skip-if-above", dest="skip_if_above", type=float)
    pa.add_argument("--condition")
    pa.add_argument("--map-id", dest="map_id")
    pa.add_argument("--out-log", dest="out_log")
    pa.add_argument("--out-summary", dest="out_summary")
    pa.set_defaults(func=cmd_adapt_run)

    p_bench = sub.add_parser("bench", help="variant comparisons")
    bench_sub = p_bench.add_subparsers(dest="subcommand", required=True)
    pb = bench_sub.add_parser("variants", help="run the knockout-variant comparison")
    _add_common(pb)
    pb.add_argument("--archive")
    pb.add_argument("--damage")
    pb.add_argument("--damage-suite", dest="damage_suite", type=int)
    pb.add_argument("--budget", type=int)
    pb.add_argument("--seeds", type=int)
    pb.add_argument("--seed", type=int)
    pb.add_argument("--variants")
    pb.add_argument("--bin-x", dest="bin_x", type=float)
    pb.add_argument("--bin-y", dest="bin_y", type=float)
    pb.add_argument("--kappa", type=float)
    pb.add_argument("--rho", type=float)
    pb.add_argument("--raw-rho", dest="raw_rho", type=float)
    pb.add_argument("--noise-var", dest="noise_var", type=float)
    pb.add_argument("--no-noise", dest="noise", action="store_const", const=False)
    pb.add_argument("--workers", type=int)
    pb.add_argument("--cuts")
    pb.add_argument("--out")
    pb.add_argument("--out-runs", dest="out_runs")
    pb.add_argument("--out-jsonl", dest="out_jsonl")
    pb.set_defaults(func=cmd_bench_variants)

    p_desc = sub.add_parser("descriptors", help="trajectory descriptors")
    desc_sub = p_desc.add_subparsers(dest="subcommand", required=True)
    pd = desc_sub.add_parser("compute", help="compute one descriptor over a trajectory CSV")
    _add_common(pd)
    pd.add_argument("--kind")
    pd.add_argument("--traj")
    pd.add_argument("--basis-seed", dest="basis_seed", type=int)
    pd.add_argument("--out")
    pd.set_defaults(func=cmd_descriptors_compute)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --version / --help
        code = exc.code
        return 0 if code in (None, 0) else 1
    except Exception as exc:  # runtime failures: IO, numerical, archive format
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
