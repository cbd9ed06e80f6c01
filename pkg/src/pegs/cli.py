"""Command-line surface and the end-to-end experiment driver.

Subcommands wrap the library pipeline: gen-data, disintegrate, synthesize,
pmi-fit, evaluate, attack, ru-map, paper-grid, replay. Every command is
deterministic given (inputs, flags, seed) and writes a manifest sidecar
beside each output; replay re-runs a manifest's argument vector and
regenerates the outputs bitwise identically.

Exit codes: 0 success, 1 usage, 2 data/schema, 3 privacy parameter, 4 I/O.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import glob as glob_mod
import json
import os
import sys

import numpy as np

from pegs import __version__
from pegs import evaluation as ev
from pegs import pmi as pmi_mod
from pegs.blocks import disintegrate, load_blocks, save_blocks
from pegs.datagen import DEFAULT_ROWS, DEFAULT_SEED, generate_hospital_dataset
from pegs.errors import BlocksFormatError, DataError, PegsError, PrivacyError, SchemaError
from pegs.manifest import RunManifest, load_manifest
from pegs.privacy import DP_BLOCK, DP_SAMPLE, L_DIVERSITY, PrivacySpec
from pegs.rng import master_key, substream
from pegs.sampler import SeedPool, synthesize
from pegs.schema import Dataset, Schema, load_csv, save_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PRIVACY = 3
EXIT_IO = 4

PAPER_EPSILONS = (0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0)
DEFAULT_QI = ("age.yrs", "sex", "patzip")
DEFAULT_CATEGORICAL_ATTACK = {"target": "MDC", "given": ["age.yrs", "sex", "patzip"]}
DEFAULT_NUMERIC_ATTACK = {"target": "charge", "given": ["age.yrs", "los", "patzip"]}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems instead of argparse's 2
        raise _UsageError(message)


def _comma_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _privacy_from_args(args, n_features: int) -> PrivacySpec:
    if args.privacy == DP_SAMPLE:
        if args.epsilon is None:
            raise _UsageError("--privacy dp requires --epsilon")
        return PrivacySpec(DP_SAMPLE, n_features, epsilon=args.epsilon)
    if args.privacy == DP_BLOCK:
        if args.epsilon is None:
            raise _UsageError("--privacy dp-block requires --epsilon")
        return PrivacySpec(
            DP_BLOCK, n_features, epsilon=args.epsilon, block_size=args.block_size
        )
    if args.l is None:
        raise _UsageError("--privacy ldiv requires --l")
    return PrivacySpec(L_DIVERSITY, n_features, l=args.l)


def default_regressions(schema: Schema) -> list[ev.RegressionSpec]:
    """Charge-on-demographics models when the schema carries those features."""
    names = {f.name for f in schema.features}
    if not {"charge", "age.yrs", "sev", "cat", "los"} <= names:
        return []
    predictors = (("age.yrs", True), ("sev", False), ("cat", False), ("los", True))
    return [
        ev.RegressionSpec("logistic", "charge", predictors, threshold=25000.0),
        ev.RegressionSpec("linear", "charge", predictors),
    ]


def _default_qi(schema: Schema) -> list[str]:
    names = {f.name for f in schema.features}
    if set(DEFAULT_QI) <= names:
        return list(DEFAULT_QI)
    return [f.name for f in schema.features[: min(3, schema.n_features)]]


def compute_metrics(
    orig: Dataset,
    synth: Dataset,
    metrics: list[str],
    *,
    regressions: list[ev.RegressionSpec] | None = None,
    qi: list[str] | None = None,
    attacks: dict | None = None,
    orig_beta_cache: dict | None = None,
) -> dict[str, float]:
    """Metric name -> value for one synthetic dataset against the original."""
    schema = orig.schema
    out: dict[str, float] = {}
    if "marginal" in metrics:
        vals = []
        for i, feat in enumerate(schema.features):
            d = ev.marginal_distance(orig, synth, i)
            out[f"marginal_distance.{feat.name}"] = d
            vals.append(d)
        out["marginal_distance.mean"] = float(np.mean(vals))
        out["marginal_distance.sum"] = float(np.sum(vals))
    if "conditional" in metrics:
        total = 0.0
        for j, cond_feat in enumerate(schema.features):
            for i, feat in enumerate(schema.features):
                if i == j:
                    continue
                d = ev.conditional_distance(orig, synth, i, j)
                out[f"conditional_distance.{feat.name}|{cond_feat.name}"] = d
                total += d
        out["conditional_distance.sum"] = total
    if "regression" in metrics:
        specs = default_regressions(schema) if regressions is None else regressions
        if not specs:
            raise DataError(
                "regression metric requested but no regression specs apply to this schema"
            )
        for spec in specs:
            key = spec.label()
            if orig_beta_cache is not None and key in orig_beta_cache:
                beta_orig = orig_beta_cache[key]
            else:
                beta_orig = ev.fit_regression(orig, spec)
                if orig_beta_cache is not None:
                    orig_beta_cache[key] = beta_orig
            beta_synth = ev.fit_regression(synth, spec)
            out[f"regression_distance.{key}"] = ev.regression_distance(
                beta_synth, beta_orig
            )
    if "uniqueness" in metrics:
        qi_names = _default_qi(schema) if qi is None else qi
        qi_idx = [schema.feature_index(n) for n in qi_names]
        count, fraction = ev.population_uniqueness(synth, qi_idx)
        out["uniqueness_count"] = float(count)
        out["uniqueness_fraction"] = fraction
        _, frac_orig = ev.population_uniqueness(orig, qi_idx)
        out["uniqueness_fraction_orig"] = frac_orig
    if "attacks" in metrics:
        cfg = attacks or {}
        cat_cfg = cfg.get("categorical", DEFAULT_CATEGORICAL_ATTACK)
        num_cfg = cfg.get("numeric", DEFAULT_NUMERIC_ATTACK)
        names = {f.name for f in schema.features}
        if cat_cfg and cat_cfg["target"] in names and set(cat_cfg["given"]) <= names:
            out[f"attack_misclassification.{cat_cfg['target']}"] = ev.attack_categorical(
                orig,
                synth,
                schema.feature_index(cat_cfg["target"]),
                [schema.feature_index(n) for n in cat_cfg["given"]],
            )
        if num_cfg and num_cfg["target"] in names and set(num_cfg["given"]) <= names:
            out[f"attack_mae.{num_cfg['target']}"] = ev.attack_numeric(
                orig,
                synth,
                schema.feature_index(num_cfg["target"]),
                [schema.feature_index(n) for n in num_cfg["given"]],
            )
    return out


def _expand_globs(patterns: list[str]) -> list[str]:
    files: list[str] = []
    for pattern in patterns:
        hits = sorted(glob_mod.glob(pattern))
        files.extend(hits if hits else ([pattern] if os.path.exists(pattern) else []))
    if not files:
        raise DataError(f"no files match {patterns}")
    return files


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_gen_data(args, argv) -> int:
    dataset = generate_hospital_dataset(n=args.n, seed=args.seed)
    save_csv(dataset, args.out)
    dataset.schema.save(args.schema_out)
    manifest = RunManifest(command="gen-data", argv=argv, rng_seed=args.seed)
    manifest.write_beside([args.out, args.schema_out])
    return EXIT_OK


def cmd_disintegrate(args, argv) -> int:
    schema = Schema.load(args.schema)
    dataset = load_csv(args.input, schema, delimiter=args.delimiter)
    blocks = disintegrate(dataset, args.m)
    save_blocks(blocks, args.out)
    manifest = RunManifest(command="disintegrate", argv=argv)
    manifest.add_input("input", args.input)
    manifest.add_input("schema", args.schema)
    manifest.write_beside([args.out])
    return EXIT_OK


def _out_paths(pattern: str, k: int) -> list[str]:
    if k == 1 and "{k}" not in pattern:
        return [pattern]
    if "{k}" not in pattern:
        raise _UsageError("--out needs a {k} placeholder when --k > 1")
    return [pattern.replace("{k}", str(i)) for i in range(k)]


def cmd_synthesize(args, argv) -> int:
    outputs = _out_paths(args.out, args.k)
    if args.engine == "pegs":
        if not args.blocks:
            raise _UsageError("--engine pegs requires --blocks")
        blocks = load_blocks(args.blocks)
        schema = blocks.schema
    else:
        if not args.models:
            raise _UsageError("--engine pmi requires --models")
        models = pmi_mod.load_models(args.models)
        schema = models.schema
    privacy = _privacy_from_args(args, schema.n_features)
    if not args.seed_pool:
        raise _UsageError(
            "--seed-pool is required: synthesis starts from explicit seed records "
            "(the original data file is the conventional pool)"
        )
    pool = SeedPool.from_dataset(load_csv(args.seed_pool, schema, delimiter=args.delimiter))
    traces: list | None = [] if (args.trace and args.engine == "pegs") else None
    if args.engine == "pegs":
        datasets = synthesize(
            blocks, privacy, pool, args.n, args.k, args.seed, trace_sink=traces
        )
    else:
        datasets = pmi_mod.pmi_synthesize(models, privacy, pool, args.n, args.k, args.seed)
    for path, ds in zip(outputs, datasets):
        save_csv(ds, path)
    all_outputs = list(outputs)
    if args.trace:
        if traces is None:
            raise _UsageError("--trace is only available with --engine pegs")
        with open(args.trace, "w", encoding="utf-8") as fh:
            for t, trace in enumerate(traces):
                obj = {"sequence": t}
                obj.update(trace.to_json_obj(schema))
                fh.write(json.dumps(obj, sort_keys=True) + "\n")
        all_outputs.append(args.trace)
    manifest = RunManifest(
        command="synthesize",
        argv=argv,
        rng_seed=args.seed,
        privacy=privacy.to_json_obj(),
    )
    manifest.add_input("blocks" if args.engine == "pegs" else "models",
                       args.blocks if args.engine == "pegs" else args.models)
    manifest.add_input("seed_pool", args.seed_pool)
    manifest.write_beside(all_outputs)
    return EXIT_OK


def cmd_pmi_fit(args, argv) -> int:
    schema = Schema.load(args.schema)
    dataset = load_csv(args.input, schema, delimiter=args.delimiter)
    models = pmi_mod.fit_all_conditionals(dataset, ridge=args.ridge, max_iter=args.max_iter)
    pmi_mod.save_models(models, args.out)
    manifest = RunManifest(command="pmi-fit", argv=argv)
    manifest.add_input("input", args.input)
    manifest.add_input("schema", args.schema)
    manifest.write_beside([args.out])
    return EXIT_OK


def cmd_evaluate(args, argv) -> int:
    schema = Schema.load(args.schema)
    orig = load_csv(args.orig, schema, delimiter=args.delimiter)
    synth_files = _expand_globs(args.synth)
    metrics = _comma_list(args.metrics)
    qi = _comma_list(args.qi) if args.qi else None
    per_file = []
    cache: dict = {}
    for path in synth_files:
        synth = load_csv(path, schema, delimiter=args.delimiter)
        per_file.append(
            compute_metrics(orig, synth, metrics, qi=qi, orig_beta_cache=cache)
        )
    aggregated = {
        name: float(np.mean([m[name] for m in per_file])) for name in per_file[0]
    }
    report = ev.EvalReport(
        algorithm=args.algorithm,
        epsilon=args.epsilon,
        seed=args.seed,
        metrics=aggregated,
        extra={"synth_files": synth_files, "per_file": per_file},
    )
    report.save(args.out)
    manifest = RunManifest(command="evaluate", argv=argv)
    manifest.add_input("orig", args.orig)
    manifest.add_input("schema", args.schema)
    manifest.write_beside([args.out])
    return EXIT_OK


def cmd_attack(args, argv) -> int:
    schema = Schema.load(args.schema)
    orig = load_csv(args.orig, schema, delimiter=args.delimiter)
    synth_files = _expand_globs(args.synth)
    given = [schema.feature_index(n) for n in _comma_list(args.given)]
    target = schema.feature_index(args.target)
    values = []
    for path in synth_files:
        synth = load_csv(path, schema, delimiter=args.delimiter)
        if args.mode == "numeric":
            values.append(ev.attack_numeric(orig, synth, target, given))
        else:
            values.append(ev.attack_categorical(orig, synth, target, given))
    name = (
        f"attack_mae.{args.target}"
        if args.mode == "numeric"
        else f"attack_misclassification.{args.target}"
    )
    report = ev.EvalReport(
        algorithm=args.algorithm,
        epsilon=args.epsilon,
        metrics={name: float(np.mean(values))},
        extra={"synth_files": synth_files, "per_file": values},
    )
    report.save(args.out)
    manifest = RunManifest(command="attack", argv=argv)
    manifest.add_input("orig", args.orig)
    manifest.add_input("schema", args.schema)
    manifest.write_beside([args.out])
    return EXIT_OK


def cmd_ru_map(args, argv) -> int:
    files = _expand_globs(args.reports)
    reports = [ev.EvalReport.load(path) for path in files]
    ev.write_ru_csv(reports, args.out)
    manifest = RunManifest(command="ru-map", argv=argv)
    manifest.write_beside([args.out])
    return EXIT_OK


# ---------------------------------------------------------------------------
# Paper grid driver
# ---------------------------------------------------------------------------


def _grid_defaults(config: dict) -> dict:
    out = {
        "m": 2,
        "n_samples": 1000,
        "k": 1,
        "epsilons": list(PAPER_EPSILONS),
        "algorithms": [
            {"name": "pegs"},
            {"name": "pegs.rs", "block_size": 10},
            {"name": "pmi"},
        ],
        "seeds": [42],
        "ridge": 1e-3,
        "metrics": ["marginal", "conditional", "regression", "uniqueness", "attacks"],
        "write_synthetic_csv": False,
    }
    out.update(config)
    for key in ("data", "schema", "out_dir"):
        if key not in out:
            raise DataError(f"grid config missing required field {key!r}")
    return out


def _cell_tag(name: str, eps: float, seed: int) -> str:
    return f"{name.replace('.', '')}_eps{eps:g}_seed{seed}"


def _grid_cell(payload: dict) -> str:
    """One (algorithm, epsilon, seed) cell; runs in its own process."""
    cfg = payload["config"]
    name = payload["name"]
    eps = payload["epsilon"]
    seed = payload["seed"]
    schema = Schema.load(cfg["schema"])
    orig = load_csv(cfg["data"], schema)
    pool = SeedPool.from_dataset(orig)
    n_feat = schema.n_features
    if name == "pegs.rs":
        block = int(payload["block_size"])
        privacy = PrivacySpec(DP_BLOCK, n_feat, epsilon=eps * block, block_size=block)
    else:
        privacy = PrivacySpec(DP_SAMPLE, n_feat, epsilon=eps)
    if name == "pmi":
        models = pmi_mod.load_models(payload["models_path"])
        datasets = pmi_mod.pmi_synthesize(
            models, privacy, pool, cfg["n_samples"], cfg["k"], seed
        )
    elif name == "bootstrap":
        rng = substream(master_key(seed), 2, 0, 0)
        datasets = [
            ev.bootstrap_dataset(orig, cfg["n_samples"], rng) for _ in range(cfg["k"])
        ]
    else:
        blocks = load_blocks(payload["blocks_path"])
        datasets = synthesize(blocks, privacy, pool, cfg["n_samples"], cfg["k"], seed)
    cache: dict = {}
    per_k = [
        compute_metrics(
            orig,
            ds,
            cfg["metrics"],
            regressions=None,
            qi=cfg.get("qi"),
            attacks=cfg.get("attacks"),
            orig_beta_cache=cache,
        )
        for ds in datasets
    ]
    metrics = {key: float(np.mean([m[key] for m in per_k])) for key in per_k[0]}
    report = ev.EvalReport(
        algorithm=name,
        epsilon=eps,
        seed=seed,
        metrics=metrics,
        extra={"per_dataset": per_k, "privacy": privacy.to_json_obj()},
    )
    report.save(payload["report_path"])
    outputs = [payload["report_path"]]
    if cfg.get("write_synthetic_csv"):
        for k, ds in enumerate(datasets):
            path = payload["report_path"].replace("report_", "synth_").replace(
                ".json", f"_{k}.csv"
            )
            save_csv(ds, path)
            outputs.append(path)
    manifest = RunManifest(
        command="paper-grid-cell",
        argv=payload["argv"],
        rng_seed=seed,
        privacy=privacy.to_json_obj(),
    )
    manifest.add_input("data", cfg["data"])
    manifest.add_input("schema", cfg["schema"])
    manifest.write_beside(outputs)
    return payload["report_path"]


def _worker_count() -> int:
    env = os.environ.get("PEGS_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(os.cpu_count() or 1, 8))


def cmd_paper_grid(args, argv) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = _grid_defaults(json.load(fh))
    os.makedirs(cfg["out_dir"], exist_ok=True)
    schema = Schema.load(cfg["schema"])
    orig = load_csv(cfg["data"], schema)

    names = [a["name"] for a in cfg["algorithms"]]
    blocks_path = os.path.join(cfg["out_dir"], "blocks.pegsblocks")
    if any(n in ("pegs", "pegs.rs") for n in names) and not os.path.exists(blocks_path):
        save_blocks(disintegrate(orig, cfg["m"]), blocks_path)
    models_path = os.path.join(cfg["out_dir"], "models.pmi")
    if "pmi" in names and not os.path.exists(models_path):
        pmi_mod.save_models(
            pmi_mod.fit_all_conditionals(orig, ridge=cfg["ridge"]), models_path
        )

    cells = []
    for algo in cfg["algorithms"]:
        eps_list = [None] if algo["name"] == "bootstrap" else cfg["epsilons"]
        for eps in eps_list:
            for seed in cfg["seeds"]:
                tag = _cell_tag(algo["name"], eps if eps is not None else 0.0, seed)
                report_path = os.path.join(cfg["out_dir"], f"report_{tag}.json")
                if os.path.exists(report_path):
                    continue  # resume: completed cells are skipped
                cells.append(
                    {
                        "config": cfg,
                        "name": algo["name"],
                        "epsilon": eps,
                        "seed": seed,
                        "block_size": algo.get("block_size", 10),
                        "blocks_path": blocks_path,
                        "models_path": models_path,
                        "report_path": report_path,
                        "argv": argv,
                    }
                )
    workers = _worker_count()
    if cells:
        if workers == 1 or len(cells) == 1:
            for cell in cells:
                _grid_cell(cell)
        else:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                for _ in pool.map(_grid_cell, cells):
                    pass
    report_files = sorted(glob_mod.glob(os.path.join(cfg["out_dir"], "report_*.json")))
    reports = [ev.EvalReport.load(p) for p in report_files]
    ru_path = os.path.join(cfg["out_dir"], "ru.csv")
    ev.write_ru_csv(reports, ru_path)
    manifest = RunManifest(command="paper-grid", argv=argv)
    manifest.add_input("config", args.config)
    manifest.add_input("data", cfg["data"])
    manifest.add_input("schema", cfg["schema"])
    manifest.write_beside([ru_path])
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    return main(manifest.argv)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="pegs", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pegs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write the bundled synthetic discharge-like dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--schema-out", required=True)
    p.add_argument("--n", type=int, default=DEFAULT_ROWS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("disintegrate", help="build the count-table artifact from a CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--out", required=True)
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_disintegrate)

    p = sub.add_parser("synthesize", help="draw synthetic datasets from an artifact")
    p.add_argument("--blocks")
    p.add_argument("--models")
    p.add_argument("--engine", choices=["pegs", "pmi"], default="pegs")
    p.add_argument("--privacy", choices=[DP_SAMPLE, DP_BLOCK, L_DIVERSITY], required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--block-size", type=int, default=10)
    p.add_argument("--l", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--seed-pool", required=True)
    p.add_argument("--out", required=True, help="output CSV path; use {k} for multiples")
    p.add_argument("--trace", help="JSONL file of per-sample synthesis traces")
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("pmi-fit", help="fit the GLM conditionals used by --engine pmi")
    p.add_argument("--input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--ridge", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--out", required=True)
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_pmi_fit)

    p = sub.add_parser("evaluate", help="utility and risk metrics for synthetic CSVs")
    p.add_argument("--orig", required=True)
    p.add_argument("--synth", nargs="+", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--metrics", default="marginal,conditional,uniqueness")
    p.add_argument("--qi", help="comma list of quasi-identifier features")
    p.add_argument("--algorithm", default="unknown")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("attack", help="modal/mean inference attack against synthetic data")
    p.add_argument("--orig", required=True)
    p.add_argument("--synth", nargs="+", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--given", required=True, help="comma list of conditioning features")
    p.add_argument("--mode", choices=["categorical", "numeric"], default="categorical")
    p.add_argument("--algorithm", default="unknown")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("ru-map", help="flatten reports to a long-format risk-utility CSV")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ru_map)

    p = sub.add_parser("paper-grid", help="run the full algorithm x epsilon grid")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_paper_grid)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, DataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PrivacyError as exc:
        print(f"privacy error: {exc}", file=sys.stderr)
        return EXIT_PRIVACY
    except (BlocksFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PegsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
