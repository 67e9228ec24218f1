"""Command-line pipeline: synth, transform, train, evaluate, predict, serve.

Every command is deterministic given its seed flags; rerunning writes
byte-identical artifacts. Exit codes: 0 success, 2 bad input or config,
1 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    parse_encoder_spec,
    parse_filter_rules,
    parse_params,
    parse_service_config,
    parse_synth_spec,
)
from .core import DtsurvError, FeatureSchema, FeatureVector, MonthGrid
from .encode import (
    EmptyColumn,
    EncoderMap,
    InvalidFieldValue,
    MissingColumn,
    UnknownColumn,
    apply_filters,
    build_dataset,
    encode_record,
    expanded_csv_sink,
    fit_encoder,
    read_dataset_csv,
    read_expanded_csv,
    read_table_csv,
    write_dataset_csv,
    write_expanded_csv,
)
from .evaluate import evaluate_models
from .geo import StaticFipsResolver
from .learners import (
    CorruptFile,
    ForestParams,
    MlpParams,
    TreeParams,
    VersionMismatch,
    load_model,
    save_model,
    train_forest,
    train_life_table,
    train_mlp,
    train_tree,
)
from .presets import FOREST_PRESETS, MLP_PRESETS, preset_names
from .survival import (
    bootstrap_bands,
    pmf_from_hazard,
    predict_hazard_curve,
    survival_from_hazard,
    write_curve_csv,
)
from .synthgen import generate
from .transform import expand, expand_streaming

REPORT_HORIZONS = (6, 12, 60)


class ExplicitlyEmptyCohort(DtsurvError):
    """Filtering removed every row; refusing to write an empty pipeline."""


VALIDATION_ERRORS = (
    ConfigError,
    InvalidFieldValue,
    UnknownColumn,
    MissingColumn,
    EmptyColumn,
    ExplicitlyEmptyCohort,
    VersionMismatch,
    CorruptFile,
    FileNotFoundError,
    IsADirectoryError,
    NotADirectoryError,
    ValueError,
)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _csv_shape(path: str) -> tuple[int, int]:
    import csv as _csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        header = next(reader, [])
        rows = sum(1 for _ in reader)
    return rows, len(header)


def _print_shape(label: str, path: str) -> None:
    rows, cols = _csv_shape(path)
    print(f"{label} shape ({rows}, {cols})")


def cmd_synth(args: argparse.Namespace) -> int:
    spec = parse_synth_spec(_read(args.spec), args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    dataset = generate(spec)
    write_dataset_csv(dataset, args.out)
    _print_shape("dataset", args.out)
    return 0


def cmd_transform(args: argparse.Namespace) -> int:
    table = read_table_csv(args.input)
    if args.filters:
        rules = parse_filter_rules(_read(args.filters), args.filters)
        table = apply_filters(table, rules)
    if len(table) == 0:
        raise ExplicitlyEmptyCohort(f"no rows remain after filtering {args.input}")

    spec = parse_encoder_spec(_read(args.encoder), args.encoder)
    encoder = fit_encoder(table, spec.nominal, spec.numeric, spec.geo)
    resolver = StaticFipsResolver(args.geo_table) if (spec.geo or args.geo_table) else None
    dataset, skipped = build_dataset(
        table,
        encoder,
        duration_column=spec.duration_column,
        event_column=spec.event_column,
        id_column=spec.id_column,
        geo=resolver,
    )
    for row_index, reason in skipped:
        print(f"skipped row {row_index}: {reason}", file=sys.stderr)
    if len(dataset) == 0:
        raise ExplicitlyEmptyCohort("every row was skipped during encoding")

    if args.out_encoder:
        with open(args.out_encoder, "w", encoding="utf-8") as fh:
            json.dump(encoder.to_json_dict(), fh, sort_keys=True)
    if args.out_dataset:
        write_dataset_csv(dataset, args.out_dataset)
        _print_shape("dataset", args.out_dataset)
    if args.out_expanded:
        if args.stream:
            with expanded_csv_sink(args.out_expanded, dataset.schema.with_month()) as sink:
                expand_streaming(dataset, sink, args.chunk_size)
        else:
            write_expanded_csv(expand(dataset), args.out_expanded)
        _print_shape("expanded", args.out_expanded)
    return 0


def _forest_params(params: dict[str, str], seed: int | None, threads: int | None) -> ForestParams:
    return ForestParams(
        n_trees=int(params.get("n_trees", 20)),
        min_samples_split=int(params.get("min_samples_split", 3)),
        max_depth=int(params.get("max_depth", 15)),
        max_features_fraction=float(params.get("max_features_fraction", 0.8)),
        seed=seed if seed is not None else int(params.get("seed", 0)),
        n_jobs=threads if threads is not None else int(params.get("n_jobs", 1)),
        bootstrap=params.get("bootstrap", "true").lower() != "false",
    )


def _mlp_params(params: dict[str, str], seed: int | None) -> MlpParams:
    widths = tuple(int(w) for w in params.get("hidden_widths", "64,32").split(","))
    raw_rates = params.get("dropout_rates", "0.05")
    rates = tuple(float(r) for r in raw_rates.split(","))
    if len(rates) == 1:
        rates = rates * len(widths)
    return MlpParams(
        hidden_widths=widths,
        dropout_rates=rates,
        learning_rate=float(params.get("learning_rate", 0.001)),
        batch_size=int(params.get("batch_size", 1500)),
        epochs=int(params.get("epochs", 200)),
        seed=seed if seed is not None else int(params.get("seed", 0)),
    )


def cmd_train(args: argparse.Namespace) -> int:
    expanded = read_expanded_csv(args.expanded)
    params = parse_params(_read(args.params), args.params) if args.params else {}

    if args.preset:
        if args.preset in FOREST_PRESETS:
            kind = "forest"
        elif args.preset in MLP_PRESETS:
            kind = "mlp"
        else:
            raise ValueError(f"unknown preset {args.preset!r}; choose from {preset_names()}")
    else:
        kind = args.kind

    if kind == "forest":
        forest_params = (
            FOREST_PRESETS[args.preset] if args.preset else _forest_params(params, args.seed, args.threads)
        )
        if args.preset and args.seed is not None:
            forest_params = ForestParams(
                forest_params.n_trees,
                forest_params.min_samples_split,
                forest_params.max_depth,
                forest_params.max_features_fraction,
                args.seed,
                forest_params.n_jobs,
                forest_params.bootstrap,
            )
        model = train_forest(
            expanded,
            forest_params,
            progress=lambda i: print(f"tree {i + 1}/{forest_params.n_trees}", file=sys.stderr),
        )
    elif kind == "mlp":
        mlp_params = MLP_PRESETS[args.preset] if args.preset else _mlp_params(params, args.seed)
        if args.preset and args.seed is not None:
            mlp_params = MlpParams(
                mlp_params.hidden_widths,
                mlp_params.dropout_rates,
                mlp_params.learning_rate,
                mlp_params.batch_size,
                mlp_params.epochs,
                args.seed,
            )
        model = train_mlp(
            expanded,
            mlp_params,
            progress=lambda rec: print(
                "epoch {epoch}: loss {train_loss:.6f}".format(**rec)
                + (" heldout {heldout_loss:.6f}".format(**rec) if "heldout_loss" in rec else ""),
                file=sys.stderr,
            ),
        )
    elif kind == "tree":
        model = train_tree(
            expanded,
            TreeParams(
                max_depth=int(params.get("max_depth", 15)),
                min_samples_split=int(params.get("min_samples_split", 2)),
            ),
        )
    elif kind == "lifetable":
        model = train_life_table(expanded)
    else:
        raise ValueError(f"unknown model kind {kind!r}")

    save_model(model, args.out)
    print(f"saved {model.kind} model to {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    models = {}
    for path in args.model:
        name = os.path.splitext(os.path.basename(path))[0]
        if name in models:
            name = f"{name}#{len(models)}"
        models[name] = load_model(path)
    test = read_dataset_csv(args.test)
    horizons = tuple(int(h) for h in args.horizons.split(","))

    train_horizon = max(
        (m.train_stats.max_duration for m in models.values() if m.train_stats), default=1
    )
    grid = MonthGrid(max(1, max(horizons), train_horizon))
    report = evaluate_models(models, test, grid, horizons)
    report.write_csv(args.report)
    for cell in report.cells:
        value = "NA" if cell.value is None else f"{cell.value:.6f}"
        print(f"{cell.model} h={cell.horizon} {cell.metric}={value} n={cell.n}")
    return 0


def _load_patient(path: str, encoder: EncoderMap | None, schema_names: tuple[str, ...]):
    """Patient attributes from a JSON object or single-row CSV."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            record = json.load(fh)
        if not isinstance(record, dict):
            raise ValueError("patient JSON must be an object of column -> value")
    else:
        table = read_table_csv(path)
        if len(table) != 1:
            raise ValueError(f"patient CSV must contain exactly one row, found {len(table)}")
        record = table.record(0)
    if encoder is not None:
        return {str(k): str(v) for k, v in record.items()}
    missing = [n for n in schema_names if n not in record]
    if missing:
        raise MissingColumn(f"patient record is missing features {missing}")
    return {str(k): float(record[k]) for k in schema_names}


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    covariate_names = model.schema.names[:-1]  # strip the month feature

    encoder = None
    if args.encoder:
        with open(args.encoder, encoding="utf-8") as fh:
            encoder = EncoderMap.from_json_dict(json.load(fh))
    record = _load_patient(args.patient, encoder, covariate_names)

    if encoder is not None:
        resolver = StaticFipsResolver(args.geo_table) if (encoder.geo_column or args.geo_table) else None
        x = encode_record(encoder, record, resolver)
    else:
        x = FeatureVector(FeatureSchema(covariate_names), np.array([record[n] for n in covariate_names]))

    if args.horizon is not None:
        grid = MonthGrid(args.horizon)
    elif model.train_stats is not None:
        grid = MonthGrid(max(1, model.train_stats.max_duration))
    else:
        raise ValueError("model carries no training stats; pass --horizon")

    hazard = predict_hazard_curve(model, x, grid)
    curve = survival_from_hazard(hazard)
    if args.with_bands:
        if model.train_stats is None:
            raise ValueError("model carries no training stats; bands unavailable")
        lower, upper = bootstrap_bands(
            curve,
            pmf_from_hazard(hazard),
            model.train_stats.duration_histogram,
            n_resamples=args.n_resamples,
            seed=args.seed if args.seed is not None else 0,
        )
        curve = curve.with_bands(lower, upper)
    write_curve_csv(curve, args.out)
    print(" ".join(f"S({h})={curve.at(h)}" for h in REPORT_HORIZONS))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import build_registry, create_app

    config = parse_service_config(_read(args.config), args.config) if args.config else None
    if config is None:
        from .config import ServiceConfig

        config = ServiceConfig()
    config = config.with_env_overrides()
    if args.host:
        config.host = args.host
    if args.port is not None:
        config.port = args.port
    if args.model_dir:
        config.model_dir = args.model_dir
    if args.static_dir:
        config.static_dir = args.static_dir

    registry = build_registry(config)
    app = create_app(registry, static_dir=config.static_dir)

    import logging

    import uvicorn

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    print(f"serving {len(registry)} model(s) on {config.host}:{config.port}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtsurv",
        description="Discrete-time survival modeling: expand, train, evaluate, predict, serve.",
    )
    parser.add_argument("--version", action="version", version=f"dtsurv {__version__}")
    # global flags; subcommand-level values win when both are given
    parser.add_argument("--seed", type=int, default=None, dest="global_seed")
    parser.add_argument("--threads", type=int, default=None, dest="global_threads")
    parser.add_argument("--config", default=None, dest="global_config")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic censored cohort")
    p.add_argument("--spec", required=True, help="synthetic spec config")
    p.add_argument("--out", required=True, help="output dataset CSV")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("transform", help="filter, encode and expand a raw CSV")
    p.add_argument("--input", required=True, help="raw table CSV")
    p.add_argument("--filters", help="filter rules config")
    p.add_argument("--encoder", required=True, help="encoder spec config")
    p.add_argument("--geo-table", help="county lookup CSV (default: bundled)")
    p.add_argument("--out-dataset", help="encoded dataset CSV")
    p.add_argument("--out-expanded", help="expanded dataset CSV")
    p.add_argument("--out-encoder", help="fitted encoder map JSON")
    p.add_argument("--stream", action="store_true", help="stream the expansion")
    p.add_argument("--chunk-size", type=int, default=10000)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("train", help="train a hazard model on an expanded CSV")
    p.add_argument("--expanded", required=True, help="expanded dataset CSV")
    p.add_argument("--kind", choices=["forest", "mlp", "tree", "lifetable"], default="forest")
    p.add_argument("--preset", help=f"named configuration: {', '.join(preset_names())}")
    p.add_argument("--params", help="params config file (key value lines)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help="forest training parallelism")
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="horizon AUC / agreement / correlation report")
    p.add_argument("--model", action="append", required=True, help="model file (repeatable)")
    p.add_argument("--test", required=True, help="test dataset CSV")
    p.add_argument("--horizons", default="6,12,60")
    p.add_argument("--report", required=True, help="report CSV to write")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="survival curve for one patient")
    p.add_argument("--model", required=True)
    p.add_argument("--encoder", help="encoder map JSON for raw inputs")
    p.add_argument("--geo-table", help="county lookup CSV (default: bundled)")
    p.add_argument("--patient", required=True, help="patient JSON object or one-row CSV")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--with-bands", action="store_true")
    p.add_argument("--n-resamples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="curve CSV to write")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="run the HTTP prognosis service")
    p.add_argument("--config", help="service config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--model-dir")
    p.add_argument("--static-dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, fallback in (("seed", "global_seed"), ("threads", "global_threads"), ("config", "global_config")):
        if getattr(args, name, None) is None and getattr(args, fallback, None) is not None:
            setattr(args, name, getattr(args, fallback))
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DtsurvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
