"""Command line interface.

Subcommands: train, eval, interpret, ablate, synth, bench. Every run writes
its artifacts into one output directory together with a manifest.json that
records the command, its arguments, sha256 hashes of the input files, the
seeds involved, and the produced file names. Reruns with the same inputs
produce byte-identical artifacts; only the manifest timestamp and benchmark
wall times vary.

Exit codes: 0 success; 1 usage or configuration problem; 2 broken input data
or model file; 3 numeric failure during computation.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np
from scipy.special import expit

from . import interpret as viz
from .datasets import (gen_synth_biased, gen_synth_classification, gen_synth_regression,
                       load_csv, make_bundle, write_csv)
from .exceptions import (ConfigError, DataError, HonamError, ModelFormatError, NumericError)
from .interactions import KERNEL_KINDS, count_kernel_ops, enumerate_interactions, esp_sums
from .metrics import classification_report, disparate_impact, regression_report
from .network import HonamNetwork
from .preprocessing import MISSING_CATEGORY, Schema, TablePreprocessor
from .training import TrainConfig, train
from .units import UNIT_KINDS

SYNTH_KINDS = ("classification", "regression", "biased")


# ---- shared helpers ---------------------------------------------------------


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _resolve_out(out: Path | None, default_name: str) -> Path:
    if out is None:
        out = Path(os.environ.get("HONAM_OUT_DIR", ".")) / default_name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out_dir: Path, ctx: click.Context, inputs: list[Path],
                    seeds: list[int], outputs: list[str]) -> None:
    manifest = {
        "command": ctx.command.name,
        "argv": ctx.obj.get("argv", []) if ctx.obj else [],
        "inputs": {str(p): _sha256(p) for p in inputs},
        "seeds": seeds,
        "outputs": sorted(outputs),
        "created": datetime.now(timezone.utc).isoformat(),
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as err:
        raise click.UsageError(f"{what} must be a comma-separated integer list, got {text!r}") from err
    if not values:
        raise click.UsageError(f"{what} must name at least one value")
    return values


def _model_scores(net: HonamNetwork, pipeline: dict, x: np.ndarray) -> np.ndarray:
    """Predictions on the reporting scale: values or probabilities."""
    raw = net.predict_raw(x)
    if net.task == "regression":
        return raw * pipeline.get("target_scale", 1.0) + pipeline.get("target_mean", 0.0)
    return expit(raw)


def _metric_report(net: HonamNetwork, pipeline: dict, x: np.ndarray,
                   y: np.ndarray) -> dict[str, float]:
    preds = _model_scores(net, pipeline, x)
    if net.task == "regression":
        return regression_report(y, preds, net.num_features)
    return classification_report(y, preds)


def _load_model(path: Path) -> tuple[HonamNetwork, dict, Schema, TablePreprocessor]:
    net, pipeline = HonamNetwork.load(path)
    if "schema" not in pipeline or "preprocessor" not in pipeline:
        raise ModelFormatError(f"model {path} carries no data pipeline; retrain it via the CLI")
    schema = Schema.from_dict(pipeline["schema"])
    pre = TablePreprocessor.from_state(pipeline["preprocessor"])
    return net, pipeline, schema, pre


def _feature_index(schema: Schema, name: str) -> int:
    names = schema.feature_names
    if name not in names:
        raise click.UsageError(f"unknown feature {name!r}; model has {', '.join(names)}")
    return names.index(name)


def _fmt(v: float) -> str:
    return repr(float(v))


# ---- command group ----------------------------------------------------------


@click.group()
def cli() -> None:
    """Train, evaluate, and interpret additive models with interactions."""


@cli.command("train")
@click.argument("data_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("schema_json", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Output directory (default ./train under HONAM_OUT_DIR or cwd).")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="JSON file with training settings (epochs, learning_rate, ...).")
@click.option("--order", default=2, show_default=True, help="Highest interaction order.")
@click.option("--repr-size", default=32, show_default=True,
              help="Per-feature representation width.")
@click.option("--hidden", default="32,64,32", show_default=True,
              help="Hidden layer widths of each feature net.")
@click.option("--unit", type=click.Choice(UNIT_KINDS), default="linear", show_default=True,
              help="First-layer unit of each feature net.")
@click.option("--seeds", default="0", show_default=True,
              help="Comma-separated seeds; one model per seed.")
@click.option("--epochs", type=int, default=None, help="Override the config epoch count.")
@click.option("--learning-rate", type=float, default=None,
              help="Override the config learning rate.")
@click.pass_context
def cmd_train(ctx, data_csv, schema_json, out, config_path, order, repr_size, hidden,
              unit, seeds, epochs, learning_rate):
    """Train one model per seed on DATA_CSV described by SCHEMA_JSON."""
    out_dir = _resolve_out(out, "train")
    schema = Schema.from_json_file(schema_json)
    table = load_csv(data_csv, schema)
    seed_list = _parse_int_list(seeds, "--seeds")
    hidden_sizes = tuple(_parse_int_list(hidden, "--hidden"))

    payload: dict = {}
    if config_path is not None:
        with open(config_path, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigError(f"training config {config_path} must be a JSON object")
        payload.update(loaded)
    if epochs is not None:
        payload["epochs"] = epochs
    if learning_rate is not None:
        payload["learning_rate"] = learning_rate

    outputs: list[str] = []
    reports: list[dict[str, float]] = []
    for seed in seed_list:
        config = TrainConfig.from_dict({**payload, "seed": seed})
        bundle = make_bundle(table, schema, seed)
        if schema.task == "regression":
            target_mean = float(bundle.y_train.mean())
            target_scale = float(bundle.y_train.std()) or 1.0
        else:
            target_mean, target_scale = 0.0, 1.0
        net = HonamNetwork(
            num_features=len(schema.feature_names), order=order, repr_size=repr_size,
            hidden_sizes=hidden_sizes, unit=unit, task=schema.task, seed=seed)
        result = train(
            net,
            bundle.x_train, (bundle.y_train - target_mean) / target_scale,
            bundle.x_valid, (bundle.y_valid - target_mean) / target_scale,
            config)

        pipeline = {
            "schema": schema.to_dict(),
            "schema_digest": schema.digest(),
            "preprocessor": bundle.preprocessor.to_state(),
            "target_mean": target_mean,
            "target_scale": target_scale,
        }
        model_name = f"model_seed{seed}.json"
        net.save(out_dir / model_name, extra=pipeline)
        outputs.append(model_name)

        history_name = f"history_seed{seed}.csv"
        with open(out_dir / history_name, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_loss,validation_score,is_best\n")
            for rec in result.history:
                fh.write(f"{rec.epoch + 1},{_fmt(rec.train_loss)},"
                         f"{_fmt(rec.validation_score)},{int(rec.is_best)}\n")
        outputs.append(history_name)

        test_name = f"test_partition_seed{seed}.csv"
        write_csv(bundle.raw_test, schema, out_dir / test_name)
        outputs.append(test_name)

        report = _metric_report(net, pipeline, bundle.x_test, bundle.y_test)
        reports.append(report)
        summary = ", ".join(f"{k}={v:.4f}" for k, v in report.items())
        click.echo(f"seed {seed}: best epoch {result.best_epoch + 1}, test {summary}")

    metric_names = list(reports[0])
    with open(out_dir / "metrics.csv", "w", encoding="utf-8") as fh:
        fh.write("seed," + ",".join(metric_names) + "\n")
        for seed, report in zip(seed_list, reports):
            fh.write(f"{seed}," + ",".join(_fmt(report[name]) for name in metric_names) + "\n")
        stacked = {name: np.array([rep[name] for rep in reports]) for name in metric_names}
        fh.write("mean," + ",".join(_fmt(stacked[name].mean()) for name in metric_names) + "\n")
        fh.write("std," + ",".join(_fmt(stacked[name].std()) for name in metric_names) + "\n")
    outputs.append("metrics.csv")

    inputs = [data_csv, schema_json] + ([config_path] if config_path else [])
    _write_manifest(out_dir, ctx, inputs, seed_list, outputs)
    click.echo(f"wrote {out_dir}")


@cli.command("eval")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("data_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--schema", "schema_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Optional schema file; must match the schema stored in the model.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="If given, also write metrics.csv and a manifest there.")
@click.pass_context
def cmd_eval(ctx, model_json, data_csv, schema_path, out):
    """Score MODEL_JSON on DATA_CSV and print each metric."""
    net, pipeline, schema, pre = _load_model(model_json)
    if schema_path is not None:
        override = Schema.from_json_file(schema_path)
        if override.digest() != schema.digest():
            stored = {(c.name, c.kind) for c in schema.columns}
            given = {(c.name, c.kind) for c in override.columns}
            raise DataError(
                f"schema {schema_path} does not match the schema the model was trained with; "
                f"only in model: {sorted(stored - given)}; "
                f"only in {schema_path}: {sorted(given - stored)}; "
                f"tasks: model={schema.task!r} vs given={override.task!r}")
    table = load_csv(data_csv, schema)
    x, y = pre.transform(table)
    if y is None:
        raise DataError(f"{data_csv} has no {schema.target_name!r} column to score against")
    report = _metric_report(net, pipeline, x, y)
    for name, value in report.items():
        click.echo(f"{name},{_fmt(value)}")
    if out is not None:
        out_dir = _resolve_out(out, "eval")
        with open(out_dir / "metrics.csv", "w", encoding="utf-8") as fh:
            fh.write("metric,value\n")
            for name, value in report.items():
                fh.write(f"{name},{_fmt(value)}\n")
        _write_manifest(out_dir, ctx, [model_json, data_csv], [], ["metrics.csv"])


@cli.command("interpret")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--feature", default=None, help="Export the shape curve of this feature.")
@click.option("--pair", default=None, metavar="A,B",
              help="Export the order-2 surface of two features.")
@click.option("--row", type=int, default=None,
              help="Export the per-subset contribution report of one data row.")
@click.option("--data", "data_csv", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Dataset used for value ranges, densities, and --row lookups.")
@click.option("--grid", "grid_n", default=64, show_default=True, help="Grid resolution.")
@click.option("--format", "fmt", type=click.Choice(("csv", "svg")), default="csv",
              show_default=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.pass_context
def cmd_interpret(ctx, model_json, feature, pair, row, data_csv, grid_n, fmt, out):
    """Export what MODEL_JSON learned: curves, surfaces, or one row's breakdown."""
    chosen = [opt for opt in (feature, pair, row) if opt is not None]
    if len(chosen) != 1:
        raise click.UsageError("pick exactly one of --feature, --pair, or --row")
    if grid_n < 2:
        raise click.UsageError(f"--grid must be at least 2, got {grid_n}")
    net, pipeline, schema, pre = _load_model(model_json)
    out_dir = _resolve_out(out, "interpret")

    x_data = None
    if data_csv is not None:
        x_data, _ = pre.transform(load_csv(data_csv, schema))

    def column_grid(idx: int) -> tuple[np.ndarray, np.ndarray | None]:
        if x_data is None:
            return np.linspace(-2.5, 2.5, grid_n), None
        col = x_data[:, idx]
        grid = np.linspace(float(col.min()), float(col.max()), grid_n)
        return grid, viz.density_histogram(col, grid)

    outputs: list[str] = []
    if feature is not None:
        idx = _feature_index(schema, feature)
        grid, density = column_grid(idx)
        curve = net.global_shape(idx, grid)
        name = f"shape_{feature}.{fmt}"
        if fmt == "csv":
            viz.write_shape_csv(out_dir / name, grid, curve, density)
        else:
            viz.render_shape_svg(out_dir / name, grid, curve, density,
                                 title=f"shape of {feature}")
        outputs.append(name)
    elif pair is not None:
        parts = [p.strip() for p in pair.split(",")]
        if len(parts) != 2:
            raise click.UsageError(f"--pair wants two feature names, got {pair!r}")
        i, j = (_feature_index(schema, p) for p in parts)
        grid_i, _ = column_grid(i)
        grid_j, _ = column_grid(j)
        surface = net.global_pair_shape(i, j, grid_i, grid_j)
        name = f"pair_{parts[0]}_{parts[1]}.{fmt}"
        if fmt == "csv":
            viz.write_pair_csv(out_dir / name, grid_i, grid_j, surface)
        else:
            viz.render_pair_svg(out_dir / name, grid_i, grid_j, surface,
                                title=f"interaction of {parts[0]} and {parts[1]}")
        outputs.append(name)
    else:
        if fmt != "csv":
            raise click.UsageError("--row reports are csv only")
        if x_data is None:
            raise click.UsageError("--row needs --data to look the row up in")
        if not 0 <= row < x_data.shape[0]:
            raise DataError(f"row {row} out of range for {x_data.shape[0]} data rows")
        report = net.local_contributions(x_data[row])
        name = f"row_{row}.csv"
        viz.write_contribution_csv(out_dir / name, report, schema.feature_names)
        outputs.append(name)
        click.echo(f"prediction {_fmt(report.prediction)}")

    inputs = [model_json] + ([data_csv] if data_csv else [])
    _write_manifest(out_dir, ctx, inputs, [], outputs)
    for name in outputs:
        click.echo(f"wrote {out_dir / name}")


@cli.command("ablate")
@click.argument("model_json", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--features", required=True, metavar="A,B,...",
              help="Feature names to zero out of the model.")
@click.option("--data", "data_csv", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="If given, report metrics and group-rate ratios before and after.")
@click.option("--threshold", default=0.5, show_default=True,
              help="Score threshold for the favorable-rate ratio.")
@click.option("--favorable", type=click.Choice(("below", "above")), default="below",
              show_default=True, help="Side of the threshold that counts as favorable.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.pass_context
def cmd_ablate(ctx, model_json, features, data_csv, threshold, favorable, out):
    """Remove features from MODEL_JSON and save the edited model."""
    net, pipeline, schema, pre = _load_model(model_json)
    out_dir = _resolve_out(out, "ablate")
    names = [p.strip() for p in features.split(",") if p.strip()]
    indices = [_feature_index(schema, name) for name in names]

    rows: list[tuple[str, float, float]] = []
    table = None
    if data_csv is not None:
        table = load_csv(data_csv, schema)
        x, y = pre.transform(table)
        if y is None:
            raise DataError(f"{data_csv} has no {schema.target_name!r} column")
        before = _metric_report(net, pipeline, x, y)
        before_scores = _model_scores(net, pipeline, x)

    net.ablate(indices)
    net.save(out_dir / "model.json", extra=pipeline)
    outputs = ["model.json"]
    click.echo(f"ablated [{', '.join(names)}] -> {out_dir / 'model.json'}")

    if table is not None:
        after = _metric_report(net, pipeline, x, y)
        after_scores = _model_scores(net, pipeline, x)
        for metric in before:
            rows.append((metric, before[metric], after[metric]))
        if net.task == "binary-classification":
            for col in schema.protected_names:
                raw = [MISSING_CATEGORY if v is None else v for v in table.columns[col]]
                groups = np.array(raw)
                for a, b in itertools.combinations(sorted(set(raw)), 2):
                    label = f"disparate_impact[{col}:{a}|{b}]"
                    rows.append((
                        label,
                        disparate_impact(before_scores, groups, a, b,
                                         threshold=threshold, favorable=favorable),
                        disparate_impact(after_scores, groups, a, b,
                                         threshold=threshold, favorable=favorable),
                    ))
        with open(out_dir / "report.csv", "w", encoding="utf-8") as fh:
            fh.write("metric,before,after\n")
            for metric, b, a in rows:
                fh.write(f"{metric},{_fmt(b)},{_fmt(a)}\n")
        outputs.append("report.csv")
        for metric, b, a in rows:
            click.echo(f"{metric}: {b:.4f} -> {a:.4f}")

    inputs = [model_json] + ([data_csv] if data_csv else [])
    _write_manifest(out_dir, ctx, inputs, [], outputs)


@cli.command("synth")
@click.argument("kind", type=click.Choice(SYNTH_KINDS))
@click.option("--seed", default=0, show_default=True)
@click.option("--rows", type=int, default=None,
              help="Row count (biased generator only).")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.pass_context
def cmd_synth(ctx, kind, seed, rows, out):
    """Write a bundled synthetic dataset and its schema."""
    if rows is not None and kind != "biased":
        raise click.UsageError("--rows only applies to the biased generator")
    out_dir = _resolve_out(out, "synth")
    if kind == "classification":
        table, schema = gen_synth_classification(seed)
    elif kind == "regression":
        table, schema = gen_synth_regression(seed)
    else:
        table, schema = gen_synth_biased(seed, n=rows if rows is not None else 4000)
    data_name = f"{kind}.csv"
    write_csv(table, schema, out_dir / data_name)
    with open(out_dir / "schema.json", "w", encoding="utf-8") as fh:
        json.dump(schema.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    _write_manifest(out_dir, ctx, [], [seed], [data_name, "schema.json"])
    click.echo(f"wrote {out_dir / data_name} ({table.n_rows} rows) and schema.json")


@cli.command("bench")
@click.option("--kernels", default=",".join(KERNEL_KINDS), show_default=True,
              help="Comma-separated kernel names to time.")
@click.option("--m", "m_list", default="100,200", show_default=True,
              help="Comma-separated feature counts.")
@click.option("--k", "k_list", default="8", show_default=True,
              help="Comma-separated representation widths.")
@click.option("--t", "t_list", default="4", show_default=True,
              help="Comma-separated interaction orders.")
@click.option("--rows", default=256, show_default=True, help="Batch size per invocation.")
@click.option("--reps", default=5, show_default=True, help="Timed repetitions (min wins).")
@click.option("--cap", default=50_000_000, show_default=True,
              help="Skip a kernel invocation above this multiply count.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.pass_context
def cmd_bench(ctx, kernels, m_list, k_list, t_list, rows, reps, cap, out):
    """Cross-check the interaction kernels, then time them."""
    kernel_names = [p.strip() for p in kernels.split(",") if p.strip()]
    for name in kernel_names:
        if name not in KERNEL_KINDS:
            raise click.UsageError(f"unknown kernel {name!r}; choose from {', '.join(KERNEL_KINDS)}")
    ms = _parse_int_list(m_list, "--m")
    ks = _parse_int_list(k_list, "--k")
    ts = _parse_int_list(t_list, "--t")
    if min(ms + ks + ts) < 1 or rows < 1 or reps < 1:
        raise click.UsageError("--m, --k, --t, --rows, and --reps must be positive")
    out_dir = _resolve_out(out, "bench")

    kernel_fns = {
        "recursion": lambda reprs, t: esp_sums(reprs, t)[t - 1],
        "enumeration": lambda reprs, t: enumerate_interactions(reprs, t),
    }
    rng = np.random.default_rng(0)
    lines = ["kernel,m,k,t,multiplies,wall_ns"]
    for m, k, order in itertools.product(ms, ks, ts):
        label = f"m={m},k={k},t={order}"
        reprs = rng.normal(0.0, 1.0, size=(m, rows, k))
        counts = {name: count_kernel_ops(name, m, k, order) for name in kernel_names}
        runnable = [name for name in kernel_names if counts[name] <= cap]
        if len(runnable) > 1:
            results = {name: kernel_fns[name](reprs, order) for name in runnable}
            baseline = results[runnable[0]]
            for name in runnable[1:]:
                if not np.allclose(baseline, results[name], atol=1e-8):
                    raise NumericError(
                        f"kernels {runnable[0]} and {name} disagree at {label}")
            click.echo(f"{label}: kernels agree ({', '.join(runnable)})")
        for name in kernel_names:
            if counts[name] > cap:
                click.echo(f"{label}: skipping {name} "
                           f"({counts[name]} multiplies exceeds cap {cap})")
                lines.append(f"{name},{m},{k},{order},{counts[name]},")
                continue
            fn = kernel_fns[name]
            best = None
            for _ in range(reps):
                start = time.perf_counter_ns()
                fn(reprs, order)
                elapsed = time.perf_counter_ns() - start
                best = elapsed if best is None else min(best, elapsed)
            lines.append(f"{name},{m},{k},{order},{counts[name]},{best}")
            click.echo(f"{label} {name}: {counts[name]} multiplies, {best} ns")
    with open(out_dir / "bench.csv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_manifest(out_dir, ctx, [], [0], ["bench.csv"])
    click.echo(f"wrote {out_dir / 'bench.csv'}")


# ---- entry point ------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and translate failures into stable exit codes."""
    args = list(argv) if argv is not None else sys.argv[1:]
    try:
        cli.main(args=args, standalone_mode=False, obj={"argv": args})
        return 0
    except click.exceptions.Exit as err:
        return int(err.exit_code)
    except click.ClickException as err:
        err.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except (ConfigError,) as err:
        click.echo(f"error: {err}", err=True)
        return 1
    except (DataError, ModelFormatError) as err:
        click.echo(f"error: {err}", err=True)
        return 2
    except NumericError as err:
        click.echo(f"error: {err}", err=True)
        return 3
    except HonamError as err:
        click.echo(f"error: {err}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
