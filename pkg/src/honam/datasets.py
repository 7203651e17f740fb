"""CSV loading, partitioning, and the bundled synthetic generators."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import DataError
from .preprocessing import ColumnSpec, RawTable, Schema, TablePreprocessor

log = logging.getLogger(__name__)

TRAIN_FRACTION = 0.6
VALID_FRACTION = 0.2
MIN_ROWS = 10


def load_csv(path, schema: Schema) -> RawTable:
    """Read and type-check a CSV against the schema.

    Missing cells (empty strings) stay missing; rows with a missing target
    are dropped and counted; a non-empty numeric cell that does not parse is
    an error naming the row and column.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing_cols = [c.name for c in schema.columns if c.name not in header]
        if missing_cols:
            raise DataError(f"CSV {path} lacks schema column(s): {', '.join(missing_cols)}")

        numeric = {c.name for c in schema.columns if c.kind in ("continuous", "target")}
        target = schema.target_name
        is_binary = schema.task == "binary-classification"
        columns: dict[str, list] = {c.name: [] for c in schema.columns}
        rejected = 0
        parsed_rows = []
        for row_num, row in enumerate(reader, start=2):
            parsed = {}
            for col in schema.columns:
                cell = (row.get(col.name) or "").strip()
                if cell == "":
                    parsed[col.name] = None
                    continue
                if col.name in numeric:
                    try:
                        value = float(cell)
                    except ValueError:
                        raise DataError(
                            f"{path} row {row_num}, column {col.name!r}: "
                            f"cannot parse {cell!r} as a number") from None
                    if col.name == target and is_binary and value not in (0.0, 1.0):
                        raise DataError(
                            f"{path} row {row_num}: classification target must be 0 or 1, "
                            f"got {cell!r}")
                    parsed[col.name] = value
                else:
                    parsed[col.name] = cell
            if parsed[target] is None:
                rejected += 1
                continue
            parsed_rows.append(parsed)
        if rejected:
            log.warning("%s: dropped %d row(s) with a missing target", path, rejected)
        for parsed in parsed_rows:
            for name, value in parsed.items():
                columns[name].append(value)
    return RawTable(columns=columns, n_rows=len(parsed_rows), rejected_rows=rejected)


def write_csv(table: RawTable, schema: Schema, path) -> None:
    """Write a table with schema column order; floats use repr round-tripping."""
    names = [c.name for c in schema.columns]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(table.n_rows):
            row = []
            for name in names:
                v = table.columns[name][i]
                row.append("" if v is None else (repr(v) if isinstance(v, float) else v))
            writer.writerow(row)


def split(table: RawTable, seed: int) -> tuple[RawTable, RawTable, RawTable]:
    """Seeded shuffle, then a contiguous 60/20/20 cut."""
    n = table.n_rows
    if n < MIN_ROWS:
        raise DataError(f"need at least {MIN_ROWS} rows to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(TRAIN_FRACTION * n))
    n_valid = int(np.floor(VALID_FRACTION * n))
    train_idx = order[:n_train]
    valid_idx = order[n_train:n_train + n_valid]
    test_idx = order[n_train + n_valid:]
    return table.subset(train_idx), table.subset(valid_idx), table.subset(test_idx)


@dataclass
class DatasetBundle:
    """Preprocessed partitions plus everything needed to reproduce them."""

    x_train: np.ndarray
    y_train: np.ndarray
    x_valid: np.ndarray
    y_valid: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    schema: Schema
    seed: int
    preprocessor: TablePreprocessor
    raw_test: RawTable


def make_bundle(table: RawTable, schema: Schema, seed: int,
                noise_seed: int | None = None) -> DatasetBundle:
    """Split, fit the preprocessor on the training partition only, transform all."""
    train, valid, test = split(table, seed)
    pre = TablePreprocessor(schema, noise_seed=seed if noise_seed is None else noise_seed)
    x_train, y_train = pre.fit_transform(train)
    x_valid, y_valid = pre.transform(valid)
    x_test, y_test = pre.transform(test)
    return DatasetBundle(x_train, y_train, x_valid, y_valid, x_test, y_test,
                         schema, seed, pre, test)


# ---- synthetic data --------------------------------------------------------


def synth_classification_schema() -> Schema:
    return Schema(task="binary-classification", columns=[
        ColumnSpec("x", "continuous"), ColumnSpec("label", "target")])


def synth_regression_schema() -> Schema:
    return Schema(task="regression", columns=[
        ColumnSpec("x", "continuous"), ColumnSpec("y", "target")])


def gen_synth_classification(seed: int) -> tuple[RawTable, Schema]:
    """100 anchor points in [-1, 1], each with 100 Bernoulli draws.

    Every anchor x gets its own success probability in [0.1, 0.9], so the
    10000 rows trace a noisy 1-D probability curve a single shape function
    can fit.
    """
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1.0, 1.0, size=100)
    ps = rng.uniform(0.1, 0.9, size=100)
    x_col: list[float] = []
    label_col: list[float] = []
    for x, p in zip(xs, ps):
        draws = rng.binomial(1, p, size=100)
        x_col.extend([float(x)] * 100)
        label_col.extend(float(d) for d in draws)
    table = RawTable(columns={"x": x_col, "label": label_col}, n_rows=10000)
    return table, synth_classification_schema()


def gen_synth_regression(seed: int) -> tuple[RawTable, Schema]:
    """100 (x, y) pairs drawn uniformly from [-1, 1]^2."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1.0, 1.0, size=100)
    ys = rng.uniform(-1.0, 1.0, size=100)
    table = RawTable(columns={"x": [float(v) for v in xs],
                              "y": [float(v) for v in ys]}, n_rows=100)
    return table, synth_regression_schema()


def gen_synth_biased(seed: int, n: int = 4000) -> tuple[RawTable, Schema]:
    """A classification set with bias planted in a protected group column.

    The label leans on the group membership directly (logit shift +1.2 for
    group "b"), on a legitimate continuous score, and not at all on the noise
    column. A model trained on it picks up the group signal; removing the
    group feature afterwards should push the favorable-rate ratio between
    groups back toward 1.
    """
    rng = np.random.default_rng(seed)
    score = rng.normal(0.0, 1.0, size=n)
    group = rng.integers(0, 2, size=n)
    noise = rng.normal(0.0, 1.0, size=n)
    logit = 1.5 * score + 1.2 * group - 0.6
    label = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-logit))).astype(float)
    table = RawTable(columns={
        "score": [float(v) for v in score],
        "group": ["b" if g else "a" for g in group],
        "noise": [float(v) for v in noise],
        "label": [float(v) for v in label],
    }, n_rows=n)
    schema = Schema(task="binary-classification", columns=[
        ColumnSpec("score", "continuous"),
        ColumnSpec("group", "categorical", protected=True),
        ColumnSpec("noise", "continuous"),
        ColumnSpec("label", "target"),
    ])
    return table, schema
