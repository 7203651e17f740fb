"""Schema declarations and the tabular preprocessor.

A schema is an ordered list of columns, each continuous, categorical, or the
single target, with an optional ``protected`` flag on categorical columns
(used by the fairness report). The preprocessor follows one fixed recipe:

1. categorical columns are ordinal-encoded (sorted category order; values
   never seen in training map to one reserved code),
2. continuous columns are mean-imputed and standard-scaled,
3. every feature column is then quantile-mapped to standard normal scores.

The quantile references are fitted on noise-jittered training values
(Normal(0, 1e-3 * column std)); without the jitter, heavily tied columns
such as ordinal codes collapse onto a few quantiles and the transformed
moments drift. Transform itself is deterministic and monotone per column.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .exceptions import ConfigError, DataError, StateError

log = logging.getLogger(__name__)

COLUMN_KINDS = ("continuous", "categorical", "target")
TASK_KINDS = ("regression", "binary-classification")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    protected: bool = False


@dataclass
class Schema:
    task: str
    columns: list[ColumnSpec]

    def __post_init__(self):
        if self.task not in TASK_KINDS:
            raise ConfigError(f"unknown task {self.task!r}, expected one of {TASK_KINDS}")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ConfigError("schema has duplicate column names")
        for col in self.columns:
            if col.kind not in COLUMN_KINDS:
                raise ConfigError(f"column {col.name!r} has unknown kind {col.kind!r}")
            if col.protected and col.kind != "categorical":
                raise ConfigError(f"column {col.name!r}: only categorical columns can be protected")
        targets = [c for c in self.columns if c.kind == "target"]
        if len(targets) != 1:
            raise ConfigError(f"schema needs exactly one target column, found {len(targets)}")

    @property
    def target_name(self) -> str:
        return next(c.name for c in self.columns if c.kind == "target")

    @property
    def feature_columns(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.kind != "target"]

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.feature_columns]

    @property
    def protected_names(self) -> list[str]:
        return [c.name for c in self.columns if c.protected]

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "columns": [
                {"name": c.name, "kind": c.kind, "protected": c.protected}
                for c in self.columns
            ],
        }

    @classmethod
    def from_dict(cls, payload) -> "Schema":
        if not isinstance(payload, dict):
            raise ConfigError("schema JSON must be an object")
        try:
            columns = [
                ColumnSpec(str(c["name"]), str(c["kind"]), bool(c.get("protected", False)))
                for c in payload["columns"]
            ]
            task = str(payload["task"])
        except (KeyError, TypeError) as err:
            raise ConfigError(f"schema JSON is malformed: {err}") from err
        return cls(task=task, columns=columns)

    @classmethod
    def from_json_file(cls, path) -> "Schema":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"schema file {path} is not valid JSON: {err}") from err
        return cls.from_dict(payload)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class RawTable:
    """Typed, columnar rows as loaded from CSV; None marks a missing cell."""

    columns: dict[str, list]
    n_rows: int
    rejected_rows: int = 0

    def subset(self, indices) -> "RawTable":
        return RawTable(
            columns={name: [vals[i] for i in indices] for name, vals in self.columns.items()},
            n_rows=len(indices),
        )


@dataclass
class _ColumnState:
    kind: str
    categories: dict[str, int] | None = None
    mean: float = 0.0
    std: float = 1.0
    degenerate: bool = False
    refs: np.ndarray | None = None
    scores: np.ndarray | None = None


MISSING_CATEGORY = "__missing__"


class TablePreprocessor:
    """Fit on the training partition, transform any partition deterministically."""

    def __init__(self, schema: Schema, noise_seed: int = 0, max_quantiles: int = 1000):
        if max_quantiles < 2:
            raise ConfigError(f"need at least 2 quantiles, got {max_quantiles}")
        self.schema = schema
        self.noise_seed = noise_seed
        self.max_quantiles = max_quantiles
        self._state: dict[str, _ColumnState] | None = None

    @property
    def fitted(self) -> bool:
        return self._state is not None

    def _encode(self, col: ColumnSpec, values: list, state: _ColumnState) -> np.ndarray:
        if col.kind == "categorical":
            unseen = len(state.categories)
            return np.array([
                state.categories.get(MISSING_CATEGORY if v is None else v, unseen)
                for v in values
            ], dtype=np.float64)
        raw = np.array([state.mean if v is None else v for v in values], dtype=np.float64)
        if state.std == 0.0:
            return np.zeros(len(values))
        return (raw - state.mean) / state.std

    def fit(self, table: RawTable) -> "TablePreprocessor":
        if table.n_rows < 2:
            raise DataError(f"cannot fit a preprocessor on {table.n_rows} row(s)")
        rng = np.random.default_rng(self.noise_seed)
        state: dict[str, _ColumnState] = {}
        for col in self.schema.feature_columns:
            if col.name not in table.columns:
                raise DataError(f"column {col.name!r} missing from table")
            values = table.columns[col.name]
            cs = _ColumnState(kind=col.kind)
            if col.kind == "categorical":
                seen = sorted({MISSING_CATEGORY if v is None else v for v in values})
                cs.categories = {cat: code for code, cat in enumerate(seen)}
            else:
                present = np.array([v for v in values if v is not None], dtype=np.float64)
                if present.size == 0:
                    raise DataError(f"column {col.name!r} has no observed values")
                cs.mean = float(present.mean())
                cs.std = float(present.std())
            encoded = self._encode(col, values, cs)
            spread = float(encoded.std())
            if spread == 0.0:
                cs.degenerate = True
                log.warning("column %r is constant in training data; it will transform to 0",
                            col.name)
                state[col.name] = cs
                continue
            jittered = encoded + rng.normal(0.0, 1e-3 * spread, size=encoded.shape)
            n_q = min(self.max_quantiles, table.n_rows)
            levels = (np.arange(n_q) + 0.5) / n_q
            cs.refs = np.quantile(jittered, levels)
            cs.scores = ndtri(levels)
            state[col.name] = cs
        self._state = state
        return self

    def transform(self, table: RawTable) -> tuple[np.ndarray, np.ndarray | None]:
        """Return (X, y); y is None when the table lacks the target column."""
        if not self.fitted:
            raise StateError("preprocessor is not fitted; call fit first")
        cols = []
        for col in self.schema.feature_columns:
            if col.name not in table.columns:
                raise DataError(f"column {col.name!r} missing from table")
            cs = self._state[col.name]
            if cs.degenerate:
                cols.append(np.zeros(table.n_rows))
                continue
            encoded = self._encode(col, table.columns[col.name], cs)
            cols.append(np.interp(encoded, cs.refs, cs.scores))
        x = np.column_stack(cols) if cols else np.empty((table.n_rows, 0))
        y = None
        target = self.schema.target_name
        if target in table.columns:
            y = np.array(table.columns[target], dtype=np.float64)
        return x, y

    def fit_transform(self, table: RawTable) -> tuple[np.ndarray, np.ndarray | None]:
        return self.fit(table).transform(table)

    def category_labels(self, name: str) -> list[str]:
        """Categories of a categorical column in code order, for reports."""
        if not self.fitted:
            raise StateError("preprocessor is not fitted; call fit first")
        cs = self._state.get(name)
        if cs is None or cs.kind != "categorical":
            raise ConfigError(f"{name!r} is not a fitted categorical column")
        return sorted(cs.categories, key=cs.categories.get)

    # ---- persistence (embedded in the model container) --------------------

    def to_state(self) -> dict:
        if not self.fitted:
            raise StateError("preprocessor is not fitted; call fit first")
        columns = {}
        for name, cs in self._state.items():
            columns[name] = {
                "kind": cs.kind,
                "categories": cs.categories,
                "mean": cs.mean,
                "std": cs.std,
                "degenerate": cs.degenerate,
                "refs": None if cs.refs is None else cs.refs.tolist(),
                "scores": None if cs.scores is None else cs.scores.tolist(),
            }
        return {
            "schema": self.schema.to_dict(),
            "noise_seed": self.noise_seed,
            "max_quantiles": self.max_quantiles,
            "columns": columns,
        }

    @classmethod
    def from_state(cls, payload: dict) -> "TablePreprocessor":
        try:
            schema = Schema.from_dict(payload["schema"])
            pre = cls(schema, noise_seed=payload["noise_seed"],
                      max_quantiles=payload["max_quantiles"])
            state = {}
            for name, entry in payload["columns"].items():
                state[name] = _ColumnState(
                    kind=entry["kind"],
                    categories=entry["categories"],
                    mean=entry["mean"],
                    std=entry["std"],
                    degenerate=entry["degenerate"],
                    refs=None if entry["refs"] is None else np.asarray(entry["refs"]),
                    scores=None if entry["scores"] is None else np.asarray(entry["scores"]),
                )
            pre._state = state
        except (KeyError, TypeError) as err:
            raise ConfigError(f"preprocessor state is malformed: {err}") from err
        return pre
