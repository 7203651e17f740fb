import numpy as np
import pytest

from honam import datasets as ds
from honam.exceptions import ConfigError, DataError, StateError
from honam.preprocessing import ColumnSpec, RawTable, Schema, TablePreprocessor


def basic_schema(task="regression"):
    return Schema(task=task, columns=[
        ColumnSpec("a", "continuous"),
        ColumnSpec("cat", "categorical", protected=True),
        ColumnSpec("y", "target"),
    ])


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


# ---- schema ----------------------------------------------------------------

def test_schema_requires_exactly_one_target():
    with pytest.raises(ConfigError):
        Schema(task="regression", columns=[ColumnSpec("a", "continuous")])
    with pytest.raises(ConfigError):
        Schema(task="regression", columns=[
            ColumnSpec("a", "target"), ColumnSpec("b", "target")])


def test_schema_rejects_protected_continuous():
    with pytest.raises(ConfigError):
        Schema(task="regression", columns=[
            ColumnSpec("a", "continuous", protected=True),
            ColumnSpec("y", "target")])


def test_schema_rejects_duplicates_and_unknown_kinds():
    with pytest.raises(ConfigError):
        Schema(task="regression", columns=[
            ColumnSpec("a", "continuous"), ColumnSpec("a", "continuous"),
            ColumnSpec("y", "target")])
    with pytest.raises(ConfigError):
        Schema(task="regression", columns=[
            ColumnSpec("a", "ordinal"), ColumnSpec("y", "target")])
    with pytest.raises(ConfigError):
        Schema(task="clustering", columns=[ColumnSpec("y", "target")])


def test_schema_round_trip_and_digest():
    schema = basic_schema()
    again = Schema.from_dict(schema.to_dict())
    assert again.to_dict() == schema.to_dict()
    assert again.digest() == schema.digest()
    other = Schema(task="regression", columns=[
        ColumnSpec("cat", "categorical", protected=True),
        ColumnSpec("a", "continuous"),
        ColumnSpec("y", "target")])
    assert other.digest() != schema.digest()


# ---- csv loading -1----------------------------------------------------------

def test_load_csv_types_and_missing_cells(tmp_path):
    path = write(tmp_path, "a,cat,y,extra\n1.5,red,2.0,zzz\n,blue,3.0,zzz\n2.5,,4.0,zzz\n")
    table = ds.load_csv(path, basic_schema())
    assert table.n_rows == 3
    assert table.columns["a"] == [1.5, None, 2.5]
    assert table.columns["cat"] == ["red", "blue", None]
    assert "extra" not in table.columns


def test_load_csv_drops_rows_missing_target(tmp_path, caplog):
    path = write(tmp_path, "a,cat,y\n1,red,2\n2,blue,\n3,red,4\n")
    with caplog.at_level("WARNING"):
        table = ds.load_csv(path, basic_schema())
    assert table.n_rows == 2
    assert table.rejected_rows == 1
    assert "missing target" in caplog.text


def test_load_csv_unparseable_cell_names_row_and_column(tmp_path):
    path = write(tmp_path, "a,cat,y\n1,red,2\nbogus,blue,3\n")
    with pytest.raises(DataError, match=r"row 3.*'a'.*bogus"):
        ds.load_csv(path, basic_schema())


def test_load_csv_missing_schema_column(tmp_path):
    path = write(tmp_path, "a,y\n1,2\n")
    with pytest.raises(DataError, match="cat"):
        ds.load_csv(path, basic_schema())


def test_load_csv_validates_binary_targets(tmp_path):
    path = write(tmp_path, "a,cat,y\n1,red,0\n2,blue,2\n")
    with pytest.raises(DataError, match="0 or 1"):
        ds.load_csv(path, basic_schema(task="binary-classification"))


# ---- split ------------------------------------------------------------------

def make_table(n):
    return RawTable(columns={"v": list(range(n))}, n_rows=n)


def test_split_sizes_and_conservation():
    table = make_table(100)
    train, valid, test = ds.split(table, seed=3)
    assert (train.n_rows, valid.n_rows, test.n_rows) == (60, 20, 20)
    together = sorted(train.columns["v"] + valid.columns["v"] + test.columns["v"])
    assert together == list(range(100))


def test_split_sizes_non_multiple():
    train, valid, test = ds.split(make_table(101), seed=0)
    assert train.n_rows == 60 and valid.n_rows == 20 and test.n_rows == 21
    assert train.n_rows + valid.n_rows + test.n_rows == 101


def test_split_deterministic_and_seed_sensitive():
    t = make_table(50)
    a1, _, _ = ds.split(t, seed=7)
    a2, _, _ = ds.split(t, seed=7)
    b1, _, _ = ds.split(t, seed=8)
    assert a1.columns["v"] == a2.columns["v"]
    assert a1.columns["v"] != b1.columns["v"]


def test_split_rejects_tiny_tables():
    with pytest.raises(DataError):
        ds.split(make_table(9), seed=0)


# ---- preprocessor -----------------------------------------------------------

def continuous_schema(names, task="regression"):
    cols = [ColumnSpec(n, "continuous") for n in names]
    cols.append(ColumnSpec("y", "target"))
    return Schema(task=task, columns=cols)


def test_quantile_transform_moments_on_skewed_data():
    rng = np.random.default_rng(0)
    n = 5000
    table = RawTable(columns={
        "a": list(rng.exponential(3.0, n)),
        "b": list(rng.standard_cauchy(n)),
        "y": list(rng.normal(size=n)),
    }, n_rows=n)
    schema = continuous_schema(["a", "b"])
    x, y = TablePreprocessor(schema, noise_seed=1).fit_transform(table)
    assert y is not None and y.shape == (n,)
    for j in range(2):
        assert abs(x[:, j].mean()) < 0.05
        assert abs(x[:, j].std() - 1.0) < 0.1


def test_quantile_transform_is_monotone():
    rng = np.random.default_rng(1)
    values = list(rng.normal(size=500) ** 3)
    table = RawTable(columns={"a": values, "y": [0.0] * 500}, n_rows=500)
    pre = TablePreprocessor(continuous_schema(["a"]), noise_seed=2).fit(table)
    probe = np.linspace(min(values) - 1, max(values) + 1, 200)
    probe_table = RawTable(columns={"a": list(probe), "y": [0.0] * 200}, n_rows=200)
    out, _ = pre.transform(probe_table)
    diffs = np.diff(out[:, 0])
    assert np.all(diffs >= 0)
    assert np.all(np.isfinite(out))


def test_categorical_encoding_and_unseen_category():
    schema = Schema(task="regression", columns=[
        ColumnSpec("cat", "categorical"), ColumnSpec("y", "target")])
    train = RawTable(columns={"cat": ["red", "blue", "red", "green"] * 25,
                              "y": [0.0] * 100}, n_rows=100)
    pre = TablePreprocessor(schema, noise_seed=3).fit(train)
    assert pre.category_labels("cat") == ["blue", "green", "red"]
    probe = RawTable(columns={"cat": ["blue", "violet"], "y": [0.0, 0.0]}, n_rows=2)
    out, _ = pre.transform(probe)
    assert np.all(np.isfinite(out))
    assert out[1, 0] >= out[0, 0]


def test_missing_values_imputed_and_finite():
    schema = basic_schema()
    train = RawTable(columns={
        "a": [1.0, None, 3.0, 4.0] * 10,
        "cat": ["x", None, "x", "z"] * 10,
        "y": [0.0] * 40,
    }, n_rows=40)
    pre = TablePreprocessor(schema, noise_seed=4).fit(train)
    out, _ = pre.transform(train)
    assert np.all(np.isfinite(out))
    # Missing categoricals were present at fit, so they form their own category.
    assert "__missing__" in pre.category_labels("cat")


def test_constant_column_degenerates_with_warning(caplog):
    schema = continuous_schema(["a"])
    table = RawTable(columns={"a": [5.0] * 50, "y": [0.0] * 50}, n_rows=50)
    with caplog.at_level("WARNING"):
        x, _ = TablePreprocessor(schema, noise_seed=5).fit_transform(table)
    assert np.all(x == 0.0)
    assert "constant" in caplog.text


def test_transform_before_fit_raises():
    pre = TablePreprocessor(continuous_schema(["a"]))
    with pytest.raises(StateError):
        pre.transform(RawTable(columns={"a": [1.0], "y": [0.0]}, n_rows=1))


def test_fit_requires_rows():
    pre = TablePreprocessor(continuous_schema(["a"]))
    with pytest.raises(DataError):
        pre.fit(RawTable(columns={"a": [1.0], "y": [0.0]}, n_rows=1))


def test_preprocessor_state_round_trip():
    rng = np.random.default_rng(6)
    table = RawTable(columns={
        "a": list(rng.normal(size=200)),
        "cat": [["u", "v", "w"][i % 3] for i in range(200)],
        "y": list(rng.normal(size=200)),
    }, n_rows=200)
    pre = TablePreprocessor(basic_schema(), noise_seed=7).fit(table)
    clone = TablePreprocessor.from_state(pre.to_state())
    x1, _ = pre.transform(table)
    x2, _ = clone.transform(table)
    np.testing.assert_array_equal(x1, x2)


def test_fit_determinism_per_noise_seed():
    rng = np.random.default_rng(8)
    table = RawTable(columns={"a": list(rng.normal(size=300)), "y": [0.0] * 300},
                     n_rows=300)
    schema = continuous_schema(["a"])
    x1, _ = TablePreprocessor(schema, noise_seed=9).fit_transform(table)
    x2, _ = TablePreprocessor(schema, noise_seed=9).fit_transform(table)
    x3, _ = TablePreprocessor(schema, noise_seed=10).fit_transform(table)
    np.testing.assert_array_equal(x1, x2)
    assert np.any(x1 != x3)


# ---- bundle -----------------------------------------------------------------

def test_make_bundle_shapes_and_leakage_guard():
    rng = np.random.default_rng(11)
    n = 200
    table = RawTable(columns={
        "a": list(rng.normal(size=n)),
        "cat": [["p", "q"][i % 2] for i in range(n)],
        "y": list(rng.normal(size=n)),
    }, n_rows=n)
    bundle = ds.make_bundle(table, basic_schema(), seed=1)
    assert bundle.x_train.shape == (120, 2)
    assert bundle.x_valid.shape == (40, 2)
    assert bundle.x_test.shape == (40, 2)
    assert bundle.y_train.shape == (120,)
    # Transforms of held-out data stay inside the train score range (clamped),
    # which is only possible if the references came from the train partition.
    lo, hi = bundle.x_train.min(), bundle.x_train.max()
    assert bundle.x_test.min() >= lo - 1e-9
    assert bundle.x_test.max() <= hi + 1e-9


# ---- synthetic generators -----------------------------------------------------

def test_synth_classification_layout():
    table, schema = ds.gen_synth_classification(seed=0)
    assert table.n_rows == 10000
    xs = np.array(table.columns["x"])
    labels = np.array(table.columns["label"])
    assert np.unique(xs).size == 100
    assert np.all((xs >= -1) & (xs <= 1))
    assert set(labels.tolist()) <= {0.0, 1.0}
    # Each anchor's empirical rate stays inside the generating band (plus
    # binomial slack at n=100).
    for x in np.unique(xs):
        rate = labels[xs == x].mean()
        assert 0.1 - 4 * 0.05 <= rate <= 0.9 + 4 * 0.05
    assert schema.task == "binary-classification"


def test_synth_regression_layout():
    table, schema = ds.gen_synth_regression(seed=1)
    assert table.n_rows == 100
    assert np.all(np.abs(table.columns["x"]) <= 1.0)
    assert np.all(np.abs(table.columns["y"]) <= 1.0)
    assert schema.task == "regression"


def test_synth_generators_deterministic():
    t1, _ = ds.gen_synth_classification(seed=5)
    t2, _ = ds.gen_synth_classification(seed=5)
    t3, _ = ds.gen_synth_classification(seed=6)
    assert t1.columns == t2.columns
    assert t1.columns != t3.columns


def test_synth_biased_has_planted_group_gap():
    table, schema = ds.gen_synth_biased(seed=2)
    labels = np.array(table.columns["label"])
    groups = np.array(table.columns["group"])
    rate_a = labels[groups == "a"].mean()
    rate_b = labels[groups == "b"].mean()
    assert rate_b - rate_a > 0.15
    assert "group" in schema.protected_names


def test_write_csv_round_trip(tmp_path):
    table, schema = ds.gen_synth_regression(seed=3)
    path = tmp_path / "synth.csv"
    ds.write_csv(table, schema, path)
    again = ds.load_csv(path, schema)
    assert again.columns["x"] == table.columns["x"]
    assert again.columns["y"] == table.columns["y"]
