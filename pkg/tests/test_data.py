"""Table IO, fold assignment, standardization, synthetic data."""

import math

import numpy as np
import pytest

from permlab.data import (
    DescriptorTable,
    FoldAssignment,
    NormalizationStats,
    assign_folds,
    format_cell,
    load_descriptor_table,
    load_ecfp_table,
    load_measurements,
    measurement_columns,
    parse_float,
    read_csv,
    render_csv,
    standardize,
    synth_dataset,
    write_csv,
    write_descriptor_table,
    write_mean_measurements,
    write_measurements,
)
from permlab.errors import (
    DegenerateInputError,
    SchemaError,
    TableParseError,
    ZeroVarianceError,
)


def test_format_cell_17_digits_round_trip():
    rng = np.random.default_rng(0)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
        assert float(format_cell(float(x))) == float(x)
    assert format_cell(None) == ""
    assert format_cell(3) == "3"
    assert format_cell("abc") == "abc"


def test_csv_round_trip(tmp_path):
    p = tmp_path / "t.csv"
    header = ["a", "b", "c"]
    rows = [["x", 1, 0.1], ["y", 2, None]]
    write_csv(p, header, rows)
    h2, r2 = read_csv(p)
    assert h2 == header
    assert [r[:2] for r in r2] == [["x", "1"], ["y", "2"]]
    assert float(r2[0][2]) == 0.1 and r2[1][2] == ""
    assert render_csv(header, rows) == p.read_text()


def test_csv_writes_lf_newlines(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["a"], [[1], [2]])
    raw = p.read_bytes()
    assert b"\r" not in raw


def test_read_csv_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(TableParseError):
        read_csv(p)


def test_parse_float_missing_and_errors():
    assert parse_float("", "f", 0, "c") is None
    assert parse_float("nan", "f", 0, "c") is None
    assert parse_float(" 2.5 ", "f", 0, "c") == 2.5
    with pytest.raises(TableParseError) as exc:
        parse_float("zz", "f", 3, "Pe")
    assert "row 5" in str(exc.value) and "Pe" in str(exc.value)


def _measurement_rows():
    cols = measurement_columns()
    row1 = {c: "" for c in cols}
    row1.update(compound_id="A", plate_number="1")
    row1["BBB_MR"] = "0.2"
    row1["BBB_Pe"] = "1e-5"
    row1["BBB_LogPe"] = "-5"
    row2 = dict(row1, plate_number="2")
    row2["BBB_LogPe"] = "-5.0000000001"  # within the declared tolerance
    return cols, [row1, row2]


def test_load_measurements_and_aggregate(tmp_path):
    cols, rows = _measurement_rows()
    p = tmp_path / "m.csv"
    write_csv(p, cols, [[r[c] for c in cols] for r in rows])
    table = load_measurements(p)
    assert len(table) == 2
    assert table.compound_ids() == ["A"]
    means = table.mean_log_pe()
    assert means["A"]["BBB"] == pytest.approx(-5.0)
    assert means["A"]["L"] is None
    ids, X = table.log_pe_matrix()
    assert ids == ["A"] and X.shape == (1, 6)
    assert X[0, 0] == pytest.approx(-5.0) and math.isnan(X[0, 1])


def test_load_measurements_logpe_consistency(tmp_path):
    cols, rows = _measurement_rows()
    rows[0]["BBB_LogPe"] = "-4.9"  # log10(1e-5) is -5
    p = tmp_path / "m.csv"
    write_csv(p, cols, [[r[c] for c in cols] for r in rows])
    with pytest.raises(TableParseError) as exc:
        load_measurements(p)
    assert "inconsistent" in str(exc.value)


def test_load_measurements_schema_error(tmp_path):
    p = tmp_path / "m.csv"
    write_csv(p, ["compound_id", "oops"], [["A", "1"]])
    with pytest.raises(SchemaError):
        load_measurements(p)


def test_measurement_write_read_cycle(tmp_path):
    cols, rows = _measurement_rows()
    p = tmp_path / "m.csv"
    write_csv(p, cols, [[r[c] for c in cols] for r in rows])
    table = load_measurements(p)
    p2 = tmp_path / "m2.csv"
    write_measurements(p2, table)
    again = load_measurements(p2)
    assert len(again) == len(table)
    assert again.records[0].log_pe == table.records[0].log_pe
    p3 = tmp_path / "mean.csv"
    write_mean_measurements(p3, table)
    header, mean_rows = read_csv(p3)
    assert header[0] == "compound_id" and len(mean_rows) == 1
    # arithmetic mean over both plates
    assert float(mean_rows[0][header.index("BBB_LogPe")]) == pytest.approx(-5.0)


def test_fold_assignment_balanced_and_seeded():
    ids = [f"C{i}" for i in range(143)]
    fa = assign_folds(ids, n_folds=5, seed=11)
    assert sorted(fa.sizes()) == [28, 28, 29, 29, 29]
    assert assign_folds(ids, n_folds=5, seed=11).mapping == fa.mapping
    assert assign_folds(ids, n_folds=5, seed=12).mapping != fa.mapping
    assert sum(len(fa.ids_in_fold(f)) for f in range(5)) == 143


def test_fold_assignment_validates():
    with pytest.raises(SchemaError):
        FoldAssignment({"a": 7}, n_folds=5)
    with pytest.raises(SchemaError):
        FoldAssignment({"a": 0, "b": 0, "c": 0, "d": 1}, n_folds=5)


def test_descriptor_table_checks():
    with pytest.raises(SchemaError):
        DescriptorTable("x", ["a", "a"], ["f"], np.zeros((2, 1)))
    with pytest.raises(SchemaError):
        DescriptorTable("percepta", ["a"], ["f"], np.zeros((1, 1)))  # wants 38
    with pytest.raises(SchemaError):
        DescriptorTable("x", ["a"], ["f"])  # neither dense nor sparse
    t = DescriptorTable("x", ["a", "b"], ["f", "g"], np.arange(4.0).reshape(2, 2))
    assert t.n_compounds == 2 and t.n_features == 2 and not t.is_sparse


def test_descriptor_subset_and_dense():
    t = DescriptorTable(
        "ecfp",
        ["a", "b", "c"],
        bits=[(0, 3), (1,), ()],
        width=2000,
        folds=[0, 1, 2],
    )
    sub = t.subset([2, 0])
    assert sub.compound_ids == ["c", "a"]
    assert sub.bits == [(), (0, 3)]
    assert sub.folds == [2, 0]
    X = t.dense()
    assert X.shape == (3, 2000)
    assert X[0, 0] == 1.0 and X[0, 3] == 1.0 and X.sum() == 3.0


def test_descriptor_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    t = DescriptorTable(
        "custom",
        [f"c{i}" for i in range(7)],
        [f"f{j}" for j in range(4)],
        rng.standard_normal((7, 4)),
        folds=[i % 5 for i in range(7)],
    )
    p = tmp_path / "d.csv"
    write_descriptor_table(p, t)
    back = load_descriptor_table(p, "custom")
    assert back.compound_ids == t.compound_ids
    assert back.feature_names == t.feature_names
    assert np.array_equal(back.matrix, t.matrix)  # 17-digit cells are exact
    assert back.folds == t.folds


def test_ecfp_csv_round_trip(tmp_path):
    t = DescriptorTable(
        "ecfp",
        ["a", "b"],
        bits=[(5, 1999, 0), ()],
        width=2000,
        folds=[0, 1],
    )
    p = tmp_path / "e.csv"
    write_descriptor_table(p, t)
    back = load_ecfp_table(p)
    assert back.bits == [(0, 5, 1999), ()]
    assert back.width == 2000
    header, _ = read_csv(p)
    assert header == ["compound_id", "fold", "bits"]


def test_standardize_population_convention():
    X = np.array([[1.0, 10.0], [3.0, 30.0], [5.0, 20.0]])
    t = DescriptorTable("x", ["a", "b", "c"], ["f", "g"], X)
    out, stats = standardize(t)
    assert np.allclose(out.matrix.mean(0), 0.0)
    assert np.allclose(out.matrix.std(0), 1.0)  # ddof=0
    assert np.allclose(stats.means, [3.0, 20.0])


def test_standardize_with_train_stats_only():
    Xtr = np.array([[0.0], [2.0]])
    Xte = np.array([[4.0]])
    tr = DescriptorTable("x", ["a", "b"], ["f"], Xtr)
    te = DescriptorTable("x", ["c"], ["f"], Xte)
    _, stats = standardize(tr)
    out, _ = standardize(te, stats)
    assert out.matrix[0, 0] == pytest.approx((4.0 - 1.0) / 1.0)


def test_standardize_zero_variance():
    t = DescriptorTable("x", ["a", "b"], ["f"], np.ones((2, 1)))
    with pytest.raises(ZeroVarianceError):
        standardize(t)


def test_normalization_stats_json(tmp_path):
    stats = NormalizationStats(["f", "g"], np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    p = tmp_path / "s.json"
    stats.to_json(p)
    back = NormalizationStats.from_json(p)
    assert back.feature_names == ["f", "g"]
    assert np.array_equal(back.means, stats.means)
    assert np.array_equal(back.stds, stats.stds)
    with pytest.raises(ZeroVarianceError):
        NormalizationStats(["f"], np.array([0.0]), np.array([0.0]))


def test_synth_dataset_deterministic_and_recoverable():
    a = synth_dataset(seed=5, n_compounds=50, n_features=8, n_targets=2, noise_sd=0.0)
    b = synth_dataset(seed=5, n_compounds=50, n_features=8, n_targets=2, noise_sd=0.0)
    assert np.array_equal(a.table.matrix, b.table.matrix)
    assert np.array_equal(a.targets, b.targets)
    assert a.table.compound_ids[0] == "C0001"
    assert a.target_names == ["BBB_LogPe", "L_LogPe"]
    # noiseless: least squares recovers the planted weights
    W, *_ = np.linalg.lstsq(a.table.matrix, a.targets, rcond=None)
    assert np.allclose(W, a.weights, atol=1e-8)
    # targets strongly correlated by construction
    corr = np.corrcoef(a.targets.T)
    assert abs(corr[0, 1]) > 0.5


def test_synth_dataset_validates():
    with pytest.raises(DegenerateInputError):
        synth_dataset(seed=0, n_compounds=0, n_features=3, n_targets=1, noise_sd=0.1)
