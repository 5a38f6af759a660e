import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rankcompat import data_io, metrics
from rankcompat.data_io import SynthConfig, generate
from rankcompat.errors import (
    DataError,
    DimensionMismatch,
    InvalidConfig,
    ParseError,
    SchemaError,
)
from rankcompat.structures import Dataset, RiskModel
from rankcompat.trainer import predict

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_prevalence():
    ds = generate(SynthConfig(n=10_000, d=3, prevalence=0.5, seed=1))
    assert 0.47 <= ds.labels.mean() <= 0.53


def test_no_signal_gives_chance_auroc():
    cfg = SynthConfig(n=10_000, d=5, prevalence=0.3, class_separation=0.0, seed=2)
    ds = generate(cfg)
    # Bayes-optimal direction under separation s is the all-ones vector
    scores = 1 / (1 + np.exp(-ds.features.sum(axis=1)))
    assert abs(metrics.auroc(scores, ds.labels) - 0.5) <= 0.02


def test_separation_controls_auroc():
    aucs = []
    for sep in (0.1, 0.3, 0.6):
        ds = generate(SynthConfig(n=4000, d=10, class_separation=sep, seed=3))
        aucs.append(metrics.auroc(1 / (1 + np.exp(-ds.features.sum(axis=1))), ds.labels))
    assert aucs[0] < aucs[1] < aucs[2]


def test_noise_features_carry_no_shift():
    ds = generate(SynthConfig(n=20_000, d=4, noise_features=2, class_separation=2.0, seed=4))
    pos = ds.labels == 1
    gap = ds.features[pos].mean(axis=0) - ds.features[~pos].mean(axis=0)
    np.testing.assert_allclose(gap[:2], 2.0, atol=0.1)
    np.testing.assert_allclose(gap[2:], 0.0, atol=0.1)


def test_generate_deterministic(tmp_path):
    cfg = SynthConfig(n=50, d=3, seed=7)
    data_io.save_dataset(tmp_path / "a.csv", generate(cfg))
    data_io.save_dataset(tmp_path / "b.csv", generate(cfg))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert generate(cfg) != generate(SynthConfig(n=50, d=3, seed=8))


@pytest.mark.parametrize("kw", [dict(prevalence=0.0), dict(prevalence=1.0), dict(n=0),
                                dict(noise_features=60), dict(class_separation=-1.0)])
def test_invalid_config(kw):
    with pytest.raises(InvalidConfig):
        SynthConfig(**kw)


def test_apply_shift():
    ds = generate(SynthConfig(n=20, d=3, seed=1))
    moved = data_io.apply_shift(ds, 2.0, seed=5)
    delta = moved.features - ds.features
    np.testing.assert_allclose(np.linalg.norm(delta, axis=1), 2.0)
    assert data_io.apply_shift(ds, 0.0, seed=5) is ds


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_dataset_round_trip(tmp_path_factory, data):
    n = data.draw(st.integers(1, 8))
    d = data.draw(st.integers(1, 4))
    x = data.draw(arrays(np.float64, (n, d), elements=finite))
    y = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    ds = Dataset(x, y)
    data_io.save_dataset(path, ds)
    back = data_io.load_dataset(path)
    np.testing.assert_array_equal(back.features, x)
    np.testing.assert_array_equal(back.labels, y)
    assert back == ds


def test_dataset_csv_layout(tmp_path):
    data_io.save_dataset(tmp_path / "d.csv", Dataset([[0.1, -2.0]], [1]))
    assert (tmp_path / "d.csv").read_bytes() == b"y,f0,f1\n1,0.1,-2.0\n"


def test_bad_label_reports_line(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("y,f0\n0,1.0\n2,0.5\n")
    with pytest.raises(ParseError, match="line 3") as exc:
        data_io.load_dataset(p)
    assert exc.value.line == 3
    assert exc.value.column == 1


def test_bad_float_reports_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("y,f0,f1\n0,1.0,abc\n")
    with pytest.raises(ParseError) as exc:
        data_io.load_dataset(p)
    assert (exc.value.line, exc.value.column) == (2, 3)


def test_ragged_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("y,f0,f1\n0,1.0\n")
    with pytest.raises(ParseError):
        data_io.load_dataset(p)


def test_bad_header(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("label,x\n0,1.0\n")
    with pytest.raises(SchemaError):
        data_io.load_dataset(p)


def test_ordinal_labels(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("y,f0\n0,1.0\n2,0.5\n")
    assert data_io.load_dataset(p, binary=False).labels.tolist() == [0, 2]


def test_non_finite_rejected_on_save(tmp_path):
    m = RiskModel(np.array([1.0]), 0.0)
    m.weights = np.array([np.inf])
    with pytest.raises(DataError):
        data_io.save_model(tmp_path / "m.json", m)
    with pytest.raises(DataError):
        data_io.fmt_float(float("nan"))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 6), elements=finite), finite, st.floats(0, 10))
def test_model_round_trip(tmp_path_factory, w, b, lam):
    path = tmp_path_factory.mktemp("m") / "m.json"
    m = RiskModel(w, b, lam, {"seed": 3, "alpha": 0.5, "epochs_run": 7})
    data_io.save_model(path, m)
    assert data_io.load_model(path) == m


def test_model_json_fields(tmp_path):
    m = RiskModel(np.array([0.5, -1.0]), 0.25, 0.01, {"seed": 1, "alpha": 1.0, "epochs_run": 4})
    data_io.save_model(tmp_path / "m.json", m)
    obj = json.loads((tmp_path / "m.json").read_text())
    assert obj == {"weights": [0.5, -1.0], "intercept": 0.25, "reg_l2": 0.01,
                   "metadata": {"seed": 1, "alpha": 1.0, "epochs_run": 4}}


def test_save_requires_provenance(tmp_path):
    with pytest.raises(SchemaError):
        data_io.save_model(tmp_path / "m.json", RiskModel(np.array([1.0]), 0.0))


@pytest.mark.parametrize("missing", ["weights", "intercept", "reg_l2", "metadata"])
def test_model_missing_field(tmp_path, missing):
    obj = {"weights": [1.0], "intercept": 0.0, "reg_l2": 0.1,
           "metadata": {"seed": 0, "alpha": 1.0, "epochs_run": 1}}
    del obj[missing]
    (tmp_path / "m.json").write_text(json.dumps(obj))
    with pytest.raises(SchemaError):
        data_io.load_model(tmp_path / "m.json")


def test_model_dimension_checked_at_predict(tmp_path):
    meta = {"seed": 0, "alpha": 1.0, "epochs_run": 1}
    data_io.save_model(tmp_path / "m.json", RiskModel(np.array([1.0, 2.0]), 0.0, 0.0, meta))
    model = data_io.load_model(tmp_path / "m.json")
    with pytest.raises(DimensionMismatch):
        predict(model, np.ones((4, 3)))


def test_write_report(tmp_path):
    class Report:
        def report_rows(self):
            return ["a", "flag"], [[0.1, True], [2, False]]

    data_io.write_report(tmp_path / "r.csv", Report())
    assert (tmp_path / "r.csv").read_text() == "a,flag\n0.1,true\n2,false\n"
