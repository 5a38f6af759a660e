"""Synthetic data generation and file formats.

Formats
-------
Dataset CSV
    Header ``y,f0,...,f{d-1}``; UTF-8, LF line endings, ``.`` decimal point.
    Floats are written with the shortest representation that round-trips.
Model JSON
    ``{"weights": [...], "intercept": b, "reg_l2": lam,
    "metadata": {"seed": ..., "alpha": ..., "epochs_run": ...}}``
Report CSV
    One row per record; the column set depends on the report type (see
    :meth:`rankcompat.pipeline.ExperimentSummary.report_rows`).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from pathlib import Path

import numpy as np

from rankcompat.errors import DataError, InvalidConfig, ParseError, SchemaError
from rankcompat.structures import Dataset, RiskModel


@dataclasses.dataclass(frozen=True)
class SynthConfig:
    """Gaussian class-conditional generator settings.

    The first ``d - noise_features`` columns carry signal: their means are
    ``+class_separation / 2`` for positives and ``-class_separation / 2`` for
    negatives, with unit variance. The remaining columns are pure noise.
    ``shift`` is a covariate-shift magnitude that the experiment pipeline
    applies to the updated-model and evaluation partitions.
    """

    n: int = 8577
    d: int = 50
    prevalence: float = 0.15
    class_separation: float = 0.3
    noise_features: int = 0
    shift: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InvalidConfig("n and d must be positive")
        if not 0.0 < self.prevalence < 1.0:
            raise InvalidConfig("prevalence must lie in (0, 1)")
        if not self.class_separation >= 0.0:
            raise InvalidConfig("class_separation must be non-negative")
        if not 0 <= self.noise_features <= self.d:
            raise InvalidConfig("noise_features must lie in [0, d]")
        if not math.isfinite(self.shift):
            raise InvalidConfig("shift must be finite")


def generate(cfg: SynthConfig) -> Dataset:
    rng = np.random.default_rng(cfg.seed)
    y = (rng.random(cfg.n) < cfg.prevalence).astype(np.int64)
    x = rng.standard_normal((cfg.n, cfg.d))
    k = cfg.d - cfg.noise_features
    x[:, :k] += np.where(y[:, None] == 1, 0.5, -0.5) * cfg.class_separation
    return Dataset(x, y)


def shift_direction(d: int, seed: int) -> np.ndarray:
    """Unit vector along which covariate shift is applied."""
    v = np.random.default_rng([seed, 0x5817]).standard_normal(d)
    return v / np.linalg.norm(v)


def apply_shift(ds: Dataset, magnitude: float, seed: int) -> Dataset:
    """Translate every row by ``magnitude`` along :func:`shift_direction`."""
    if magnitude == 0.0:
        return ds
    return Dataset(ds.features + magnitude * shift_direction(ds.d, seed),
                   ds.labels, ds.binary)


def fmt_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise DataError(f"refusing to write non-finite value {x!r}")
    return repr(x)


def fmt_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return fmt_float(x)
    return str(x)


def _open_w(path):
    return open(path, "w", encoding="utf-8", newline="")


def save_dataset(path, ds: Dataset) -> None:
    if not np.all(np.isfinite(ds.features)):
        raise DataError("dataset contains non-finite values")
    with _open_w(path) as fh:
        fh.write(",".join(["y"] + [f"f{j}" for j in range(ds.d)]) + "\n")
        for label, row in zip(ds.labels, ds.features):
            fh.write(str(int(label)) + "," + ",".join(map(fmt_float, row)) + "\n")


def load_dataset(path, binary: bool = True) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        d = len(header) - 1
        if d < 1 or header[0] != "y" or header[1:] != [f"f{j}" for j in range(d)]:
            raise SchemaError("header must be y,f0,...,f{d-1}")
        labels, rows = [], []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != d + 1:
                raise ParseError(f"expected {d + 1} fields, got {len(rec)}", line=lineno)
            try:
                label = int(rec[0])
            except ValueError:
                raise ParseError(f"label {rec[0]!r} is not an integer",
                                 line=lineno, column=1) from None
            if label < 0 or (binary and label > 1):
                raise ParseError(f"label {rec[0]!r} is not a valid "
                                 f"{'binary' if binary else 'ordinal'} label",
                                 line=lineno, column=1)
            row = []
            for col, cell in enumerate(rec[1:], start=2):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{cell!r} is not a number",
                                     line=lineno, column=col) from None
                if not math.isfinite(v):
                    raise ParseError(f"non-finite value {cell!r}", line=lineno, column=col)
                row.append(v)
            labels.append(label)
            rows.append(row)
    if not rows:
        raise ParseError("no data rows", line=2)
    return Dataset(np.array(rows), np.array(labels), binary)


_META_FIELDS = ("seed", "alpha", "epochs_run")


def model_to_dict(model: RiskModel) -> dict:
    if not (np.all(np.isfinite(model.weights)) and math.isfinite(model.intercept)):
        raise DataError("model parameters must be finite")
    missing = [k for k in _META_FIELDS if k not in model.metadata]
    if missing:
        raise SchemaError(f"model metadata is missing fields: {', '.join(missing)}")
    return {
        "weights": [float(w) for w in model.weights],
        "intercept": float(model.intercept),
        "reg_l2": float(model.reg_l2),
        "metadata": dict(model.metadata),
    }


def model_from_dict(obj) -> RiskModel:
    if not isinstance(obj, dict):
        raise SchemaError("model JSON must be an object")
    missing = [k for k in ("weights", "intercept", "reg_l2", "metadata") if k not in obj]
    if missing:
        raise SchemaError(f"model JSON is missing fields: {', '.join(missing)}")
    meta = obj["metadata"]
    if not isinstance(meta, dict):
        raise SchemaError("metadata must be an object")
    missing = [k for k in _META_FIELDS if k not in meta]
    if missing:
        raise SchemaError(f"metadata is missing fields: {', '.join(missing)}")
    w = obj["weights"]
    if not isinstance(w, list) or not w or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in w):
        raise SchemaError("weights must be a non-empty array of numbers")
    return RiskModel(np.array(w, dtype=np.float64), obj["intercept"], obj["reg_l2"], meta)


def save_model(path, model: RiskModel) -> None:
    with _open_w(path) as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> RiskModel:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    return model_from_dict(obj)


def write_csv(path, header, rows) -> None:
    with _open_w(path) as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_cell(v) for v in row) + "\n")


def write_report(path, report) -> None:
    """Write an ``ExperimentSummary`` or ``ReplicationResult`` as CSV."""
    header, rows = report.report_rows()
    write_csv(path, header, rows)


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
