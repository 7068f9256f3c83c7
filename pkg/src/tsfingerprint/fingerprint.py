"""Three-level data fingerprints for time-series classification datasets.

Every series is condensed into 12 instance statistics, instance statistics
are aggregated per class (mean or median over the training split), and the
class vectors are aggregated across classes (std, IQR, range) and extended
with 8 dataset shape counts. The result is one 44-entry vector per dataset,
independent of series length, instance count, and class count. Only this
vector ever needs to leave the data owner's side.

Aggregations over instances and classes go through ``math.fsum`` (exact
accumulation), so permuting instances or relabeling classes reproduces the
fingerprint bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .dataio import TimeSeriesDataset

__all__ = [
    "INSTANCE_FEATURE_NAMES",
    "META_FEATURE_NAMES",
    "FingerprintConfig",
    "InstanceFingerprint",
    "ClassFingerprint",
    "DatasetFingerprint",
    "instance_features",
    "instance_features_matrix",
    "instance_fingerprint",
    "class_fingerprint",
    "dataset_fingerprint",
    "fingerprint_corpus",
    "feature_names",
    "write_fingerprints_csv",
    "read_fingerprints_csv",
    "write_fingerprints_json",
]

INSTANCE_FEATURE_NAMES = (
    "mean",
    "std",
    "min",
    "max",
    "median",
    "iqr",
    "skewness",
    "kurtosis",
    "mean_change",
    "change_deviation",
    "mean_abs_change",
    "autocorr_lag1",
)

META_FEATURE_NAMES = (
    "meta.n_train",
    "meta.n_test",
    "meta.series_length",
    "meta.n_classes",
    "meta.min_instances_per_class",
    "meta.max_instances_per_class",
    "meta.mean_instances_per_class",
    "meta.std_instances_per_class",
)

DATASET_AGGREGATIONS = ("std", "iqr", "range")
CLASS_AGGREGATIONS = ("mean", "median")


@dataclass(frozen=True)
class FingerprintConfig:
    """Aggregation choices; the default reproduces the standard 44-entry vector."""

    class_aggregation: str = "mean"
    dataset_aggregations: tuple[str, ...] = DATASET_AGGREGATIONS

    def __post_init__(self):
        if self.class_aggregation not in CLASS_AGGREGATIONS:
            raise ValueError(f"unknown class aggregation {self.class_aggregation!r}")
        object.__setattr__(self, "dataset_aggregations", tuple(self.dataset_aggregations))
        if not self.dataset_aggregations:
            raise ValueError("at least one dataset aggregation required")
        for agg in self.dataset_aggregations:
            if agg not in DATASET_AGGREGATIONS:
                raise ValueError(f"unknown dataset aggregation {agg!r}")
        if len(set(self.dataset_aggregations)) != len(self.dataset_aggregations):
            raise ValueError("duplicate dataset aggregation")

    def to_dict(self) -> dict:
        return {
            "class_aggregation": self.class_aggregation,
            "dataset_aggregations": list(self.dataset_aggregations),
            "instance_features": list(INSTANCE_FEATURE_NAMES),
        }

    def hash(self) -> str:
        """Stable digest used to detect config drift between artifacts."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "FingerprintConfig":
        return cls(
            class_aggregation=d.get("class_aggregation", "mean"),
            dataset_aggregations=tuple(d.get("dataset_aggregations", DATASET_AGGREGATIONS)),
        )


@dataclass(frozen=True)
class InstanceFingerprint:
    features: np.ndarray


@dataclass(frozen=True)
class ClassFingerprint:
    class_label: str
    features: np.ndarray
    aggregation_kind: str


@dataclass(frozen=True)
class DatasetFingerprint:
    feature_vector: np.ndarray
    feature_names: tuple[str, ...]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.feature_names, self.feature_vector.tolist()))


def feature_names(config: FingerprintConfig | None = None) -> tuple[str, ...]:
    """Column names of the dataset fingerprint, aligned with its values."""
    config = config or FingerprintConfig()
    names = [
        f"{agg}.{feat}" for agg in config.dataset_aggregations for feat in INSTANCE_FEATURE_NAMES
    ]
    names.extend(META_FEATURE_NAMES)
    return tuple(names)


def _quantile(sorted_rows: np.ndarray, q: float) -> np.ndarray:
    """Linear-interpolation quantile of pre-sorted rows (axis 1).

    The single quantile convention used everywhere: position q*(T-1) between
    order statistics, interpolated as lo + (hi - lo) * frac.
    """
    t = sorted_rows.shape[1]
    pos = q * (t - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, t - 1)
    frac = pos - lo
    low = sorted_rows[:, lo]
    return low + (sorted_rows[:, hi] - low) * frac


def instance_features_matrix(series: np.ndarray) -> np.ndarray:
    """The 12 statistics for a batch of equal-length series (one per row).

    Degenerate series stay finite: length-1 series and zero-variance series
    map the undefined entries (std, shape moments, change statistics,
    autocorrelation) to 0.
    """
    x = np.atleast_2d(np.asarray(series, dtype=float))
    n, t = x.shape
    out = np.zeros((n, len(INSTANCE_FEATURE_NAMES)))

    mean = np.mean(x, axis=1)
    out[:, 0] = mean
    if t >= 2:
        out[:, 1] = np.std(x, axis=1, ddof=1)
    xs = np.sort(x, axis=1)
    out[:, 2] = xs[:, 0]
    out[:, 3] = xs[:, -1]
    out[:, 4] = _quantile(xs, 0.5)
    out[:, 5] = _quantile(xs, 0.75) - _quantile(xs, 0.25)

    d = x - mean[:, None]
    d2 = d * d
    m2 = np.mean(d2, axis=1)
    ok = m2 > 0.0
    if ok.any():
        m3 = np.mean(d2 * d, axis=1)
        m4 = np.mean(d2 * d2, axis=1)
        out[ok, 6] = m3[ok] / m2[ok] ** 1.5
        out[ok, 7] = m4[ok] / m2[ok] ** 2

    if t >= 2:
        diff = x[:, 1:] - x[:, :-1]
        mean_change = (x[:, -1] - x[:, 0]) / (t - 1)
        out[:, 8] = mean_change
        if t >= 3:
            dev = diff - mean_change[:, None]
            out[:, 9] = np.sqrt(np.sum(dev * dev, axis=1) / (t - 2))
        out[:, 10] = np.mean(np.abs(diff), axis=1)
        denom = np.sum(d2, axis=1)
        pos = denom > 0.0
        out[pos, 11] = np.sum(d[pos, :-1] * d[pos, 1:], axis=1) / denom[pos]

    # Fingerprints feed regressors; never let an entry escape as NaN/Inf.
    out[~np.isfinite(out)] = 0.0
    return out


def instance_features(values: np.ndarray) -> np.ndarray:
    """The 12 per-series statistics, in catalog order."""
    return instance_features_matrix(np.asarray(values, dtype=float)[None, :])[0]


def instance_fingerprint(values: np.ndarray) -> InstanceFingerprint:
    return InstanceFingerprint(features=instance_features(values))


def _fsum_mean(column) -> float:
    return math.fsum(column) / len(column)


def _fsum_pop_std(column) -> float:
    m = _fsum_mean(column)
    return math.sqrt(math.fsum((v - m) ** 2 for v in column) / len(column))


def _aggregate_rows(rows: np.ndarray, kind: str) -> np.ndarray:
    if kind == "mean":
        return np.array([_fsum_mean(rows[:, j]) for j in range(rows.shape[1])])
    return np.median(rows, axis=0)


def class_fingerprint(
    instance_fps: list[InstanceFingerprint],
    class_label: str,
    aggregation_kind: str = "mean",
) -> ClassFingerprint:
    """Coordinate-wise mean or median over one class's instance fingerprints."""
    if not instance_fps:
        raise ValueError(f"class {class_label!r} has no instances")
    if aggregation_kind not in CLASS_AGGREGATIONS:
        raise ValueError(f"unknown class aggregation {aggregation_kind!r}")
    rows = np.stack([fp.features for fp in instance_fps])
    return ClassFingerprint(
        class_label=class_label,
        features=_aggregate_rows(rows, aggregation_kind),
        aggregation_kind=aggregation_kind,
    )


def dataset_fingerprint(
    dataset: TimeSeriesDataset,
    config: FingerprintConfig | None = None,
) -> DatasetFingerprint:
    """Aggregate a dataset into its fixed-length fingerprint vector.

    Class fingerprints are computed from training instances only; the test
    split contributes nothing but its instance count.
    """
    config = config or FingerprintConfig()

    train = dataset.train_instances
    lengths = np.array([inst.values.size for inst in train])
    labels = [inst.label for inst in train]
    for label in dataset.classes:
        if label not in labels:
            raise ValueError(f"dataset {dataset.name!r}: class {label!r} has no training instance")

    # One batched kernel call per distinct series length.
    feats = np.empty((len(train), len(INSTANCE_FEATURE_NAMES)))
    for t in np.unique(lengths):
        idx = np.flatnonzero(lengths == t)
        feats[idx] = instance_features_matrix(np.stack([train[i].values for i in idx]))

    by_class: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        by_class.setdefault(label, []).append(i)
    class_rows = np.stack(
        [_aggregate_rows(feats[by_class[label]], config.class_aggregation)
         for label in sorted(by_class)]
    )

    sorted_cols = np.sort(class_rows, axis=0).T  # rows = features for _quantile
    blocks = []
    for agg in config.dataset_aggregations:
        if agg == "std":
            # Population form: divide by the class count.
            block = np.array(
                [_fsum_pop_std(class_rows[:, j]) for j in range(class_rows.shape[1])]
            )
        elif agg == "iqr":
            block = _quantile(sorted_cols, 0.75) - _quantile(sorted_cols, 0.25)
        else:
            block = np.max(class_rows, axis=0) - np.min(class_rows, axis=0)
        blocks.append(block)

    counts = sorted(float(len(by_class[label])) for label in by_class)
    meta = np.array(
        [
            float(len(dataset.train_instances)),
            float(len(dataset.test_instances)),
            float(_quantile(np.sort(lengths.astype(float))[None, :], 0.5)[0]),
            float(len(by_class)),
            counts[0],
            counts[-1],
            _fsum_mean(counts),
            _fsum_pop_std(counts),
        ]
    )

    vector = np.concatenate(blocks + [meta])
    return DatasetFingerprint(feature_vector=vector, feature_names=feature_names(config))


def fingerprint_corpus(
    datasets: list[TimeSeriesDataset],
    config: FingerprintConfig | None = None,
) -> tuple[dict[str, DatasetFingerprint], list[tuple[str, str]]]:
    """Fingerprint every dataset; failures are collected, not raised.

    Returns the name -> fingerprint map plus a list of (name, error message)
    pairs for datasets that could not be processed.
    """
    names = [d.name for d in datasets]
    if len(set(names)) != len(names):
        raise ValueError("dataset names must be unique")
    result: dict[str, DatasetFingerprint] = {}
    errors: list[tuple[str, str]] = []
    for dataset in datasets:
        try:
            result[dataset.name] = dataset_fingerprint(dataset, config)
        except Exception as exc:  # noqa: BLE001 - per-dataset isolation
            errors.append((dataset.name, str(exc)))
    return result, errors


_HASH_PREFIX = "# fingerprint_config_hash="


def write_fingerprints_csv(
    fingerprints: dict[str, DatasetFingerprint],
    config: FingerprintConfig | None = None,
) -> str:
    """Render fingerprints as CSV with a config-hash comment line.

    This file is the only artifact a data owner has to share.
    """
    config = config or FingerprintConfig()
    names = feature_names(config)
    out = io.StringIO()
    out.write(f"{_HASH_PREFIX}{config.hash()}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["name", *names])
    for ds_name in sorted(fingerprints):
        fp = fingerprints[ds_name]
        if fp.feature_names != names:
            raise ValueError(f"fingerprint {ds_name!r} does not match the config schema")
        writer.writerow([ds_name] + [repr(v) for v in fp.feature_vector.tolist()])
    return out.getvalue()


def read_fingerprints_csv(text: str) -> tuple[dict[str, np.ndarray], list[str], str | None]:
    """Parse a fingerprint CSV; returns (rows, feature names, config hash or None)."""
    config_hash = None
    lines = []
    for line in text.splitlines():
        if line.startswith(_HASH_PREFIX):
            config_hash = line[len(_HASH_PREFIX) :].strip()
        elif line.strip() and not line.startswith("#"):
            lines.append(line)
    if not lines:
        raise ValueError("fingerprint file has no header")
    reader = csv.reader(lines)
    header = next(reader)
    if not header or header[0] != "name":
        raise ValueError("fingerprint header must start with 'name'")
    columns = header[1:]
    rows: dict[str, np.ndarray] = {}
    for row in reader:
        if len(row) != len(header):
            raise ValueError(f"fingerprint row for {row[0]!r} has {len(row)} fields")
        values = np.array([float(tok) for tok in row[1:]])
        if not np.isfinite(values).all():
            raise ValueError(f"fingerprint row for {row[0]!r} has non-finite entries")
        rows[row[0]] = values
    return rows, columns, config_hash


def write_fingerprints_json(
    fingerprints: dict[str, DatasetFingerprint],
    config: FingerprintConfig | None = None,
) -> str:
    config = config or FingerprintConfig()
    doc = {
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "feature_names": list(feature_names(config)),
        "datasets": {
            name: fingerprints[name].feature_vector.tolist() for name in sorted(fingerprints)
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)
