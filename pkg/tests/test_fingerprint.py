import math

import numpy as np
import pytest

from tsfingerprint.dataio import TimeSeriesDataset, TimeSeriesInstance
from tsfingerprint.fingerprint import (
    INSTANCE_FEATURE_NAMES,
    FingerprintConfig,
    class_fingerprint,
    dataset_fingerprint,
    feature_names,
    fingerprint_corpus,
    instance_features,
    instance_fingerprint,
    read_fingerprints_csv,
    write_fingerprints_csv,
    write_fingerprints_json,
)
from conftest import make_dataset

IDX = {name: i for i, name in enumerate(INSTANCE_FEATURE_NAMES)}


def oracle_features(x):
    """Independent per-feature reference: plain loops, no shared code path."""
    x = [float(v) for v in x]
    t = len(x)
    mean = sum(x) / t
    out = {"mean": mean, "min": min(x), "max": max(x)}
    out["std"] = math.sqrt(sum((v - mean) ** 2 for v in x) / (t - 1)) if t >= 2 else 0.0

    def quantile(q):
        s = sorted(x)
        pos = q * (t - 1)
        lo = math.floor(pos)
        hi = min(lo + 1, t - 1)
        return s[lo] + (s[hi] - s[lo]) * (pos - lo)

    out["median"] = quantile(0.5)
    out["iqr"] = quantile(0.75) - quantile(0.25)
    m2 = sum((v - mean) ** 2 for v in x) / t
    m3 = sum((v - mean) ** 3 for v in x) / t
    m4 = sum((v - mean) ** 4 for v in x) / t
    out["skewness"] = m3 / m2**1.5 if m2 > 0 else 0.0
    out["kurtosis"] = m4 / m2**2 if m2 > 0 else 0.0
    if t >= 2:
        diffs = [x[i + 1] - x[i] for i in range(t - 1)]
        mc = (x[-1] - x[0]) / (t - 1)
        out["mean_change"] = mc
        out["change_deviation"] = (
            math.sqrt(sum((d - mc) ** 2 for d in diffs) / (t - 2)) if t >= 3 else 0.0
        )
        out["mean_abs_change"] = sum(abs(d) for d in diffs) / (t - 1)
        den = sum((v - mean) ** 2 for v in x)
        out["autocorr_lag1"] = (
            sum((x[i] - mean) * (x[i + 1] - mean) for i in range(t - 1)) / den if den > 0 else 0.0
        )
    else:
        out["mean_change"] = out["change_deviation"] = out["mean_abs_change"] = 0.0
        out["autocorr_lag1"] = 0.0
    return out


class TestInstanceFeatures:
    def test_change_deviation_worked_case(self):
        # (1, 2, 4): mean change 1.5, sqrt(((1-1.5)^2 + (2-1.5)^2) / 1)
        f = instance_features(np.array([1.0, 2.0, 4.0]))
        assert f[IDX["mean_change"]] == 1.5
        assert f[IDX["change_deviation"]] == math.sqrt(0.5)
        assert abs(f[IDX["change_deviation"]] - 0.70711) < 5e-6

    def test_skewness_worked_case(self):
        # (0,0,0,1): m2 = 0.1875, m3 = 0.09375 by direct moment computation
        f = instance_features(np.array([0.0, 0.0, 0.0, 1.0]))
        assert f[IDX["skewness"]] == pytest.approx(0.09375 / 0.1875**1.5, abs=1e-15)
        assert abs(f[IDX["skewness"]] - 1.15470) < 5e-6

    def test_constant_series_conventions(self):
        f = instance_features(np.full(4, 5.0))
        for name in ("std", "iqr", "skewness", "kurtosis", "mean_change",
                     "change_deviation", "mean_abs_change", "autocorr_lag1"):
            assert f[IDX[name]] == 0.0
        for name in ("mean", "min", "max", "median"):
            assert f[IDX[name]] == 5.0

    def test_length_one(self):
        f = instance_features(np.array([3.0]))
        assert f[IDX["mean_change"]] == 0.0
        assert f[IDX["change_deviation"]] == 0.0
        assert f[IDX["mean_abs_change"]] == 0.0
        assert f[IDX["std"]] == 0.0

    def test_length_two(self):
        f = instance_features(np.array([1.0, 4.0]))
        assert f[IDX["mean_change"]] == 3.0
        assert f[IDX["change_deviation"]] == 0.0
        assert f[IDX["mean_abs_change"]] == 3.0

    def test_against_oracle(self, rng):
        for _ in range(300):
            t = int(rng.choice([1, 2, 3, 4, 7, 20, 64]))
            x = rng.normal(scale=rng.uniform(0.1, 10), size=t)
            f = instance_features(x)
            expected = oracle_features(x)
            assert np.isfinite(f).all()
            for name, i in IDX.items():
                assert f[i] == pytest.approx(expected[name], rel=1e-10, abs=1e-12), name

    def test_wrapper_type(self):
        fp = instance_fingerprint(np.array([1.0, 2.0]))
        assert fp.features.shape == (12,)


class TestClassFingerprint:
    def test_mean_of_two(self):
        fps = [instance_fingerprint(np.zeros(3)), instance_fingerprint(np.full(3, 2.0))]
        fps[0].features[:] = 0.0
        fps[1].features[:] = 2.0
        cf = class_fingerprint(fps, "c", "mean")
        assert np.array_equal(cf.features, np.ones(12))

    def test_singleton(self):
        fp = instance_fingerprint(np.array([1.0, 5.0, 2.0]))
        for kind in ("mean", "median"):
            cf = class_fingerprint([fp], "c", kind)
            assert np.array_equal(cf.features, fp.features)

    def test_median(self):
        fps = []
        for first in (1.0, 2.0, 100.0):
            fp = instance_fingerprint(np.array([0.0, 1.0]))
            fp.features[0] = first
            fps.append(fp)
        cf = class_fingerprint(fps, "c", "median")
        assert cf.features[0] == 2.0

    def test_empty_class(self):
        with pytest.raises(ValueError, match="no instances"):
            class_fingerprint([], "c", "mean")


def two_class_dataset(values_a, values_b):
    train = [TimeSeriesInstance(np.asarray(values_a), "a"),
             TimeSeriesInstance(np.asarray(values_b), "b")]
    return TimeSeriesDataset("two", train, [])


class TestDatasetFingerprint:
    def test_length_and_names(self):
        ds = two_class_dataset([1.0, 2.0, 4.0], [0.0, 0.0, 0.0])
        fp = dataset_fingerprint(ds)
        assert fp.feature_vector.shape == (44,)
        assert fp.feature_names == feature_names()
        assert "std.skewness" in fp.feature_names
        assert "iqr.mean_change" in fp.feature_names
        assert "meta.n_train" in fp.feature_names

    def test_single_class_degeneracy(self):
        train = [TimeSeriesInstance(np.array([1.0, 2.0, 3.0]), "only") for _ in range(4)]
        ds = TimeSeriesDataset("one", train, [])
        fp = dataset_fingerprint(ds).as_dict()
        for name, value in fp.items():
            if name.startswith(("std.", "iqr.", "range.")):
                assert value == 0.0, name
        assert fp["meta.min_instances_per_class"] == 4.0
        assert fp["meta.max_instances_per_class"] == 4.0
        assert fp["meta.mean_instances_per_class"] == 4.0
        assert fp["meta.std_instances_per_class"] == 0.0

    def test_two_class_spread_oracle(self):
        # Two classes: range = |v - w|, population std = |v - w| / 2.
        ds = two_class_dataset([1.0, 2.0, 4.0], [0.0, 1.0, 0.0])
        v = instance_features(np.array([1.0, 2.0, 4.0]))
        w = instance_features(np.array([0.0, 1.0, 0.0]))
        fp = dataset_fingerprint(ds).as_dict()
        for j, feat in enumerate(INSTANCE_FEATURE_NAMES):
            assert fp[f"range.{feat}"] == pytest.approx(abs(v[j] - w[j]), abs=1e-15)
            assert fp[f"std.{feat}"] == pytest.approx(abs(v[j] - w[j]) / 2, abs=1e-15)

    def test_meta_block(self):
        ds = make_dataset(np.random.default_rng(3), "m", n_classes=3, per_class=5, length=11)
        fp = dataset_fingerprint(ds).as_dict()
        assert fp["meta.n_train"] == 15.0
        assert fp["meta.n_test"] == 3.0
        assert fp["meta.series_length"] == 11.0
        assert fp["meta.n_classes"] == 3.0

    def test_class_aggregation_config(self):
        ds = make_dataset(np.random.default_rng(4), "m", n_classes=2, per_class=5, length=9)
        mean_fp = dataset_fingerprint(ds, FingerprintConfig(class_aggregation="mean"))
        med_fp = dataset_fingerprint(ds, FingerprintConfig(class_aggregation="median"))
        assert not np.array_equal(mean_fp.feature_vector, med_fp.feature_vector)

    def test_aggregation_subset(self):
        ds = make_dataset(np.random.default_rng(5), "m")
        config = FingerprintConfig(dataset_aggregations=("range",))
        fp = dataset_fingerprint(ds, config)
        assert fp.feature_vector.shape == (20,)
        assert fp.feature_names[0] == "range.mean"


class TestInvariants:
    def test_fixed_size_and_finite(self, rng):
        for i in range(30):
            ds = make_dataset(rng, f"d{i}", constant=bool(i % 3 == 0))
            fp = dataset_fingerprint(ds)
            assert fp.feature_vector.shape == (44,)
            assert np.isfinite(fp.feature_vector).all()

    def test_instance_order_invariance(self, rng):
        for i in range(10):
            ds = make_dataset(rng, f"d{i}")
            fp = dataset_fingerprint(ds)
            perm = list(rng.permutation(len(ds.train_instances)))
            shuffled = TimeSeriesDataset(
                ds.name, [ds.train_instances[j] for j in perm], ds.test_instances
            )
            fp2 = dataset_fingerprint(shuffled)
            assert np.array_equal(fp.feature_vector, fp2.feature_vector)  # bit-identical

    def test_class_relabel_invariance(self, rng):
        for i in range(10):
            ds = make_dataset(rng, f"d{i}")
            mapping = {c: f"renamed_{len(ds.classes) - k}" for k, c in enumerate(ds.classes)}
            relabeled = TimeSeriesDataset(
                ds.name,
                [TimeSeriesInstance(inst.values, mapping[inst.label])
                 for inst in ds.train_instances],
                [TimeSeriesInstance(inst.values, mapping[inst.label])
                 for inst in ds.test_instances],
            )
            assert np.array_equal(
                dataset_fingerprint(ds).feature_vector,
                dataset_fingerprint(relabeled).feature_vector,
            )

    def test_duplication(self, rng):
        for i in range(10):
            ds = make_dataset(rng, f"d{i}")
            doubled = TimeSeriesDataset(
                ds.name, list(ds.train_instances) * 2, ds.test_instances
            )
            a = dataset_fingerprint(ds).as_dict()
            b = dataset_fingerprint(doubled).as_dict()
            for name, value in a.items():
                if name in ("meta.n_train", "meta.min_instances_per_class",
                            "meta.max_instances_per_class", "meta.mean_instances_per_class",
                            "meta.std_instances_per_class"):
                    assert b[name] == 2 * value, name
                else:
                    assert b[name] == value, name

    def test_privacy_surface(self):
        # The output type holds exactly the vector and its names.
        ds = two_class_dataset([1.0, 2.0, 4.0], [0.0, 1.0, 0.0])
        fp = dataset_fingerprint(ds)
        assert set(fp.__dataclass_fields__) == {"feature_vector", "feature_names"}
        assert fp.feature_vector.size == 44


class TestCorpus:
    def test_empty(self):
        result, errors = fingerprint_corpus([])
        assert result == {} and errors == []

    def test_identical_datasets_identical_vectors(self, rng):
        ds1 = make_dataset(np.random.default_rng(9), "first")
        ds2 = TimeSeriesDataset("second", ds1.train_instances, ds1.test_instances)
        result, errors = fingerprint_corpus([ds1, ds2])
        assert not errors
        assert np.array_equal(result["first"].feature_vector, result["second"].feature_vector)

    def test_shapes(self, rng):
        datasets = [make_dataset(rng, f"d{i}") for i in range(3)]
        result, errors = fingerprint_corpus(datasets)
        assert not errors and len(result) == 3
        assert all(fp.feature_vector.size == 44 for fp in result.values())

    def test_failure_isolation(self, rng):
        class Broken:
            name = "broken"
            train_instances = []
            classes = []

        good = make_dataset(rng, "good")
        result, errors = fingerprint_corpus([good, Broken()])
        assert "good" in result
        assert len(errors) == 1 and errors[0][0] == "broken"

    def test_duplicate_names_rejected(self, rng):
        ds = make_dataset(rng, "same")
        with pytest.raises(ValueError, match="unique"):
            fingerprint_corpus([ds, ds])


class TestExport:
    def test_csv_roundtrip(self, rng):
        datasets = [make_dataset(rng, f"d{i}") for i in range(3)]
        config = FingerprintConfig()
        fps, _ = fingerprint_corpus(datasets, config)
        text = write_fingerprints_csv(fps, config)
        rows, columns, config_hash = read_fingerprints_csv(text)
        assert config_hash == config.hash()
        assert columns == list(feature_names(config))
        for name, fp in fps.items():
            assert np.array_equal(rows[name], fp.feature_vector)

    def test_json_export(self, rng):
        import json

        fps, _ = fingerprint_corpus([make_dataset(rng, "d0")])
        doc = json.loads(write_fingerprints_json(fps))
        assert doc["config_hash"] == FingerprintConfig().hash()
        assert len(doc["datasets"]["d0"]) == 44

    def test_hash_changes_with_config(self):
        assert FingerprintConfig().hash() != FingerprintConfig(class_aggregation="median").hash()
