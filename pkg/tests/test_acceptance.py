"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Criterion 7 needs the real benchmark corpus and is skipped unless
TSFP_UCR_DIR and TSFP_RESULTS point at local copies.
"""

import math
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from tsfingerprint.dataio import TimeSeriesDataset, TimeSeriesInstance
from tsfingerprint.evaluate import emit_report, relative_change, run_pipeline
from tsfingerprint.fingerprint import dataset_fingerprint, fingerprint_corpus, instance_features
from tsfingerprint.regress import (
    model_to_json,
    predict,
    train_adaboost,
    train_gradient_boosting,
    train_knn,
    train_random_forest,
    train_ridge,
)
from tsfingerprint.synthetic import make_corpus
from tsfingerprint.targets import TargetStatistic, build_records

MEAN = TargetStatistic("mean")
STD = TargetStatistic("std")


@contextmanager
def criterion(number, label):
    try:
        yield
    except Exception:
        print(f"[criterion {number}] {label}: FAIL")
        raise
    print(f"[criterion {number}] {label}: PASS")


def random_dataset(rng, name):
    n_classes = int(rng.integers(1, 11))
    constant = rng.random() < 0.15
    train, test = [], []
    for c in range(n_classes):
        t = int(rng.choice([1, 2, 3, 17, 128]))
        for _ in range(int(rng.integers(2, 51))):
            values = np.full(t, float(rng.normal())) if constant else rng.normal(size=t)
            train.append(TimeSeriesInstance(values, f"c{c}"))
        test.append(TimeSeriesInstance(rng.normal(size=t), f"c{c}"))
    return TimeSeriesDataset(name, train, test)


def test_criterion_1_fingerprint_invariants(rng):
    with criterion(1, "fingerprint invariant suite, 200 datasets, < 10 s"):
        start = time.perf_counter()
        for i in range(200):
            ds = random_dataset(rng, f"d{i}")
            fp = dataset_fingerprint(ds).feature_vector
            assert fp.shape == (44,)
            assert np.isfinite(fp).all()

            perm = rng.permutation(len(ds.train_instances))
            shuffled = TimeSeriesDataset(
                ds.name, [ds.train_instances[j] for j in perm], ds.test_instances
            )
            assert np.array_equal(fp, dataset_fingerprint(shuffled).feature_vector)

            mapping = {c: f"x{9999 - k}" for k, c in enumerate(ds.classes)}
            relabeled = TimeSeriesDataset(
                ds.name,
                [TimeSeriesInstance(t.values, mapping[t.label]) for t in ds.train_instances],
                [TimeSeriesInstance(t.values, mapping[t.label]) for t in ds.test_instances],
            )
            assert np.array_equal(fp, dataset_fingerprint(relabeled).feature_vector)

            doubled = TimeSeriesDataset(
                ds.name, list(ds.train_instances) * 2, ds.test_instances
            )
            a = dataset_fingerprint(ds).as_dict()
            b = dataset_fingerprint(doubled).as_dict()
            doubling = {
                "meta.n_train",
                "meta.min_instances_per_class",
                "meta.max_instances_per_class",
                "meta.mean_instances_per_class",
                "meta.std_instances_per_class",
            }
            for key, value in a.items():
                assert b[key] == (2 * value if key in doubling else value), key
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_criterion_2_change_deviation_oracle(rng):
    with criterion(2, "change-deviation formula vs independent oracle, 1e-12"):
        # Worked case (1, 2, 4) passes exactly.
        assert instance_features(np.array([1.0, 2.0, 4.0]))[9] == math.sqrt(0.5)
        assert abs(instance_features(np.array([1.0, 2.0, 4.0]))[9] - 0.70711) < 5e-6

        def direct(x):
            t = len(x)
            if t < 3:
                return 0.0
            avg = (x[-1] - x[0]) / (t - 1)
            acc = 0.0
            for i in range(t - 1):
                acc += (x[i + 1] - x[i] - avg) ** 2
            return math.sqrt(acc / (t - 2))

        for _ in range(1000):
            t = int(rng.integers(1, 200))
            x = rng.normal(scale=rng.uniform(0.5, 20.0), size=t)
            got = instance_features(x)[9]
            assert abs(got - direct(list(x))) <= 1e-12


def test_criterion_3_regressor_oracles(rng):
    with criterion(3, "regressor oracles (ridge, knn, tree, boosting, determinism)"):
        for _ in range(100):  # ridge lam=0 vs normal-equations least squares
            n = int(rng.integers(3, 21))
            p = int(rng.integers(1, 6))
            X = rng.normal(size=(n, p))
            y = rng.normal(size=n)
            model = train_ridge(X, y, lam=0.0)
            z = model.standardizer.transform(X)
            design = np.column_stack([np.ones(n), z])
            coef, *_ = np.linalg.lstsq(design, y, rcond=None)
            assert np.abs(predict(model, X) - design @ coef).max() < 1e-8

        for _ in range(30):  # knn equals a brute-force scan exactly
            n = int(rng.integers(2, 20))
            p = int(rng.integers(1, 5))
            k = int(rng.integers(1, n + 1))
            X = rng.normal(size=(n, p))
            y = rng.normal(size=n)
            queries = rng.normal(size=(5, p))
            model = train_knn(X, y, k=k)
            zt = model.standardizer.transform(X)
            zq = model.standardizer.transform(queries)
            brute = np.array(
                [
                    y[np.argsort(np.sqrt(((zt - q) ** 2).sum(axis=1)), kind="stable")[:k]].mean()
                    for q in zq
                ]
            )
            assert np.array_equal(predict(model, queries), brute)

        for _ in range(10):  # single unlimited tree: training MAE 0 on distinct rows
            X = rng.normal(size=(15, 4))
            y = rng.normal(size=15)
            tree_model = train_random_forest(X, y, n_trees=1, bootstrap=False)
            assert np.abs(predict(tree_model, X) - y).max() == 0.0

        from tsfingerprint.cart import tree_predict

        for _ in range(5):  # gradient boosting: training MSE non-increasing
            X = rng.normal(size=(20, 4))
            y = rng.normal(size=20)
            gb = train_gradient_boosting(X, y, n_trees=30, learning_rate=0.3)
            z = gb.standardizer.transform(X)
            current = np.full(20, gb.state["init"])
            prev = float(np.mean((y - current) ** 2))
            for tree in gb.state["trees"]:
                current = current + 0.3 * tree_predict(tree, z)
                now = float(np.mean((y - current) ** 2))
                assert now <= prev + 1e-12
                prev = now

        X = rng.normal(size=(16, 5))  # bit-reproducibility under a fixed seed
        y = rng.normal(size=16)
        trainings = [
            lambda: train_ridge(X, y, lam=0.1),
            lambda: train_knn(X, y, k=3),
            lambda: train_random_forest(X, y, n_trees=20, seed=9),
            lambda: train_gradient_boosting(X, y, n_trees=20, seed=9),
            lambda: train_adaboost(X, y, n_estimators=20, seed=9),
        ]
        for train in trainings:
            assert model_to_json(train()) == model_to_json(train())


def test_criterion_4_baseline_equivalence(rng):
    with criterion(4, "constant-mean candidate reproduces the naive baseline exactly"):
        from tsfingerprint.dataio import FoldAccuracyTable

        for trial in range(3):
            names = [f"ds{i}" for i in range(int(rng.integers(10, 25)))]
            p = int(rng.integers(3, 50))
            fingerprints = {n: rng.normal(size=p) for n in names}
            entries = {
                (f"alg{a}", n): rng.uniform(0, 1, size=5)
                for a in range(int(rng.integers(1, 6)))
                for n in names
            }
            records = build_records(FoldAccuracyTable(entries=entries))
            report = run_pipeline(
                fingerprints,
                records,
                [MEAN, STD],
                seed=trial,
                grid=(("constant", {}),),
            )
            assert report.rows
            for row in report.rows:
                assert row.model_mae == row.baseline_mae
                assert row.relative_change_pct == 0.0


def test_criterion_5_synthetic_end_to_end():
    with criterion(5, "synthetic informative regime beats baseline by >= 20 % (mean target)"):
        start = time.perf_counter()
        datasets, table = make_corpus(
            n_datasets=60, n_algorithms=5, n_folds=10, seed=7, mean_noise=0.01
        )
        fingerprints, errors = fingerprint_corpus(datasets)
        assert not errors
        records = build_records(table)
        changes = []
        for seed in range(5):
            report = run_pipeline(fingerprints, records, [MEAN, STD], seed=seed)
            changes.extend(
                row.relative_change_pct for row in report.rows if row.statistic == "mean"
            )
        overall = float(np.mean(changes))
        elapsed = time.perf_counter() - start
        print(f"  mean relative change over {len(changes)} rows: {overall:.2f}% "
              f"({elapsed:.1f}s)")
        assert overall <= -20.0
        assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_criterion_6_published_table_arithmetic():
    with criterion(6, "published MAE pairs reproduce printed deltas within 0.10 pp"):
        assert abs(relative_change(0.1039, 0.1277) - (-18.61)) <= 0.10
        assert relative_change(0.1039, 0.1277) == pytest.approx(-18.64, abs=0.005)
        assert abs(relative_change(0.0069, 0.011) - (-37.31)) <= 0.10
        assert relative_change(0.0069, 0.011) == pytest.approx(-37.27, abs=0.005)


def test_criterion_7_real_benchmark_direction():
    ucr_dir = os.environ.get("TSFP_UCR_DIR")
    results = os.environ.get("TSFP_RESULTS")
    if not (ucr_dir and results and os.path.isdir(ucr_dir) and os.path.isfile(results)):
        print("[criterion 7] real benchmark direction check: SKIPPED (corpus not available; "
              "set TSFP_UCR_DIR and TSFP_RESULTS)")
        pytest.skip("UCR corpus and fold accuracies not available locally")
    with criterion(7, "real benchmark: negative mean delta% for both statistics"):
        from tsfingerprint.cli import _load_results, discover_dataset_pairs
        from tsfingerprint.dataio import parse_ts_dataset
        from pathlib import Path

        datasets = []
        for name, train_path, test_path in discover_dataset_pairs(Path(ucr_dir)):
            datasets.append(
                parse_ts_dataset(train_path.read_text(), test_path.read_text(), name)
            )
        fingerprints, errors = fingerprint_corpus(datasets)
        records, _ = _load_results(Path(results))
        report = run_pipeline(fingerprints, records, [MEAN, STD], seed=0)
        mu = report.summary["mean"]["relative_change_pct"]
        sigma = report.summary["std"]["relative_change_pct"]
        print(f"  mean delta {mu:.2f}% (band [-15, 0)), std delta {sigma:.2f}% "
              f"(band [-26, -6])")
        assert -15.0 <= mu < 0.0
        assert -26.0 <= sigma <= -6.0


def test_criterion_8_report_fidelity(rng):
    with criterion(8, "report columns and byte-identical reruns"):
        datasets, table = make_corpus(n_datasets=15, n_algorithms=3, n_folds=4, seed=2)
        fingerprints, _ = fingerprint_corpus(datasets)
        records = build_records(table)
        grid = (("ridge", {"lam": 0.1}), ("knn", {"k": 1}))

        def render():
            report = run_pipeline(fingerprints, records, [MEAN, STD], seed=3, grid=grid)
            return report, emit_report(report, "csv"), emit_report(report, "markdown")

        report, csv_a, md_a = render()
        _, csv_b, md_b = render()
        assert csv_a.encode() == csv_b.encode()
        assert md_a.encode() == md_b.encode()

        header = csv_a.splitlines()[0].split(",")
        assert header == [
            "h",
            "r(mean)", "baseline-MAE(mean)", "model-MAE(mean)", "delta%(mean)",
            "r(std)", "baseline-MAE(std)", "model-MAE(std)", "delta%(std)",
        ]
        assert csv_a.strip().splitlines()[-1].startswith("Mean,")
        assert len(csv_a.strip().splitlines()) == 1 + 3 + 1  # header + rows + Mean
