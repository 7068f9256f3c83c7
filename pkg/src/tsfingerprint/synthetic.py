"""Synthetic corpora with a known fingerprint-to-accuracy relationship.

Each generated dataset draws its shape parameters (class count, instances
per class, series length) at random; each synthetic "algorithm" scores a
mean accuracy that is a fixed smooth (linear) function of three fingerprint
coordinates -- total training instances, series length, and class count --
plus Gaussian noise. Fold accuracies scatter around that mean. In this
regime an informative regressor must clearly beat the constant baseline,
which is what the end-to-end checks and the demo scripts exercise.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataio import FoldAccuracyTable, TimeSeriesDataset, TimeSeriesInstance, dataset_to_csv

__all__ = ["make_corpus", "write_corpus_to_dir"]

# Parameter ranges; the accuracy function normalizes coordinates by these.
N_CLASSES_RANGE = (2, 5)
PER_CLASS_RANGE = (5, 20)
LENGTH_RANGE = (30, 150)

# Per-algorithm sensitivities to (n_train, series_length, n_classes).
_COEFFS = np.array(
    [
        [0.30, -0.10, 0.05],
        [-0.20, 0.25, -0.05],
        [0.10, 0.15, -0.20],
        [-0.25, -0.15, 0.15],
        [0.15, -0.25, -0.10],
        [0.05, 0.20, 0.20],
        [-0.15, 0.05, 0.25],
        [0.25, 0.10, -0.15],
    ]
)


def _make_dataset(name: str, rng: np.random.Generator) -> TimeSeriesDataset:
    n_classes = int(rng.integers(N_CLASSES_RANGE[0], N_CLASSES_RANGE[1] + 1))
    per_class = int(rng.integers(PER_CLASS_RANGE[0], PER_CLASS_RANGE[1] + 1))
    length = int(rng.integers(LENGTH_RANGE[0], LENGTH_RANGE[1] + 1))
    t = np.arange(length)

    def series(class_idx: int) -> np.ndarray:
        freq = 1.0 + class_idx + rng.normal(0.0, 0.1)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        scale = 0.5 + 0.5 * class_idx
        return scale * np.sin(2.0 * np.pi * freq * t / length + phase) + rng.normal(
            0.0, 0.2, size=length
        )

    train = [
        TimeSeriesInstance(series(c), f"c{c}")
        for c in range(n_classes)
        for _ in range(per_class)
    ]
    test = [TimeSeriesInstance(series(c), f"c{c}") for c in range(n_classes) for _ in range(3)]
    return TimeSeriesDataset(name=name, train_instances=train, test_instances=test)


def _true_mean_accuracy(dataset: TimeSeriesDataset, algorithm_idx: int) -> float:
    """Fixed smooth response in three fingerprint coordinates (noise-free)."""
    n_train = len(dataset.train_instances)
    length = dataset.train_instances[0].values.size
    n_classes = len(dataset.classes)

    lo_n = N_CLASSES_RANGE[0] * PER_CLASS_RANGE[0]
    hi_n = N_CLASSES_RANGE[1] * PER_CLASS_RANGE[1]
    u = (n_train - lo_n) / (hi_n - lo_n)
    v = (length - LENGTH_RANGE[0]) / (LENGTH_RANGE[1] - LENGTH_RANGE[0])
    w = (n_classes - N_CLASSES_RANGE[0]) / (N_CLASSES_RANGE[1] - N_CLASSES_RANGE[0])

    a, b, c = _COEFFS[algorithm_idx % len(_COEFFS)]
    return float(np.clip(0.55 + a * (u - 0.5) + b * (v - 0.5) + c * (w - 0.5), 0.05, 0.98))


def make_corpus(
    n_datasets: int = 60,
    n_algorithms: int = 5,
    n_folds: int = 10,
    seed: int = 7,
    mean_noise: float = 0.01,
    fold_noise: float = 0.01,
) -> tuple[list[TimeSeriesDataset], FoldAccuracyTable]:
    """Generate datasets plus a matching fold-accuracy table."""
    rng = np.random.default_rng(seed)
    datasets = [_make_dataset(f"synth{i:03d}", rng) for i in range(n_datasets)]
    table = FoldAccuracyTable()
    for j in range(n_algorithms):
        for dataset in datasets:
            mean_acc = _true_mean_accuracy(dataset, j) + rng.normal(0.0, mean_noise)
            folds = np.clip(mean_acc + rng.normal(0.0, fold_noise, size=n_folds), 0.0, 1.0)
            table.entries[(f"alg{j}", dataset.name)] = folds
    return datasets, table


def write_corpus_to_dir(
    datasets: list[TimeSeriesDataset],
    table: FoldAccuracyTable,
    directory: str | Path,
) -> Path:
    """Write CSV dataset pairs and a long-form results table under `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for dataset in datasets:
        (directory / f"{dataset.name}_TRAIN.csv").write_text(dataset_to_csv(dataset, "train"))
        (directory / f"{dataset.name}_TEST.csv").write_text(dataset_to_csv(dataset, "test"))
    lines = ["algorithm,dataset,fold_index,accuracy"]
    for (alg, ds) in sorted(table.entries):
        for k, acc in enumerate(table.entries[(alg, ds)].tolist()):
            lines.append(f"{alg},{ds},{k},{acc!r}")
    results = directory / "fold_accuracies.csv"
    results.write_text("\n".join(lines) + "\n")
    return results
