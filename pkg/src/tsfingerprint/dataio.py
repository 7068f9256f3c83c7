"""Dataset and benchmark-result ingestion plus deterministic corpus splits.

Two dataset file formats are understood:

* the UCR ``.ts`` format: header lines starting with ``@``, an ``@data``
  marker, then one instance per line as ``v1,v2,...,vT:label``;
* plain CSV: one instance per row, all columns numeric except the last,
  which is the class label.

Fold-accuracy tables come as CSV in long form
(``algorithm,dataset,fold_index,accuracy``) or wide form
(``algorithm,dataset,acc_0,...,acc_{K-1}``); the header decides.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeSeriesInstance",
    "TimeSeriesDataset",
    "FoldAccuracyTable",
    "SplitAssignment",
    "ParseError",
    "parse_instances",
    "parse_ts_dataset",
    "dataset_to_csv",
    "parse_fold_accuracies",
    "split_datasets",
]


class ParseError(ValueError):
    """Raised for malformed dataset or results documents."""


@dataclass(frozen=True)
class TimeSeriesInstance:
    """One univariate series with its class label."""

    values: np.ndarray
    label: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("instance needs at least one value")
        if not np.isfinite(self.values).all():
            raise ValueError("instance contains non-finite values")


@dataclass
class TimeSeriesDataset:
    """Named dataset with train/test instance splits."""

    name: str
    train_instances: list[TimeSeriesInstance]
    test_instances: list[TimeSeriesInstance]

    def __post_init__(self):
        if not self.train_instances:
            raise ValueError(f"dataset {self.name!r}: empty train split")
        train_labels = {inst.label for inst in self.train_instances}
        for inst in self.test_instances:
            if inst.label not in train_labels:
                raise ValueError(
                    f"dataset {self.name!r}: class {inst.label!r} has no training instance"
                )

    @property
    def classes(self) -> list[str]:
        """Distinct labels across both splits, lexicographically ordered."""
        labels = {inst.label for inst in self.train_instances}
        labels.update(inst.label for inst in self.test_instances)
        return sorted(labels)


@dataclass
class FoldAccuracyTable:
    """Per-(algorithm, dataset) cross-validation fold accuracies."""

    entries: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)

    @property
    def algorithms(self) -> list[str]:
        return sorted({alg for alg, _ in self.entries})

    @property
    def datasets(self) -> list[str]:
        return sorted({ds for _, ds in self.entries})


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint train/validation/test partition of dataset names."""

    train_names: tuple[str, ...]
    validation_names: tuple[str, ...]
    test_names: tuple[str, ...]
    seed: int
    ratios: tuple[float, float, float]

    def part_of(self, name: str) -> str:
        if name in self.train_names:
            return "train"
        if name in self.validation_names:
            return "validation"
        if name in self.test_names:
            return "test"
        raise KeyError(name)


def _parse_value(token: str, context: str) -> float:
    token = token.strip()
    if token == "" or token == "?":
        raise ParseError(f"{context}: missing value")
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"{context}: cannot parse {token!r} as a number") from None
    if not math.isfinite(value):
        raise ParseError(f"{context}: non-finite value {token!r}")
    return value


def _parse_ts_line(line: str, context: str) -> TimeSeriesInstance:
    if line.count(":") == 0:
        raise ParseError(f"{context}: expected 'values:label'")
    if line.count(":") > 1:
        raise ParseError(f"{context}: multivariate series are not supported")
    values_part, label = line.rsplit(":", 1)
    label = label.strip()
    if not label:
        raise ParseError(f"{context}: empty label")
    tokens = values_part.split(",")
    values = [_parse_value(tok, f"{context}, value {j + 1}") for j, tok in enumerate(tokens)]
    return TimeSeriesInstance(np.array(values), label)


def _parse_csv_line(row: list[str], context: str) -> TimeSeriesInstance:
    if len(row) < 2:
        raise ParseError(f"{context}: need at least one value and a label")
    label = row[-1].strip()
    if not label:
        raise ParseError(f"{context}: empty label")
    values = [_parse_value(tok, f"{context}, value {j + 1}") for j, tok in enumerate(row[:-1])]
    return TimeSeriesInstance(np.array(values), label)


def parse_instances(text: str, origin: str = "<input>") -> list[TimeSeriesInstance]:
    """Parse one split document, auto-detecting ``.ts`` versus CSV layout.

    A document is treated as ``.ts`` when it contains an ``@data`` header;
    instance errors report the 1-based line number within `origin`.
    """
    lines = text.splitlines()
    is_ts = any(line.strip().lower().startswith("@data") for line in lines)
    instances: list[TimeSeriesInstance] = []
    if is_ts:
        in_data = False
        for lineno, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if not in_data:
                if stripped.lower().startswith("@data"):
                    in_data = True
                elif not stripped.startswith(("@", "#")):
                    raise ParseError(f"{origin}, line {lineno}: unexpected content before @data")
                continue
            instances.append(_parse_ts_line(stripped, f"{origin}, line {lineno}"))
    else:
        reader = csv.reader(io.StringIO(text))
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            instances.append(_parse_csv_line(row, f"{origin}, line {lineno}"))
    return instances


def parse_ts_dataset(train_text: str, test_text: str, name: str) -> TimeSeriesDataset:
    """Build a dataset from the raw text of its train and test documents."""
    train = parse_instances(train_text, origin=f"{name} (train)")
    test = parse_instances(test_text, origin=f"{name} (test)")
    if not train:
        raise ParseError(f"dataset {name!r}: empty train split")
    return TimeSeriesDataset(name=name, train_instances=train, test_instances=test)


def dataset_to_csv(dataset: TimeSeriesDataset, split: str = "train") -> str:
    """Serialize one split back to CSV; floats keep full round-trip precision."""
    instances = dataset.train_instances if split == "train" else dataset.test_instances
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for inst in instances:
        writer.writerow([repr(v) for v in inst.values.tolist()] + [inst.label])
    return out.getvalue()


def _read_csv_rows(text: str) -> list[list[str]]:
    reader = csv.reader(io.StringIO(text))
    return [row for row in reader if row and any(cell.strip() for cell in row)]


def _check_accuracy(value: float, context: str) -> float:
    if not (0.0 <= value <= 1.0):
        raise ParseError(f"{context}: accuracy {value} outside [0, 1]")
    return value


def parse_fold_accuracies(text: str, origin: str = "<results>") -> FoldAccuracyTable:
    """Parse a fold-accuracy CSV table (long or wide form, by header).

    Long rows are grouped by (algorithm, dataset) in file order; fold_index
    must enumerate 0..K-1 exactly once per entry.
    """
    rows = _read_csv_rows(text)
    if not rows:
        raise ParseError(f"{origin}: empty results table")
    header = [cell.strip().lower() for cell in rows[0]]
    if header[:2] != ["algorithm", "dataset"]:
        raise ParseError(f"{origin}: header must start with 'algorithm,dataset'")

    table = FoldAccuracyTable()
    if header == ["algorithm", "dataset", "fold_index", "accuracy"]:
        folds: dict[tuple[str, str], list[tuple[int, float]]] = {}
        for lineno, row in enumerate(rows[1:], start=2):
            context = f"{origin}, line {lineno}"
            if len(row) != 4:
                raise ParseError(f"{context}: expected 4 columns")
            alg, ds = row[0].strip(), row[1].strip()
            try:
                fold_index = int(row[2])
            except ValueError:
                raise ParseError(f"{context}: bad fold_index {row[2]!r}") from None
            acc = _check_accuracy(_parse_value(row[3], context), context)
            seen = folds.setdefault((alg, ds), [])
            if any(idx == fold_index for idx, _ in seen):
                raise ParseError(f"{context}: duplicate fold {fold_index} for ({alg}, {ds})")
            seen.append((fold_index, acc))
        for key, pairs in folds.items():
            indices = sorted(idx for idx, _ in pairs)
            if indices != list(range(len(pairs))):
                raise ParseError(
                    f"{origin}: entry {key} has fold indices {indices}, expected 0..{len(pairs) - 1}"
                )
            table.entries[key] = np.array([acc for _, acc in pairs])
    elif len(header) >= 3 and all(h == f"acc_{j}" for j, h in enumerate(header[2:])):
        k = len(header) - 2
        for lineno, row in enumerate(rows[1:], start=2):
            context = f"{origin}, line {lineno}"
            if len(row) != k + 2:
                raise ParseError(f"{context}: expected {k + 2} columns, got {len(row)}")
            alg, ds = row[0].strip(), row[1].strip()
            if (alg, ds) in table.entries:
                raise ParseError(f"{context}: duplicate entry ({alg}, {ds})")
            accs = [
                _check_accuracy(_parse_value(tok, f"{context}, acc_{j}"), f"{context}, acc_{j}")
                for j, tok in enumerate(row[2:])
            ]
            table.entries[(alg, ds)] = np.array(accs)
    else:
        raise ParseError(f"{origin}: unrecognized results header {header}")
    return table


def _shuffled(names: list[str], seed: int) -> list[str]:
    # Fisher-Yates over the sorted names so the order of the input file
    # never leaks into the assignment.
    items = sorted(names)
    rng = np.random.default_rng(seed)
    for i in range(len(items) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        items[i], items[j] = items[j], items[i]
    return items


def split_datasets(
    names: list[str],
    seed: int = 0,
    ratios: tuple[float, float, float] = (0.2, 0.2, 0.6),
) -> SplitAssignment:
    """Deterministically partition dataset names into train/validation/test.

    Train and validation take round(ratio * N) names each (ties to even);
    test takes the remainder, so the three counts always sum to N.
    """
    if len(set(names)) != len(names):
        raise ValueError("dataset names must be distinct")
    if len(names) < 3:
        raise ValueError("need at least 3 datasets to populate three parts")
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError("ratios must be three positive numbers")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")

    n = len(names)
    n_train = round(ratios[0] * n)
    n_val = round(ratios[1] * n)
    shuffled = _shuffled(list(names), seed)
    return SplitAssignment(
        train_names=tuple(shuffled[:n_train]),
        validation_names=tuple(shuffled[n_train : n_train + n_val]),
        test_names=tuple(shuffled[n_train + n_val :]),
        seed=seed,
        ratios=tuple(float(r) for r in ratios),
    )
