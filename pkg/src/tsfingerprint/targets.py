"""Regression targets derived from benchmark fold accuracies.

Each (algorithm, dataset) entry yields a mean accuracy, the fold-to-fold
standard deviation, and optionally lower percentiles. The naive baseline
for any target statistic is the algorithm's average of that statistic over
the training datasets -- the single-best-solver prediction that every
regressor has to beat.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .dataio import FoldAccuracyTable, ParseError, _parse_value, _read_csv_rows

__all__ = [
    "TargetStatistic",
    "PerformanceRecord",
    "NaiveBaseline",
    "fold_statistic",
    "build_records",
    "records_from_summary",
    "parse_summary_table",
    "naive_baseline",
    "records_to_csv",
]


@dataclass(frozen=True)
class TargetStatistic:
    """Which statistic of the fold accuracies a regressor predicts."""

    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind not in ("mean", "std", "percentile"):
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        if self.kind == "percentile":
            if self.p is None or not (0.0 < self.p < 100.0):
                raise ValueError("percentile statistic needs p in (0, 100)")
        elif self.p is not None:
            raise ValueError(f"p given for non-percentile statistic {self.kind!r}")

    @property
    def tag(self) -> str:
        if self.kind == "percentile":
            return f"p{self.p:g}"
        return self.kind

    @classmethod
    def parse(cls, tag: str) -> "TargetStatistic":
        tag = tag.strip()
        if tag in ("mean", "std"):
            return cls(kind=tag)
        if tag.startswith("p"):
            try:
                return cls(kind="percentile", p=float(tag[1:]))
            except ValueError:
                pass
        raise ValueError(f"cannot parse target statistic {tag!r}")


@dataclass(frozen=True)
class PerformanceRecord:
    """Fold accuracies of one algorithm on one dataset, with derived stats.

    Records built from pre-aggregated benchmark exports carry no fold vector
    (``folds is None``); they still provide mean and std but cannot answer
    percentile queries.
    """

    algorithm: str
    dataset: str
    folds: np.ndarray | None
    mean_acc: float
    std_acc: float | None

    @property
    def summary_only(self) -> bool:
        return self.folds is None

    def statistic(self, stat: TargetStatistic) -> float:
        """Value of `stat` for this record; raises if it is unavailable."""
        if stat.kind == "mean":
            return self.mean_acc
        if stat.kind == "std":
            if self.std_acc is None:
                raise ValueError(
                    f"({self.algorithm}, {self.dataset}): std unavailable (single fold)"
                )
            return self.std_acc
        if self.folds is None:
            raise ValueError(
                f"({self.algorithm}, {self.dataset}): percentile needs fold-level data"
            )
        return fold_statistic(self.folds, stat)


@dataclass(frozen=True)
class NaiveBaseline:
    """Constant prediction: the training-set average of one statistic."""

    algorithm: str
    statistic: TargetStatistic
    value: float


def fold_statistic(folds: np.ndarray, stat: TargetStatistic) -> float:
    """Mean, sample std, or linear-interpolation percentile of a fold vector."""
    folds = np.asarray(folds, dtype=float)
    if folds.size == 0:
        raise ValueError("empty fold vector")
    if stat.kind == "mean":
        return float(np.mean(folds))
    if stat.kind == "std":
        if folds.size < 2:
            raise ValueError("std needs at least 2 folds")
        return float(np.std(folds, ddof=1))
    return float(np.percentile(folds, stat.p))


def build_records(table: FoldAccuracyTable) -> list[PerformanceRecord]:
    """One record per (algorithm, dataset) entry, file-independent order."""
    records = []
    for (alg, ds) in sorted(table.entries):
        folds = table.entries[(alg, ds)]
        std = float(np.std(folds, ddof=1)) if folds.size >= 2 else None
        records.append(
            PerformanceRecord(
                algorithm=alg,
                dataset=ds,
                folds=folds,
                mean_acc=float(np.mean(folds)),
                std_acc=std,
            )
        )
    return records


def records_from_summary(rows: list[tuple[str, str, float, float]]) -> list[PerformanceRecord]:
    """Records from a pre-aggregated (algorithm, dataset, mean, std) export."""
    records = []
    for alg, ds, mean, std in rows:
        if not (0.0 <= mean <= 1.0):
            raise ValueError(f"({alg}, {ds}): mean accuracy {mean} outside [0, 1]")
        if std < 0:
            raise ValueError(f"({alg}, {ds}): negative std {std}")
        records.append(
            PerformanceRecord(
                algorithm=alg, dataset=ds, folds=None, mean_acc=float(mean), std_acc=float(std)
            )
        )
    seen = {(r.algorithm, r.dataset) for r in records}
    if len(seen) != len(records):
        raise ValueError("duplicate (algorithm, dataset) in summary rows")
    return records


def parse_summary_table(text: str, origin: str = "<results>") -> list[PerformanceRecord]:
    """Parse the pre-aggregated CSV schema: algorithm, dataset, mean, std."""
    rows = _read_csv_rows(text)
    if not rows:
        raise ParseError(f"{origin}: empty results table")
    header = [cell.strip().lower() for cell in rows[0]]
    if header != ["algorithm", "dataset", "mean", "std"]:
        raise ParseError(f"{origin}: unrecognized summary header {header}")
    parsed = []
    for lineno, row in enumerate(rows[1:], start=2):
        context = f"{origin}, line {lineno}"
        if len(row) != 4:
            raise ParseError(f"{context}: expected 4 columns")
        parsed.append(
            (
                row[0].strip(),
                row[1].strip(),
                _parse_value(row[2], context),
                _parse_value(row[3], context),
            )
        )
    try:
        return records_from_summary(parsed)
    except ValueError as exc:
        raise ParseError(f"{origin}: {exc}") from None


def naive_baseline(
    train_records: list[PerformanceRecord],
    algorithm: str,
    stat: TargetStatistic,
) -> NaiveBaseline:
    """Average `stat` of `algorithm` over the training datasets."""
    values = [r.statistic(stat) for r in train_records if r.algorithm == algorithm]
    if not values:
        raise ValueError(f"no training records for algorithm {algorithm!r}")
    return NaiveBaseline(
        algorithm=algorithm, statistic=stat, value=float(np.mean(np.array(values)))
    )


def records_to_csv(
    records: list[PerformanceRecord],
    percentiles: tuple[float, ...] = (),
) -> str:
    """Export records as CSV: algorithm, dataset, K, mean_acc, std_acc[, p...]."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["algorithm", "dataset", "k", "mean_acc", "std_acc"]
    header += [f"p{p:g}" for p in percentiles]
    writer.writerow(header)
    for r in records:
        row = [
            r.algorithm,
            r.dataset,
            0 if r.folds is None else r.folds.size,
            repr(r.mean_acc),
            "" if r.std_acc is None else repr(r.std_acc),
        ]
        for p in percentiles:
            stat = TargetStatistic(kind="percentile", p=p)
            row.append("" if r.folds is None else repr(r.statistic(stat)))
        writer.writerow(row)
    return out.getvalue()
