"""Pipeline orchestration, benchmark metrics, and report emission.

The pipeline trains all candidate regressors per (algorithm, target
statistic) on the training datasets' fingerprints, selects per pair on
validation MAE, and scores the winner against the naive constant baseline
on the test datasets. Reports mirror the usual benchmark table: per
algorithm the chosen regressor, baseline MAE, model MAE, and relative
change for each statistic, plus a final Mean row.
"""

from __future__ import annotations

import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataio import SplitAssignment, split_datasets
from .fingerprint import DatasetFingerprint, FingerprintConfig
from .regress import (
    DEFAULT_GRID,
    TrainedRegressor,
    clip_predictions,
    default_candidates,
    model_from_json,
    model_to_json,
    predict,
    select_regressor,
)
from .targets import PerformanceRecord, TargetStatistic, naive_baseline

__all__ = [
    "EvaluationRow",
    "EvaluationReport",
    "mae",
    "relative_change",
    "per_dataset_win",
    "run_pipeline",
    "predict_unseen",
    "emit_report",
    "report_to_json",
    "report_from_json",
    "save_models",
    "load_model_dir",
    "MANIFEST_NAME",
]

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA_VERSION = 1


def mae(predictions: np.ndarray, truths: np.ndarray) -> float:
    """Mean absolute error; lengths must match and be non-zero."""
    predictions = np.asarray(predictions, dtype=float).ravel()
    truths = np.asarray(truths, dtype=float).ravel()
    if predictions.size != truths.size:
        raise ValueError(f"length mismatch: {predictions.size} vs {truths.size}")
    if predictions.size == 0:
        raise ValueError("empty inputs")
    return float(np.mean(np.abs(predictions - truths)))


def relative_change(model_mae: float, baseline_mae: float) -> float:
    """Percent change of the model MAE versus the baseline; negative is better."""
    if baseline_mae <= 0:
        raise ValueError("baseline MAE must be positive")
    return 100.0 * (model_mae - baseline_mae) / baseline_mae


def per_dataset_win(pred: float, truth: float, baseline_value: float) -> bool:
    """Strict win: the prediction is closer to the truth than the baseline."""
    return abs(pred - truth) < abs(baseline_value - truth)


@dataclass(frozen=True)
class EvaluationRow:
    algorithm: str
    statistic: str
    chosen_regressor_kind: str
    baseline_mae: float
    model_mae: float
    relative_change_pct: float
    per_dataset_wins: int
    n_test: int

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "statistic": self.statistic,
            "chosen_regressor_kind": self.chosen_regressor_kind,
            "baseline_mae": self.baseline_mae,
            "model_mae": self.model_mae,
            "relative_change_pct": self.relative_change_pct,
            "per_dataset_wins": self.per_dataset_wins,
            "n_test": self.n_test,
        }


@dataclass
class EvaluationReport:
    rows: list[EvaluationRow]
    summary: dict[str, dict[str, float]]  # statistic tag -> column means
    split: SplitAssignment
    config: dict
    warnings: list[str] = field(default_factory=list)

    @property
    def statistics(self) -> list[str]:
        return list(self.config.get("statistics", []))


def _summarize(rows: list[EvaluationRow], tags: list[str]) -> dict[str, dict[str, float]]:
    summary = {}
    for tag in tags:
        tagged = [r for r in rows if r.statistic == tag]
        if not tagged:
            continue
        summary[tag] = {
            "baseline_mae": float(np.mean([r.baseline_mae for r in tagged])),
            "model_mae": float(np.mean([r.model_mae for r in tagged])),
            "relative_change_pct": float(np.mean([r.relative_change_pct for r in tagged])),
        }
    return summary


def _as_vector(fp) -> np.ndarray:
    if isinstance(fp, DatasetFingerprint):
        return fp.feature_vector
    return np.asarray(fp, dtype=float)


def run_pipeline(
    fingerprints: dict,
    records: list[PerformanceRecord],
    statistics: list[TargetStatistic],
    seed: int = 0,
    ratios: tuple[float, float, float] = (0.2, 0.2, 0.6),
    feature_names: list[str] | None = None,
    fingerprint_config: FingerprintConfig | None = None,
    grid=DEFAULT_GRID,
    model_dir: str | Path | None = None,
) -> EvaluationReport:
    """Split, train, select, and evaluate for every (algorithm, statistic).

    `fingerprints` maps dataset name to a DatasetFingerprint or raw vector.
    Algorithms without at least 2 covered training datasets plus 1
    validation and 1 test dataset for a statistic are skipped with a
    warning instead of aborting the run.
    """
    if not statistics:
        raise ValueError("no target statistics requested")
    vectors = {name: _as_vector(fp) for name, fp in fingerprints.items()}
    if feature_names is None:
        any_fp = next(iter(fingerprints.values()), None)
        if isinstance(any_fp, DatasetFingerprint):
            feature_names = list(any_fp.feature_names)
    split = split_datasets(sorted(vectors), seed=seed, ratios=ratios)

    by_algorithm: dict[str, dict[str, PerformanceRecord]] = {}
    for record in records:
        if record.dataset in vectors:
            by_algorithm.setdefault(record.algorithm, {})[record.dataset] = record

    rows: list[EvaluationRow] = []
    warnings: list[str] = []
    chosen_models: dict[tuple[str, str], TrainedRegressor] = {}

    for algorithm in sorted(by_algorithm):
        recs = by_algorithm[algorithm]
        for stat in statistics:
            parts: dict[str, tuple[list, list, list]] = {}
            for part, names in (
                ("train", split.train_names),
                ("validation", split.validation_names),
                ("test", split.test_names),
            ):
                xs, ys, part_records = [], [], []
                for name in names:
                    record = recs.get(name)
                    if record is None:
                        continue
                    try:
                        target = record.statistic(stat)
                    except ValueError:
                        continue
                    xs.append(vectors[name])
                    ys.append(target)
                    part_records.append(record)
                parts[part] = (xs, ys, part_records)
            n_train, n_val, n_test = (len(parts[p][0]) for p in ("train", "validation", "test"))
            if n_train < 2 or n_val < 1 or n_test < 1:
                warnings.append(
                    f"skipped ({algorithm}, {stat.tag}): coverage train={n_train} "
                    f"validation={n_val} test={n_test}"
                )
                continue

            X_train = np.stack(parts["train"][0])
            y_train = np.array(parts["train"][1])
            X_val = np.stack(parts["validation"][0])
            y_val = np.array(parts["validation"][1])
            X_test = np.stack(parts["test"][0])
            y_test = np.array(parts["test"][1])

            candidates = default_candidates(
                X_train, y_train, seed=seed, grid=grid, feature_names=feature_names
            )
            selection = select_regressor(
                candidates, X_val, y_val, algorithm=algorithm, statistic=stat.tag
            )

            baseline = naive_baseline(parts["train"][2], algorithm, stat)
            preds = predict(selection.chosen, X_test)
            model_err = mae(preds, y_test)
            baseline_err = mae(np.full(y_test.size, baseline.value), y_test)
            if baseline_err > 0:
                change = relative_change(model_err, baseline_err)
            else:
                change = 0.0 if model_err == 0.0 else math.inf
            wins = sum(
                per_dataset_win(float(p), float(t), baseline.value)
                for p, t in zip(preds, y_test)
            )

            rows.append(
                EvaluationRow(
                    algorithm=algorithm,
                    statistic=stat.tag,
                    chosen_regressor_kind=selection.chosen_kind,
                    baseline_mae=baseline_err,
                    model_mae=model_err,
                    relative_change_pct=change,
                    per_dataset_wins=int(wins),
                    n_test=int(y_test.size),
                )
            )
            chosen_models[(algorithm, stat.tag)] = selection.chosen

    tags = [s.tag for s in statistics]
    config = {
        "seed": int(seed),
        "ratios": [float(r) for r in ratios],
        "statistics": tags,
        "fingerprint_config": (fingerprint_config or FingerprintConfig()).to_dict(),
        "fingerprint_config_hash": (fingerprint_config or FingerprintConfig()).hash(),
    }
    report = EvaluationReport(
        rows=rows,
        summary=_summarize(rows, tags),
        split=split,
        config=config,
        warnings=warnings,
    )
    if model_dir is not None:
        save_models(chosen_models, Path(model_dir), report)
    return report


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)


def model_filename(algorithm: str, statistic: str) -> str:
    return f"{_safe_name(algorithm)}__{_safe_name(statistic)}.json"


def save_models(
    models: dict[tuple[str, str], TrainedRegressor],
    model_dir: Path,
    report: EvaluationReport,
) -> None:
    """Write one JSON per (algorithm, statistic) plus the manifest."""
    model_dir = Path(model_dir)
    model_dir.mkdir(parents=True, exist_ok=True)
    files: dict[str, dict[str, str]] = {}
    for (algorithm, tag) in sorted(models):
        fname = model_filename(algorithm, tag)
        (model_dir / fname).write_text(model_to_json(models[(algorithm, tag)]))
        files.setdefault(algorithm, {})[tag] = fname
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "fingerprint_config_hash": report.config["fingerprint_config_hash"],
        "split_seed": report.config["seed"],
        "statistics": report.config["statistics"],
        "models": files,
    }
    (model_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_model_dir(
    model_dir: str | Path,
) -> tuple[dict, dict[tuple[str, str], TrainedRegressor]]:
    """Load the manifest and every model it lists; missing files warn later."""
    model_dir = Path(model_dir)
    manifest_path = model_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {model_dir}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ValueError(f"unsupported manifest schema {manifest.get('schema_version')!r}")
    models: dict[tuple[str, str], TrainedRegressor] = {}
    for algorithm, by_tag in manifest.get("models", {}).items():
        for tag, fname in by_tag.items():
            path = model_dir / fname
            if path.exists():
                models[(algorithm, tag)] = model_from_json(path.read_text())
    return manifest, models


def predict_unseen(
    models: dict[tuple[str, str], TrainedRegressor],
    fingerprint_rows: dict[str, np.ndarray],
    feature_names: list[str] | None = None,
) -> list[dict]:
    """Per-algorithm predictions for each fingerprint row.

    Rows are ranked per dataset by clipped predicted mean (descending),
    ties by algorithm name. Only fingerprint vectors enter this function;
    there is no path for raw series data.
    """
    out: list[dict] = []
    algorithms = sorted({alg for alg, _ in models})
    tags: list[str] = []
    for _, tag in sorted(models):
        if tag not in tags:
            tags.append(tag)
    for ds_name in sorted(fingerprint_rows):
        vector = np.asarray(fingerprint_rows[ds_name], dtype=float)
        ds_rows = []
        for algorithm in algorithms:
            row: dict = {"dataset": ds_name, "algorithm": algorithm}
            for tag in tags:
                model = models.get((algorithm, tag))
                if model is None:
                    continue
                if feature_names is not None and model.feature_names is not None:
                    if list(feature_names) != list(model.feature_names):
                        missing = sorted(set(model.feature_names) - set(feature_names))
                        extra = sorted(set(feature_names) - set(model.feature_names))
                        raise ValueError(
                            f"fingerprint schema mismatch for ({algorithm}, {tag}): "
                            f"missing columns {missing}, unexpected columns {extra}"
                        )
                value = float(predict(model, vector[None, :])[0])
                kind = "std" if tag == "std" else "mean"
                row[f"pred_{tag}"] = value
                row[f"pred_{tag}_clipped"] = float(clip_predictions(np.array([value]), kind)[0])
            ds_rows.append(row)
        ds_rows.sort(key=lambda r: (-r.get("pred_mean_clipped", 0.0), r["algorithm"]))
        for rank, row in enumerate(ds_rows, start=1):
            row["rank"] = rank
        out.extend(ds_rows)
    return out


def _fmt_mae(x: float) -> str:
    return f"{x:.4f}"


def _fmt_pct(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.2f}"


def _report_cells(report: EvaluationReport) -> tuple[list[str], list[list[str]], list[str]]:
    tags = report.statistics or sorted({r.statistic for r in report.rows})
    header = ["h"]
    for tag in tags:
        header += [f"r({tag})", f"baseline-MAE({tag})", f"model-MAE({tag})", f"delta%({tag})"]

    by_key = {(r.algorithm, r.statistic): r for r in report.rows}
    algorithms = sorted({r.algorithm for r in report.rows})
    body = []
    for algorithm in algorithms:
        cells = [algorithm]
        for tag in tags:
            row = by_key.get((algorithm, tag))
            if row is None:
                cells += ["-", "-", "-", "-"]
            else:
                cells += [
                    row.chosen_regressor_kind,
                    _fmt_mae(row.baseline_mae),
                    _fmt_mae(row.model_mae),
                    _fmt_pct(row.relative_change_pct),
                ]
        body.append(cells)

    mean_cells = ["Mean"]
    for tag in tags:
        s = report.summary.get(tag)
        if s is None:
            mean_cells += ["-", "-", "-", "-"]
        else:
            mean_cells += [
                "-",
                _fmt_mae(s["baseline_mae"]),
                _fmt_mae(s["model_mae"]),
                _fmt_pct(s["relative_change_pct"]),
            ]
    return header, body, mean_cells


def emit_report(report: EvaluationReport, fmt: str = "markdown") -> str:
    """Render the evaluation table; markdown bolds improvements (negative delta%)."""
    header, body, mean_cells = _report_cells(report)
    if fmt == "csv":
        out = io.StringIO()
        out.write(",".join(header) + "\n")
        for cells in body + [mean_cells]:
            out.write(",".join(cells) + "\n")
        return out.getvalue()
    if fmt != "markdown":
        raise ValueError(f"unknown report format {fmt!r}")

    def decorate(cells: list[str]) -> list[str]:
        decorated = list(cells)
        for i, name in enumerate(header):
            if name.startswith("delta%") and decorated[i] not in ("-", "inf"):
                if float(decorated[i]) < 0:
                    decorated[i] = f"**{decorated[i]}**"
        return decorated

    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    for cells in body + [mean_cells]:
        lines.append("| " + " | ".join(decorate(cells)) + " |")
    return "\n".join(lines) + "\n"


def report_to_json(report: EvaluationReport) -> str:
    doc = {
        "rows": [r.to_dict() for r in report.rows],
        "summary": report.summary,
        "split": {
            "train_names": list(report.split.train_names),
            "validation_names": list(report.split.validation_names),
            "test_names": list(report.split.test_names),
            "seed": report.split.seed,
            "ratios": list(report.split.ratios),
        },
        "config": report.config,
        "warnings": report.warnings,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def report_from_json(text: str) -> EvaluationReport:
    doc = json.loads(text)
    rows = [EvaluationRow(**row) for row in doc["rows"]]
    split = SplitAssignment(
        train_names=tuple(doc["split"]["train_names"]),
        validation_names=tuple(doc["split"]["validation_names"]),
        test_names=tuple(doc["split"]["test_names"]),
        seed=doc["split"]["seed"],
        ratios=tuple(doc["split"]["ratios"]),
    )
    return EvaluationReport(
        rows=rows,
        summary=doc["summary"],
        split=split,
        config=doc["config"],
        warnings=doc.get("warnings", []),
    )
