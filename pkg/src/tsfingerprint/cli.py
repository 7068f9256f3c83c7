"""Command-line interface.

Subcommands: ``fingerprint`` (extract fingerprints from a dataset
directory), ``ingest-results`` (validate a results table), ``evaluate``
(full pipeline run), ``predict`` (apply stored models to new fingerprints),
and ``report`` (re-emit a stored evaluation report).

Exit codes: 0 success, 1 fatal error, 2 partial success.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluate as ev
from .dataio import ParseError, parse_fold_accuracies, parse_ts_dataset
from .fingerprint import (
    FingerprintConfig,
    fingerprint_corpus,
    read_fingerprints_csv,
    write_fingerprints_csv,
    write_fingerprints_json,
)
from .targets import TargetStatistic, build_records, parse_summary_table

OUT_DIR_ENV = "TSFP_OUT_DIR"

OK, FATAL, PARTIAL = 0, 1, 2


def _eprint(*args):
    print(*args, file=sys.stderr)


def discover_dataset_pairs(directory: Path) -> list[tuple[str, Path, Path]]:
    """Find (name, train_file, test_file) pairs under a directory.

    Recognizes the UCR layout ``<dir>/<Name>/<Name>_TRAIN.ts`` as well as
    flat ``<Name>_TRAIN.csv`` / ``<Name>_TEST.csv`` pairs.
    """
    pairs = []
    for train_path in sorted(directory.rglob("*_TRAIN.*")):
        if train_path.suffix.lower() not in (".ts", ".csv", ".txt"):
            continue
        name = train_path.name[: -len("_TRAIN" + train_path.suffix)]
        test_path = train_path.with_name(f"{name}_TEST{train_path.suffix}")
        if test_path.exists():
            pairs.append((name, train_path, test_path))
    return pairs


def _parse_stats(text: str) -> list[TargetStatistic]:
    return [TargetStatistic.parse(tok) for tok in text.split(",") if tok.strip()]


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(tok) for tok in text.split(",")]
    if len(parts) != 3:
        raise ValueError("ratios need exactly three comma-separated numbers")
    return tuple(parts)  # type: ignore[return-value]


def _fingerprint_config(class_agg: str, dataset_aggs: str) -> FingerprintConfig:
    aggs = tuple(tok.strip() for tok in dataset_aggs.split(",") if tok.strip())
    return FingerprintConfig(class_aggregation=class_agg, dataset_aggregations=aggs)


def cmd_fingerprint(args) -> int:
    directory = Path(args.dataset_dir)
    if not directory.is_dir():
        _eprint(f"error: {directory} is not a readable directory")
        return FATAL
    try:
        config = _fingerprint_config(args.class_agg, args.dataset_aggs)
    except ValueError as exc:
        _eprint(f"error: {exc}")
        return FATAL

    pairs = discover_dataset_pairs(directory)
    datasets = []
    errors: list[tuple[str, str]] = []
    for name, train_path, test_path in pairs:
        try:
            datasets.append(
                parse_ts_dataset(train_path.read_text(), test_path.read_text(), name)
            )
        except (ParseError, ValueError) as exc:
            errors.append((name, str(exc)))

    fingerprints, fp_errors = fingerprint_corpus(datasets, config)
    errors.extend(fp_errors)

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(write_fingerprints_csv(fingerprints, config))
    if args.json:
        Path(args.json).write_text(write_fingerprints_json(fingerprints, config))
    print(f"wrote {len(fingerprints)} fingerprints to {out_path}")

    if errors:
        log_path = out_path.with_suffix(out_path.suffix + ".errors.log")
        log_path.write_text("".join(f"{name}: {msg}\n" for name, msg in errors))
        for name, msg in errors:
            _eprint(f"error: {name}: {msg}")
        _eprint(f"{len(errors)} dataset(s) failed; details in {log_path}")
        return PARTIAL
    if not fingerprints:
        _eprint("warning: no datasets found")
        return PARTIAL
    return OK


def _load_results(path: Path):
    """Return (records, kind) where kind is 'folds' or 'summary'."""
    text = path.read_text()
    header: list[str] = []
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            header = [cell.strip().lower() for cell in line.split(",")]
            break
    if header == ["algorithm", "dataset", "mean", "std"]:
        return parse_summary_table(text, origin=str(path)), "summary"
    table = parse_fold_accuracies(text, origin=str(path))
    return build_records(table), "folds"


def cmd_ingest_results(args) -> int:
    path = Path(args.results)
    if not path.exists():
        _eprint(f"error: results file not found: {path}")
        return FATAL
    try:
        records, kind = _load_results(path)
    except ParseError as exc:
        _eprint(f"error: {exc}")
        return FATAL
    algorithms = sorted({r.algorithm for r in records})
    datasets = sorted({r.dataset for r in records})
    ks = sorted({0 if r.folds is None else r.folds.size for r in records})
    print(f"{path}: valid {kind} table")
    print(f"  algorithms: {len(algorithms)}")
    print(f"  datasets:   {len(datasets)}")
    print(f"  entries:    {len(records)}")
    print(f"  folds:      {ks[0]}..{ks[-1]}" if kind == "folds" else "  folds:      (summary only)")
    return OK


_CONFIG_FIELDS = {
    "version": int,
    "datasets_dir": str,
    "fingerprints": str,
    "results": str,
    "output_dir": str,
    "model_dir": str,
    "seed": int,
    "ratios": list,
    "statistics": list,
    "class_aggregation": str,
    "dataset_aggregations": list,
    "report_formats": list,
}


def _load_config_file(path: Path) -> dict:
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    problems = []
    if raw.get("version") != 1:
        problems.append("version: must be 1")
    for key, value in raw.items():
        if key not in _CONFIG_FIELDS:
            problems.append(f"{key}: unknown field")
        elif not isinstance(value, _CONFIG_FIELDS[key]):
            problems.append(f"{key}: expected {_CONFIG_FIELDS[key].__name__}")
    if problems:
        raise ValueError(f"{path}: invalid config:\n  " + "\n  ".join(problems))
    return raw


def cmd_evaluate(args) -> int:
    config: dict = {}
    if args.config:
        try:
            config = _load_config_file(Path(args.config))
        except ValueError as exc:
            _eprint(f"error: {exc}")
            return FATAL

    # Command-line flags win over config-file values.
    if args.datasets:
        config["datasets_dir"] = args.datasets
        config.pop("fingerprints", None)
    if args.fingerprints:
        config["fingerprints"] = args.fingerprints
        config.pop("datasets_dir", None)
    if args.results:
        config["results"] = args.results
    if args.out:
        config["output_dir"] = args.out
    if args.models:
        config["model_dir"] = args.models
    if args.seed is not None:
        config["seed"] = args.seed
    if args.ratios:
        config["ratios"] = list(_parse_ratios(args.ratios))
    if args.stats:
        config["statistics"] = [s.strip() for s in args.stats.split(",") if s.strip()]

    output_dir = config.get("output_dir") or os.environ.get(OUT_DIR_ENV)
    problems = []
    if not config.get("results"):
        problems.append("results: required (CSV of fold accuracies or summaries)")
    if not config.get("datasets_dir") and not config.get("fingerprints"):
        problems.append("datasets_dir or fingerprints: one of the two is required")
    if not output_dir:
        problems.append(f"output_dir: required (flag, config, or ${OUT_DIR_ENV})")
    try:
        stats = [TargetStatistic.parse(t) for t in config.get("statistics", ["mean", "std"])]
        if not stats:
            problems.append("statistics: must not be empty")
    except ValueError as exc:
        problems.append(f"statistics: {exc}")
        stats = []
    try:
        fp_config = FingerprintConfig(
            class_aggregation=config.get("class_aggregation", "mean"),
            dataset_aggregations=tuple(
                config.get("dataset_aggregations", ("std", "iqr", "range"))
            ),
        )
    except ValueError as exc:
        problems.append(f"fingerprint config: {exc}")
        fp_config = None
    if problems:
        _eprint("error: invalid configuration:")
        for p in problems:
            _eprint(f"  {p}")
        return FATAL

    results_path = Path(config["results"])
    if not results_path.exists():
        _eprint(f"error: results file not found: {results_path}")
        return FATAL

    partial = False
    if config.get("fingerprints"):
        fp_path = Path(config["fingerprints"])
        if not fp_path.exists():
            _eprint(f"error: fingerprint file not found: {fp_path}")
            return FATAL
        rows, names, file_hash = read_fingerprints_csv(fp_path.read_text())
        if file_hash is not None and file_hash != fp_config.hash():
            _eprint(
                "error: fingerprint file was produced under a different fingerprint "
                f"config (hash {file_hash} != {fp_config.hash()})"
            )
            return FATAL
        fingerprints = {name: np.asarray(vec) for name, vec in rows.items()}
        feature_names = list(names)
    else:
        dataset_dir = Path(config["datasets_dir"])
        if not dataset_dir.is_dir():
            _eprint(f"error: {dataset_dir} is not a readable directory")
            return FATAL
        datasets = []
        for name, train_path, test_path in discover_dataset_pairs(dataset_dir):
            try:
                datasets.append(
                    parse_ts_dataset(train_path.read_text(), test_path.read_text(), name)
                )
            except (ParseError, ValueError) as exc:
                _eprint(f"warning: skipping dataset {name}: {exc}")
                partial = True
        fp_map, fp_errors = fingerprint_corpus(datasets, fp_config)
        for name, msg in fp_errors:
            _eprint(f"warning: skipping dataset {name}: {msg}")
            partial = True
        fingerprints = {name: fp.feature_vector for name, fp in fp_map.items()}
        feature_names = list(next(iter(fp_map.values())).feature_names) if fp_map else []

    if len(fingerprints) < 3:
        _eprint(f"error: need at least 3 fingerprinted datasets, have {len(fingerprints)}")
        return FATAL

    try:
        records, _ = _load_results(results_path)
    except ParseError as exc:
        _eprint(f"error: {exc}")
        return FATAL

    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_dir = Path(config.get("model_dir") or out_dir / "models")
    report = ev.run_pipeline(
        fingerprints,
        records,
        stats,
        seed=int(config.get("seed", 0)),
        ratios=tuple(config.get("ratios", (0.2, 0.2, 0.6))),
        feature_names=feature_names,
        fingerprint_config=fp_config,
        model_dir=model_dir,
    )

    formats = config.get("report_formats", ["csv", "markdown"])
    if "csv" in formats:
        (out_dir / "report.csv").write_text(ev.emit_report(report, "csv"))
    if "markdown" in formats:
        (out_dir / "report.md").write_text(ev.emit_report(report, "markdown"))
    (out_dir / "report.json").write_text(ev.report_to_json(report))

    for warning in report.warnings:
        _eprint(f"warning: {warning}")
        partial = True
    for tag, s in report.summary.items():
        print(
            f"[{tag}] baseline MAE {s['baseline_mae']:.4f}  model MAE {s['model_mae']:.4f}  "
            f"delta {s['relative_change_pct']:+.2f}%"
        )
    print(f"report written to {out_dir}, models to {model_dir}")
    return PARTIAL if partial else OK


def cmd_predict(args) -> int:
    try:
        manifest, models = ev.load_model_dir(args.model_dir)
    except (FileNotFoundError, ValueError) as exc:
        _eprint(f"error: {exc}")
        return FATAL
    fp_path = Path(args.fingerprints)
    if not fp_path.exists():
        _eprint(f"error: fingerprint file not found: {fp_path}")
        return FATAL
    try:
        rows, feature_names, file_hash = read_fingerprints_csv(fp_path.read_text())
    except ValueError as exc:
        _eprint(f"error: {exc}")
        return FATAL
    expected = manifest.get("fingerprint_config_hash")
    if file_hash != expected:
        _eprint(
            "error: fingerprint config drift: models were trained under config hash "
            f"{expected}, fingerprint file declares {file_hash!r}; regenerate the "
            "fingerprints with the matching config"
        )
        return FATAL

    listed = {
        (alg, tag)
        for alg, by_tag in manifest.get("models", {}).items()
        for tag in by_tag
    }
    missing = sorted(listed - set(models))
    for alg, tag in missing:
        _eprint(f"warning: model file for ({alg}, {tag}) missing; algorithm omitted")

    if not models:
        print("no models available in the model directory")
        return PARTIAL

    try:
        table = ev.predict_unseen(models, rows, feature_names=feature_names)
    except ValueError as exc:
        _eprint(f"error: {exc}")
        return FATAL

    tags = manifest.get("statistics", [])
    columns = ["dataset", "algorithm", "rank"]
    for tag in tags:
        columns += [f"pred_{tag}", f"pred_{tag}_clipped"]
    lines = [",".join(columns)]
    for row in table:
        lines.append(
            ",".join(
                repr(row[c]) if isinstance(row.get(c), float) else str(row.get(c, ""))
                for c in columns
            )
        )
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(csv_text)
        print(f"wrote predictions to {args.out}")

    current = None
    for row in table:
        if row["dataset"] != current:
            current = row["dataset"]
            print(f"\n{current}:")
        mean_part = (
            f"mean={row['pred_mean_clipped']:.4f}" if "pred_mean_clipped" in row else ""
        )
        std_part = f"std={row['pred_std_clipped']:.4f}" if "pred_std_clipped" in row else ""
        print(f"  {row['rank']:>3}. {row['algorithm']:<20} {mean_part} {std_part}".rstrip())
    return PARTIAL if missing else OK


def cmd_report(args) -> int:
    path = Path(args.report)
    if not path.exists():
        _eprint(f"error: report file not found: {path}")
        return FATAL
    try:
        report = ev.report_from_json(path.read_text())
    except (ValueError, KeyError) as exc:
        _eprint(f"error: cannot parse report: {exc}")
        return FATAL
    text = ev.emit_report(report, args.format)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.format} report to {args.out}")
    else:
        print(text, end="")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsfp",
        description="Dataset fingerprints and algorithm-performance prediction "
        "for time-series classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fingerprint", help="extract fingerprints from a dataset directory")
    p.add_argument("dataset_dir")
    p.add_argument("-o", "--out", required=True, help="output fingerprint CSV")
    p.add_argument("--json", help="also write a JSON export to this path")
    p.add_argument("--class-agg", default="mean", choices=("mean", "median"))
    p.add_argument("--dataset-aggs", default="std,iqr,range")
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("ingest-results", help="validate a fold-accuracy table")
    p.add_argument("results")
    p.set_defaults(func=cmd_ingest_results)

    p = sub.add_parser("evaluate", help="run the full train/select/evaluate pipeline")
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--datasets", help="dataset directory")
    p.add_argument("--fingerprints", help="precomputed fingerprint CSV")
    p.add_argument("--results", help="fold-accuracy or summary CSV")
    p.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV})")
    p.add_argument("--models", help="model output directory (default <out>/models)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ratios", help="train,validation,test ratios, e.g. 0.2,0.2,0.6")
    p.add_argument("--stats", help="comma-separated targets, e.g. mean,std,p10")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="apply stored models to new fingerprints")
    p.add_argument("model_dir")
    p.add_argument("fingerprints")
    p.add_argument("-o", "--out", help="write the prediction table as CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("report", help="re-emit a stored evaluation report")
    p.add_argument("report")
    p.add_argument("--format", default="markdown", choices=("markdown", "csv"))
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        _eprint(f"error: {exc}")
        return FATAL


if __name__ == "__main__":
    sys.exit(main())
