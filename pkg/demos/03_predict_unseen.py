#!/usr/bin/env python3
"""Serving flow: persist trained models, then rank algorithms for new data.

The service side holds only the model directory. The data owner computes a
fingerprint CSV locally and sends that single file; no series values cross
the boundary. A config hash in both artifacts guards against mixing
fingerprints produced under a different feature configuration.
"""

import tempfile
from pathlib import Path

from tsfingerprint import fingerprint_corpus, run_pipeline
from tsfingerprint.evaluate import load_model_dir, predict_unseen
from tsfingerprint.fingerprint import read_fingerprints_csv, write_fingerprints_csv
from tsfingerprint.synthetic import make_corpus
from tsfingerprint.targets import TargetStatistic, build_records

workdir = Path(tempfile.mkdtemp(prefix="tsfp_demo_"))

# --- provider side: train on a benchmark corpus and persist the winners ---
datasets, fold_table = make_corpus(n_datasets=40, n_algorithms=6, n_folds=8, seed=3)
fingerprints, _ = fingerprint_corpus(datasets)
feature_names = list(next(iter(fingerprints.values())).feature_names)

report = run_pipeline(
    fingerprints,
    build_records(fold_table),
    [TargetStatistic("mean"), TargetStatistic("std")],
    seed=0,
    feature_names=feature_names,
    model_dir=workdir / "models",
)
print(f"persisted chosen models for {len(report.rows) // 2} algorithms "
      f"to {workdir / 'models'}")

# --- data owner side: fingerprint new, private datasets ---
new_datasets, _ = make_corpus(n_datasets=3, n_algorithms=1, seed=99)
new_fps, _ = fingerprint_corpus(new_datasets)
shared_file = workdir / "new_fingerprints.csv"
shared_file.write_text(write_fingerprints_csv(new_fps))
print(f"data owner shares {shared_file.name} "
      f"({shared_file.stat().st_size} bytes, zero raw series values)")

# --- provider side again: load models, rank algorithms per new dataset ---
manifest, models = load_model_dir(workdir / "models")
rows, columns, file_hash = read_fingerprints_csv(shared_file.read_text())
assert file_hash == manifest["fingerprint_config_hash"], "config drift"

table = predict_unseen(models, rows, feature_names=columns)
current = None
for row in table:
    if row["dataset"] != current:
        current = row["dataset"]
        print(f"\nranking for {current}:")
    print(f"  {row['rank']}. {row['algorithm']:<6} "
          f"predicted accuracy {row['pred_mean_clipped']:.3f} "
          f"+- {row['pred_std_clipped']:.3f}")
