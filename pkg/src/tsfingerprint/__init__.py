"""Data fingerprints and performance prediction for time-series classification.

The package condenses any labeled time-series dataset into a fixed 44-entry
fingerprint (instance statistics -> class aggregation -> dataset
aggregation plus shape counts), trains from-scratch regressors that map
fingerprints to per-algorithm accuracy statistics, and benchmarks them
against the single-best-solver baseline.
"""

from .dataio import (
    FoldAccuracyTable,
    ParseError,
    SplitAssignment,
    TimeSeriesDataset,
    TimeSeriesInstance,
    parse_fold_accuracies,
    parse_instances,
    parse_ts_dataset,
    split_datasets,
)
from .evaluate import (
    EvaluationReport,
    EvaluationRow,
    emit_report,
    mae,
    per_dataset_win,
    predict_unseen,
    relative_change,
    run_pipeline,
)
from .fingerprint import (
    DatasetFingerprint,
    FingerprintConfig,
    class_fingerprint,
    dataset_fingerprint,
    feature_names,
    fingerprint_corpus,
    instance_features,
    instance_fingerprint,
)
from .regress import (
    SelectionResult,
    Standardizer,
    TrainedRegressor,
    clip_predictions,
    default_candidates,
    fit_standardizer,
    model_from_json,
    model_to_json,
    predict,
    select_regressor,
    train_adaboost,
    train_gradient_boosting,
    train_knn,
    train_random_forest,
    train_ridge,
)
from .targets import (
    NaiveBaseline,
    PerformanceRecord,
    TargetStatistic,
    build_records,
    fold_statistic,
    naive_baseline,
)

__version__ = "0.1.0"
