"""From-scratch regressor families with one train/predict contract.

Five families: ridge, k-nearest-neighbors, random forest, gradient
boosting, and AdaBoost.R2, all built on the flat-array trees in
:mod:`tsfingerprint.cart`. Every model standardizes its inputs internally
(fit on the training rows), predicts raw unclipped values, and serializes
to a versioned JSON-ready dict that reproduces its predictions exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cart import Tree, grow_tree, tree_predict

__all__ = [
    "Standardizer",
    "TrainedRegressor",
    "SelectionResult",
    "KIND_ORDER",
    "fit_standardizer",
    "apply_standardizer",
    "train_ridge",
    "train_knn",
    "train_random_forest",
    "train_gradient_boosting",
    "train_adaboost",
    "train_constant",
    "predict",
    "clip_predictions",
    "model_to_dict",
    "model_from_dict",
    "model_to_json",
    "model_from_json",
    "default_candidates",
    "select_regressor",
]

MODEL_FORMAT_VERSION = 1

# Fixed tie-break order for validation-based selection.
KIND_ORDER = ("ridge", "knn", "random_forest", "gradient_boosting", "adaboost", "constant")


@dataclass(frozen=True)
class Standardizer:
    """Per-column affine transform learned on training rows.

    Columns with zero training spread are mapped to all-zeros instead of
    dividing by zero.
    """

    mean: np.ndarray
    scale: np.ndarray  # population std; 0 marks degenerate columns

    def transform(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        safe = np.where(self.scale == 0.0, 1.0, self.scale)
        z = (rows - self.mean) / safe
        z[:, self.scale == 0.0] = 0.0
        return z

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(mean=np.asarray(d["mean"], dtype=float), scale=np.asarray(d["scale"], dtype=float))


def fit_standardizer(train_rows: np.ndarray) -> Standardizer:
    rows = np.atleast_2d(np.asarray(train_rows, dtype=float))
    if rows.size == 0:
        raise ValueError("cannot standardize zero rows")
    return Standardizer(mean=rows.mean(axis=0), scale=rows.std(axis=0))


def apply_standardizer(standardizer: Standardizer, rows: np.ndarray) -> np.ndarray:
    return standardizer.transform(rows)


@dataclass
class TrainedRegressor:
    """One fitted model: kind, hyperparameters, standardizer, learned state."""

    kind: str
    params: dict
    standardizer: Standardizer
    state: dict = field(default_factory=dict)
    feature_names: list[str] | None = None

    @property
    def n_features(self) -> int:
        return self.standardizer.mean.size


def _check_xy(X, y):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.size}")
    if X.shape[0] < 1:
        raise ValueError("need at least one training row")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("training data contains NaN/Inf")
    return X, y


def train_ridge(X, y, lam: float = 1.0, feature_names=None) -> TrainedRegressor:
    """Ridge on standardized columns; the intercept is the target mean.

    With lam = 0 a singular system falls back to the minimum-norm
    least-squares solution instead of aborting.
    """
    X, y = _check_xy(X, y)
    if lam < 0:
        raise ValueError("lam must be >= 0")
    std = fit_standardizer(X)
    z = std.transform(X)
    intercept = float(np.mean(y))
    yc = y - intercept
    if lam > 0:
        a = z.T @ z + lam * np.eye(z.shape[1])
        try:
            w = np.linalg.solve(a, z.T @ yc)
        except np.linalg.LinAlgError:
            w = np.linalg.lstsq(a, z.T @ yc, rcond=None)[0]
    else:
        w = np.linalg.lstsq(z, yc, rcond=None)[0]
    return TrainedRegressor(
        kind="ridge",
        params={"lam": float(lam)},
        standardizer=std,
        state={"weights": w, "intercept": intercept},
        feature_names=list(feature_names) if feature_names else None,
    )


def train_knn(X, y, k: int = 3, feature_names=None) -> TrainedRegressor:
    """k-nearest-neighbors; unweighted mean of the k closest training rows.

    Distances are Euclidean in standardized space; exact ties are broken by
    training-row index (lower wins).
    """
    X, y = _check_xy(X, y)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k={k} outside [1, {X.shape[0]}]")
    std = fit_standardizer(X)
    return TrainedRegressor(
        kind="knn",
        params={"k": int(k)},
        standardizer=std,
        state={"rows": std.transform(X), "targets": y.copy()},
        feature_names=list(feature_names) if feature_names else None,
    )


def train_random_forest(
    X,
    y,
    n_trees: int = 200,
    max_depth: int | None = None,
    min_leaf: int = 1,
    bootstrap: bool = True,
    seed: int = 0,
    feature_names=None,
) -> TrainedRegressor:
    """Random forest: bagged trees over ceil(p/3) random features per node.

    The single-tree, no-bootstrap configuration examines all features, so
    one unlimited tree reproduces plain CART exactly.
    """
    X, y = _check_xy(X, y)
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    std = fit_standardizer(X)
    z = std.transform(X)
    n, p = z.shape
    rng = np.random.default_rng(seed)
    single_plain = not bootstrap and n_trees == 1
    m_try = None if single_plain else math.ceil(p / 3)
    trees = []
    for _ in range(n_trees):
        if bootstrap:
            idx = rng.integers(0, n, size=n)
            zb, yb = z[idx], y[idx]
        else:
            zb, yb = z, y
        trees.append(
            grow_tree(zb, yb, max_depth=max_depth, min_leaf=min_leaf,
                      n_candidate_features=m_try, rng=rng)
        )
    return TrainedRegressor(
        kind="random_forest",
        params={
            "n_trees": int(n_trees),
            "max_depth": max_depth,
            "min_leaf": int(min_leaf),
            "bootstrap": bool(bootstrap),
            "seed": int(seed),
        },
        standardizer=std,
        state={"trees": trees},
        feature_names=list(feature_names) if feature_names else None,
    )


def train_gradient_boosting(
    X,
    y,
    n_trees: int = 200,
    learning_rate: float = 0.1,
    max_depth: int | None = 3,
    seed: int = 0,
    feature_names=None,
) -> TrainedRegressor:
    """Stagewise least-squares boosting from the target mean.

    Each stage fits a depth-limited tree to the current residuals and adds
    learning_rate times its predictions; n_trees = 0 leaves the constant
    mean predictor.
    """
    X, y = _check_xy(X, y)
    if n_trees < 0:
        raise ValueError("n_trees must be >= 0")
    if not 0.0 < learning_rate <= 1.0:
        raise ValueError("learning_rate must be in (0, 1]")
    std = fit_standardizer(X)
    z = std.transform(X)
    init = float(np.mean(y))
    residual = y - init
    trees = []
    for _ in range(n_trees):
        tree = grow_tree(z, residual, max_depth=max_depth, min_leaf=1)
        residual = residual - learning_rate * tree_predict(tree, z)
        trees.append(tree)
    return TrainedRegressor(
        kind="gradient_boosting",
        params={
            "n_trees": int(n_trees),
            "learning_rate": float(learning_rate),
            "max_depth": max_depth,
            "seed": int(seed),
        },
        standardizer=std,
        state={"trees": trees, "init": init},
        feature_names=list(feature_names) if feature_names else None,
    )


def train_adaboost(
    X,
    y,
    n_estimators: int = 50,
    seed: int = 0,
    feature_names=None,
) -> TrainedRegressor:
    """AdaBoost.R2 with linear loss over depth-3 trees.

    Rounds fit a tree on a weight-proportional resample, score it by the
    weighted average of max-normalized absolute errors, and reweight rows
    by confidence. Boosting stops early on a perfect estimator (average
    loss 0) or when the average loss reaches 0.5.
    """
    X, y = _check_xy(X, y)
    if n_estimators < 1:
        raise ValueError("n_estimators must be >= 1")
    std = fit_standardizer(X)
    z = std.transform(X)
    n = z.shape[0]
    rng = np.random.default_rng(seed)
    weights = np.full(n, 1.0 / n)
    trees: list[Tree] = []
    tree_weights: list[float] = []
    for _ in range(n_estimators):
        idx = rng.choice(n, size=n, replace=True, p=weights)
        tree = grow_tree(z[idx], y[idx], max_depth=3, min_leaf=1)
        errors = np.abs(tree_predict(tree, z) - y)
        max_error = float(errors.max())
        if max_error == 0.0:
            trees.append(tree)
            tree_weights.append(1.0)
            break
        loss = errors / max_error
        avg_loss = float(np.sum(weights * loss))
        if avg_loss >= 0.5:
            if not trees:  # keep one estimator so the model can predict
                trees.append(tree)
                tree_weights.append(1.0)
            break
        beta = avg_loss / (1.0 - avg_loss)
        trees.append(tree)
        tree_weights.append(math.log(1.0 / beta))
        weights = weights * beta ** (1.0 - loss)
        weights = weights / weights.sum()
    return TrainedRegressor(
        kind="adaboost",
        params={"n_estimators": int(n_estimators), "seed": int(seed)},
        standardizer=std,
        state={"trees": trees, "tree_weights": np.array(tree_weights)},
        feature_names=list(feature_names) if feature_names else None,
    )


def train_constant(X, y, feature_names=None) -> TrainedRegressor:
    """Degenerate regressor: always predicts the training target mean.

    This is exactly the naive single-best-solver baseline, exposed as a
    candidate so baseline-equivalence can be tested end to end.
    """
    X, y = _check_xy(X, y)
    return TrainedRegressor(
        kind="constant",
        params={},
        standardizer=fit_standardizer(X),
        state={"value": float(np.mean(y))},
        feature_names=list(feature_names) if feature_names else None,
    )


def _weighted_median(preds: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per-column weighted median of predictions (rows = estimators)."""
    order = np.argsort(preds, axis=0, kind="stable")
    sorted_preds = np.take_along_axis(preds, order, axis=0)
    sorted_weights = weights[order]
    cdf = np.cumsum(sorted_weights, axis=0)
    half = 0.5 * cdf[-1]
    pick = np.argmax(cdf >= half, axis=0)
    return sorted_preds[pick, np.arange(preds.shape[1])]


def predict(model: TrainedRegressor, rows: np.ndarray) -> np.ndarray:
    """Raw (unclipped) predictions for each input row."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size == 0:
        return np.empty(0)
    if rows.shape[1] != model.n_features:
        raise ValueError(
            f"model expects {model.n_features} feature columns, got {rows.shape[1]}"
        )
    z = model.standardizer.transform(rows)
    state = model.state
    if model.kind == "ridge":
        return state["intercept"] + z @ state["weights"]
    if model.kind == "knn":
        k = model.params["k"]
        diffs = z[:, None, :] - state["rows"][None, :, :]
        dists = np.sqrt(np.sum(diffs * diffs, axis=2))
        nearest = np.argsort(dists, axis=1, kind="stable")[:, :k]
        return np.mean(state["targets"][nearest], axis=1)
    if model.kind == "random_forest":
        all_preds = np.stack([tree_predict(t, z) for t in state["trees"]])
        return np.mean(all_preds, axis=0)
    if model.kind == "gradient_boosting":
        out = np.full(z.shape[0], state["init"])
        lr = model.params["learning_rate"]
        for tree in state["trees"]:
            out = out + lr * tree_predict(tree, z)
        return out
    if model.kind == "adaboost":
        preds = np.stack([tree_predict(t, z) for t in state["trees"]])
        if preds.shape[0] == 1:
            return preds[0]
        return _weighted_median(preds, np.asarray(state["tree_weights"], dtype=float))
    if model.kind == "constant":
        return np.full(z.shape[0], state["value"])
    raise ValueError(f"unknown model kind {model.kind!r}")


def clip_predictions(values: np.ndarray, statistic_kind: str) -> np.ndarray:
    """Display view: mean/percentile targets clamp to [0, 1], std to [0, inf)."""
    values = np.asarray(values, dtype=float)
    if statistic_kind == "std":
        return np.clip(values, 0.0, None)
    return np.clip(values, 0.0, 1.0)


def model_to_dict(model: TrainedRegressor) -> dict:
    """Versioned JSON-ready snapshot; trees flatten to parallel arrays."""
    state = model.state
    if model.kind == "ridge":
        payload = {"weights": state["weights"].tolist(), "intercept": state["intercept"]}
    elif model.kind == "knn":
        payload = {"rows": state["rows"].tolist(), "targets": state["targets"].tolist()}
    elif model.kind == "random_forest":
        payload = {"trees": [t.to_dict() for t in state["trees"]]}
    elif model.kind == "gradient_boosting":
        payload = {"trees": [t.to_dict() for t in state["trees"]], "init": state["init"]}
    elif model.kind == "adaboost":
        payload = {
            "trees": [t.to_dict() for t in state["trees"]],
            "tree_weights": np.asarray(state["tree_weights"]).tolist(),
        }
    elif model.kind == "constant":
        payload = {"value": state["value"]}
    else:
        raise ValueError(f"unknown model kind {model.kind!r}")
    return {
        "version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "params": model.params,
        "standardizer": model.standardizer.to_dict(),
        "feature_names": model.feature_names,
        "state": payload,
    }


def model_from_dict(d: dict) -> TrainedRegressor:
    if d.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {d.get('version')!r}")
    kind = d["kind"]
    payload = d["state"]
    if kind == "ridge":
        state = {
            "weights": np.asarray(payload["weights"], dtype=float),
            "intercept": float(payload["intercept"]),
        }
    elif kind == "knn":
        state = {
            "rows": np.asarray(payload["rows"], dtype=float),
            "targets": np.asarray(payload["targets"], dtype=float),
        }
    elif kind == "random_forest":
        state = {"trees": [Tree.from_dict(t) for t in payload["trees"]]}
    elif kind == "gradient_boosting":
        state = {
            "trees": [Tree.from_dict(t) for t in payload["trees"]],
            "init": float(payload["init"]),
        }
    elif kind == "adaboost":
        state = {
            "trees": [Tree.from_dict(t) for t in payload["trees"]],
            "tree_weights": np.asarray(payload["tree_weights"], dtype=float),
        }
    elif kind == "constant":
        state = {"value": float(payload["value"])}
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return TrainedRegressor(
        kind=kind,
        params=d["params"],
        standardizer=Standardizer.from_dict(d["standardizer"]),
        state=state,
        feature_names=d.get("feature_names"),
    )


def model_to_json(model: TrainedRegressor) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_from_json(text: str) -> TrainedRegressor:
    return model_from_dict(json.loads(text))


# Default hyperparameter grid; each entry is one selection candidate.
DEFAULT_GRID: tuple[tuple[str, dict], ...] = (
    ("ridge", {"lam": 0.01}),
    ("ridge", {"lam": 0.1}),
    ("ridge", {"lam": 1.0}),
    ("ridge", {"lam": 10.0}),
    ("knn", {"k": 1}),
    ("knn", {"k": 3}),
    ("knn", {"k": 5}),
    ("random_forest", {"n_trees": 200, "max_depth": None, "min_leaf": 1}),
    ("random_forest", {"n_trees": 200, "max_depth": None, "min_leaf": 3}),
    ("gradient_boosting", {"n_trees": 200, "learning_rate": 0.1, "max_depth": 3}),
    ("adaboost", {"n_estimators": 50}),
)

_TRAINERS = {
    "ridge": train_ridge,
    "knn": train_knn,
    "random_forest": train_random_forest,
    "gradient_boosting": train_gradient_boosting,
    "adaboost": train_adaboost,
    "constant": train_constant,
}


def default_candidates(
    X,
    y,
    seed: int = 0,
    grid=DEFAULT_GRID,
    feature_names=None,
) -> list[TrainedRegressor]:
    """Train every grid point on (X, y); skips infeasible ones (e.g. k > n)."""
    models = []
    for kind, params in grid:
        kwargs = dict(params)
        if kind in ("random_forest", "gradient_boosting", "adaboost"):
            kwargs.setdefault("seed", seed)
        try:
            models.append(_TRAINERS[kind](X, y, feature_names=feature_names, **kwargs))
        except ValueError:
            continue
    if not models:
        raise ValueError("no feasible candidate for this training set")
    return models


@dataclass(frozen=True)
class SelectionResult:
    """Winner of validation-MAE model selection for one (algorithm, target)."""

    chosen: TrainedRegressor
    chosen_kind: str
    validation_mae: float
    all_candidate_maes: dict[str, float]  # best MAE per kind
    algorithm: str = ""
    statistic: str = ""


def select_regressor(
    candidates: list[TrainedRegressor],
    X_val,
    y_val,
    algorithm: str = "",
    statistic: str = "",
) -> SelectionResult:
    """Pick the candidate with the lowest validation MAE.

    Ties go to the earlier kind in KIND_ORDER, then to grid order.
    """
    if not candidates:
        raise ValueError("no candidates to select from")
    X_val = np.atleast_2d(np.asarray(X_val, dtype=float))
    y_val = np.asarray(y_val, dtype=float).ravel()
    if y_val.size == 0:
        raise ValueError("empty validation set")

    maes = [float(np.mean(np.abs(predict(m, X_val) - y_val))) for m in candidates]
    best = min(
        range(len(candidates)),
        key=lambda i: (maes[i], KIND_ORDER.index(candidates[i].kind), i),
    )
    per_kind: dict[str, float] = {}
    for m, mae in zip(candidates, maes):
        if m.kind not in per_kind or mae < per_kind[m.kind]:
            per_kind[m.kind] = mae
    return SelectionResult(
        chosen=candidates[best],
        chosen_kind=candidates[best].kind,
        validation_mae=maes[best],
        all_candidate_maes=per_kind,
        algorithm=algorithm,
        statistic=statistic,
    )
