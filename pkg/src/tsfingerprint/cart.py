"""Binary regression trees stored as flat node arrays.

Splits are chosen greedily to minimize the summed squared error of the two
children (the variance / MSE criterion). A node with feature index -1 is a
leaf. The flat layout doubles as the serialization format, so a tree round
trips through JSON without any conversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Tree", "grow_tree", "tree_predict"]

LEAF = -1


@dataclass
class Tree:
    feature_idx: np.ndarray  # int, LEAF marks leaves
    threshold: np.ndarray  # float, 0.0 at leaves
    left: np.ndarray  # int child ids, LEAF at leaves
    right: np.ndarray
    leaf_value: np.ndarray  # float, node mean (prediction at leaves)

    def to_dict(self) -> dict:
        return {
            "feature_idx": self.feature_idx.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "leaf_value": self.leaf_value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature_idx=np.asarray(d["feature_idx"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            leaf_value=np.asarray(d["leaf_value"], dtype=float),
        )


def _best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray, min_leaf: int):
    """Best (feature, threshold) over the candidate features, or None.

    Evaluates every cut position of every candidate column at once; ties go
    to the smallest cut position, then the first feature in `features`.
    """
    n = y.size
    sub = X[:, features]
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    ys = y[order]

    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    total = csum[-1]
    total_sq = csq[-1]

    k = np.arange(1, n, dtype=float)[:, None]
    left_sum, left_sq = csum[:-1], csq[:-1]
    right_sum, right_sq = total - left_sum, total_sq - left_sq
    sse = (left_sq - left_sum**2 / k) + (right_sq - right_sum**2 / (n - k))

    valid = xs[1:] > xs[:-1]
    if min_leaf > 1:
        sizes_ok = (k >= min_leaf) & (n - k >= min_leaf)
        valid &= sizes_ok
    if not valid.any():
        return None

    sse = np.where(valid, sse, np.inf)
    cut, col = np.unravel_index(np.argmin(sse), sse.shape)
    lo, hi = xs[cut, col], xs[cut + 1, col]
    thr = lo + (hi - lo) / 2.0
    if not thr < hi:  # adjacent floats: keep both sides non-empty
        thr = lo
    return int(features[col]), float(thr)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int | None = None,
    min_leaf: int = 1,
    n_candidate_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Grow a regression tree; deterministic given `rng` state.

    `n_candidate_features` limits the features examined per node (sampled
    without replacement from `rng`); None means all features. Splitting
    continues while the node is impure, the depth allows it, and both
    children can hold `min_leaf` rows.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n == 0:
        raise ValueError("cannot grow a tree on zero rows")
    if n_candidate_features is not None and rng is None:
        raise ValueError("feature subsampling needs an rng")

    feature_idx: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_value: list[float] = []

    def new_node(value: float) -> int:
        feature_idx.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        leaf_value.append(value)
        return len(feature_idx) - 1

    def build(idx: np.ndarray, depth: int) -> int:
        y_node = y[idx]
        node = new_node(float(np.mean(y_node)))
        if max_depth is not None and depth >= max_depth:
            return node
        if idx.size < 2 * min_leaf or idx.size < 2:
            return node
        if np.ptp(y_node) == 0.0:
            return node

        if n_candidate_features is None or n_candidate_features >= p:
            features = np.arange(p)
        else:
            features = np.sort(rng.choice(p, size=n_candidate_features, replace=False))
        found = _best_split(X[idx], y_node, features, min_leaf)
        if found is None:
            return node
        feat, thr = found

        goes_left = X[idx, feat] <= thr
        feature_idx[node] = feat
        threshold[node] = thr
        left[node] = build(idx[goes_left], depth + 1)
        right[node] = build(idx[~goes_left], depth + 1)
        return node

    build(np.arange(n), 0)
    return Tree(
        feature_idx=np.array(feature_idx, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        leaf_value=np.array(leaf_value),
    )


def tree_predict(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Route every row of X to its leaf value."""
    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0])
    stack = [(0, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        feat = tree.feature_idx[node]
        if feat == LEAF:
            out[idx] = tree.leaf_value[node]
            continue
        goes_left = X[idx, feat] <= tree.threshold[node]
        stack.append((int(tree.left[node]), idx[goes_left]))
        stack.append((int(tree.right[node]), idx[~goes_left]))
    return out
