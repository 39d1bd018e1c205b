"""Least-squares gradient boosting over axis-aligned regression trees.

Trees are plain nested dicts matching the on-disk model schema: internal
nodes ``{"feature", "threshold", "gain", "left", "right"}``, leaves
``{"value"}``. The splitter is exact greedy over midpoints of sorted unique
feature values with a variance-reduction criterion. Training is fully
deterministic, so identical inputs serialize to identical model files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict, field
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError

FEATURE_NAMES = ("extra", "missing", "stopword", "inflection", "derivation", "sense")


@dataclass(frozen=True)
class Hyperparams:
    n_estimators: int = 100
    max_depth: int = 6
    learning_rate: float = 0.1
    seed: int = 0
    min_samples_leaf: int = 5

    def __post_init__(self):
        if self.n_estimators < 1 or self.max_depth < 1 or self.min_samples_leaf < 1:
            raise ValueError("hyperparameters must be positive")
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def _best_split(x_sorted: np.ndarray, cum_y: np.ndarray, cum_y2: np.ndarray,
                node_sse: float, min_leaf: int):
    """Best (gain, threshold) for one pre-sorted feature column, or None."""
    n = x_sorted.shape[0]
    pos = np.arange(min_leaf - 1, n - min_leaf)
    if pos.size == 0:
        return None
    total_y = cum_y[-1]
    total_y2 = cum_y2[-1]
    n_left = pos + 1.0
    n_right = n - n_left
    sse_left = np.maximum(cum_y2[pos] - cum_y[pos] ** 2 / n_left, 0.0)
    sse_right = np.maximum(
        (total_y2 - cum_y2[pos]) - (total_y - cum_y[pos]) ** 2 / n_right, 0.0)
    gains = node_sse - sse_left - sse_right
    gains[x_sorted[pos] >= x_sorted[pos + 1]] = -np.inf
    best = int(np.argmax(gains))
    if not np.isfinite(gains[best]) or gains[best] <= 0.0:
        return None
    threshold = (x_sorted[pos[best]] + x_sorted[pos[best] + 1]) / 2.0
    return float(gains[best]), float(threshold)


def _fit_tree(X: np.ndarray, y: np.ndarray, max_depth: int, min_leaf: int,
              names) -> dict:
    def build(idx: np.ndarray, level: int) -> dict:
        values = y[idx]
        mean = float(values.mean())
        if level >= max_depth or idx.size < 2 * min_leaf:
            return {"value": mean}
        node_sse = float(((values - mean) ** 2).sum())
        best_gain = 0.0
        best_feature = -1
        best_threshold = 0.0
        for f in range(X.shape[1]):
            column = X[idx, f]
            order = np.argsort(column, kind="mergesort")
            x_sorted = column[order]
            y_sorted = values[order]
            cum_y = np.cumsum(y_sorted)
            cum_y2 = np.cumsum(y_sorted * y_sorted)
            found = _best_split(x_sorted, cum_y, cum_y2, node_sse, min_leaf)
            if found is not None and found[0] > best_gain:
                best_gain, best_threshold = found
                best_feature = f
        if best_feature < 0:
            return {"value": mean}
        mask = X[idx, best_feature] <= best_threshold
        return {
            "feature": names[best_feature],
            "threshold": best_threshold,
            "gain": best_gain,
            "left": build(idx[mask], level + 1),
            "right": build(idx[~mask], level + 1),
        }

    return build(np.arange(y.shape[0]), 0)


def _tree_predict(tree: dict, X: np.ndarray, name_to_idx) -> np.ndarray:
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = tree
        while "value" not in node:
            f = name_to_idx[node["feature"]]
            node = node["left"] if X[i, f] <= node["threshold"] else node["right"]
        out[i] = node["value"]
    return out


@dataclass(frozen=True)
class GBRModel:
    """Boosted ensemble: prediction = init + learning_rate * sum of tree outputs."""

    init_value: float
    learning_rate: float
    trees: tuple[dict, ...]
    feature_names: tuple[str, ...] = FEATURE_NAMES
    train_meta: dict = field(default_factory=dict)

    @property
    def mode(self) -> str:
        return "gbr"


@dataclass(frozen=True)
class LinearModel:
    """Intercept plus one signed coefficient per feature (7 parameters)."""

    intercept: float
    coefficients: tuple[float, ...]
    feature_names: tuple[str, ...] = FEATURE_NAMES
    train_meta: dict = field(default_factory=dict)

    @property
    def mode(self) -> str:
        return "linear"


def _as_matrix(X, feature_names) -> np.ndarray:
    arr = np.asarray([np.asarray(row, dtype=np.float64).ravel() for row in X])
    if arr.ndim != 2 or arr.shape[1] != len(feature_names):
        raise SchemaError(
            f"feature matrix must have {len(feature_names)} columns, got shape {arr.shape}")
    return arr


def train_gbr(X, y, hp: Hyperparams = Hyperparams(),
              feature_names=FEATURE_NAMES, train_meta: dict | None = None) -> GBRModel:
    """Fit the boosted ensemble: init to mean(y), then trees on residuals."""
    matrix = _as_matrix(X, feature_names)
    target = np.asarray(y, dtype=np.float64).ravel()
    if matrix.shape[0] != target.shape[0]:
        raise SchemaError(
            f"{matrix.shape[0]} feature vectors for {target.shape[0]} labels")
    if target.shape[0] < 2:
        raise ValueError("training needs at least two samples")
    # Exact for constant targets (float mean of n equal values may drift).
    if np.all(target == target[0]):
        init = float(target[0])
    else:
        init = float(target.mean())
    prediction = np.full(target.shape[0], init)
    trees = []
    names = tuple(feature_names)
    name_to_idx = {name: i for i, name in enumerate(names)}
    for _ in range(hp.n_estimators):
        residuals = target - prediction
        tree = _fit_tree(matrix, residuals, hp.max_depth, hp.min_samples_leaf, names)
        prediction += hp.learning_rate * _tree_predict(tree, matrix, name_to_idx)
        trees.append(tree)
    meta = {"hyperparams": asdict(hp)}
    if train_meta:
        meta.update(train_meta)
    return GBRModel(init_value=init, learning_rate=hp.learning_rate,
                    trees=tuple(trees), feature_names=names, train_meta=meta)


def train_linear(X, y, feature_names=FEATURE_NAMES,
                 train_meta: dict | None = None) -> LinearModel:
    """Seven-parameter alternative: non-negative least squares on an intercept
    column and the negated features, so error mass can only lower the score."""
    from scipy.optimize import nnls

    matrix = _as_matrix(X, feature_names)
    target = np.asarray(y, dtype=np.float64).ravel()
    if matrix.shape[0] != target.shape[0]:
        raise SchemaError(
            f"{matrix.shape[0]} feature vectors for {target.shape[0]} labels")
    design = np.hstack([np.ones((matrix.shape[0], 1)), -matrix])
    weights, _ = nnls(design, target)
    meta = dict(train_meta or {})
    return LinearModel(intercept=float(weights[0]),
                       coefficients=tuple(-float(w) for w in weights[1:]),
                       feature_names=tuple(feature_names), train_meta=meta)


def predict(model, x) -> float:
    """Score one feature vector with either model kind."""
    arr = np.asarray(getattr(x, "as_array", lambda: x)(), dtype=np.float64).ravel()
    if arr.shape[0] != len(model.feature_names):
        raise SchemaError(f"expected {len(model.feature_names)} features, got {arr.shape[0]}")
    if isinstance(model, LinearModel):
        return float(model.intercept + float(np.dot(model.coefficients, arr)))
    name_to_idx = {name: i for i, name in enumerate(model.feature_names)}
    total = model.init_value
    for tree in model.trees:
        node = tree
        while "value" not in node:
            f = name_to_idx[node["feature"]]
            node = node["left"] if arr[f] <= node["threshold"] else node["right"]
        total += model.learning_rate * node["value"]
    return float(total)


def staged_predictions(model: GBRModel, X):
    """Predictions after each boosting stage (0 trees first); for diagnostics."""
    matrix = _as_matrix(X, model.feature_names)
    name_to_idx = {name: i for i, name in enumerate(model.feature_names)}
    current = np.full(matrix.shape[0], model.init_value)
    yield current.copy()
    for tree in model.trees:
        current += model.learning_rate * _tree_predict(tree, matrix, name_to_idx)
        yield current.copy()


def feature_importances(model) -> np.ndarray:
    """Per-feature impurity-reduction totals, normalized to sum to 1.

    A model with no splits reports the uniform vector.
    """
    names = model.feature_names
    totals = np.zeros(len(names))
    name_to_idx = {name: i for i, name in enumerate(names)}
    if isinstance(model, GBRModel):
        stack = list(model.trees)
        while stack:
            node = stack.pop()
            if "value" in node:
                continue
            totals[name_to_idx[node["feature"]]] += node.get("gain", 0.0)
            stack.append(node["left"])
            stack.append(node["right"])
    else:
        totals = np.abs(np.asarray(model.coefficients, dtype=np.float64))
    total = totals.sum()
    if total <= 0.0:
        return np.full(len(names), 1.0 / len(names))
    return totals / total


def model_to_obj(model) -> dict:
    if isinstance(model, GBRModel):
        return {
            "mode": "gbr",
            "init": model.init_value,
            "lr": model.learning_rate,
            "feature_names": list(model.feature_names),
            "trees": list(model.trees),
            "train_meta": model.train_meta,
        }
    return {
        "mode": "linear",
        "init": model.intercept,
        "lr": 1.0,
        "feature_names": list(model.feature_names),
        "trees": [],
        "coefficients": list(model.coefficients),
        "train_meta": model.train_meta,
    }


def save_model(model, path) -> None:
    Path(path).write_text(
        json.dumps(model_to_obj(model), sort_keys=True, indent=2) + "\n",
        encoding="utf-8")


def model_from_obj(obj: dict):
    try:
        mode = obj["mode"]
        names = tuple(obj["feature_names"])
        if mode == "gbr":
            return GBRModel(init_value=float(obj["init"]),
                            learning_rate=float(obj["lr"]),
                            trees=tuple(obj["trees"]),
                            feature_names=names,
                            train_meta=obj.get("train_meta", {}))
        if mode == "linear":
            return LinearModel(intercept=float(obj["init"]),
                               coefficients=tuple(float(c) for c in obj["coefficients"]),
                               feature_names=names,
                               train_meta=obj.get("train_meta", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad model object: {exc}") from exc
    raise SchemaError(f"unknown model mode {obj.get('mode')!r}")


def load_model(path):
    try:
        obj = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, f"invalid model file ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise SchemaError("model file must hold a map")
    return model_from_obj(obj)
