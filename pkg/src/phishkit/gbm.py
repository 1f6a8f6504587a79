"""Gradient-boosted regression trees with a logistic link.

Boosting on binomial deviance: the model starts from the log-odds of the
positive class, and each round fits a depth-limited regression tree to
the pseudo-residuals r_i = y_i - sigmoid(F(x_i)). Leaf values take one
Newton step, sum(r) / sum(|r| * (1 - |r|)), clipped for stability. The
prediction sigmoid(F(x)) is the confidence that a row is a phish; rows at
or above the discrimination threshold (default 0.7) classify as phish,
everything below as legitimate.

Split search is exact greedy on variance reduction over sorted feature
values, ties broken by lowest feature index then lowest threshold, so
training is fully deterministic: a fixed seed and input reproduce the
model file byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MODEL_FORMAT = "phishkit-gbm"
MODEL_VERSION = 1

DEFAULT_THRESHOLD = 0.7
_LEAF_CLIP = 10.0
_MIN_GAIN = 1e-12

PHISH = "phish"
LEGITIMATE = "legitimate"


class GbmError(Exception):
    pass


class ConfigError(GbmError):
    pass


class SingleClassError(GbmError):
    pass


class DimensionError(GbmError):
    pass


class ModelFileError(GbmError):
    pass


class CorruptModelError(ModelFileError):
    pass


class ModelVersionError(ModelFileError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_leaf: int = 5
    subsample: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if not (0.0 < self.learning_rate):
            raise ConfigError("learning_rate must be positive")
        if self.min_leaf < 1:
            raise ConfigError("min_leaf must be >= 1")
        if not (0.0 < self.subsample <= 1.0):
            raise ConfigError("subsample must be in (0, 1]")


# A tree is a list of nodes [feature, threshold, left, right, value];
# feature -1 marks a leaf, children -1.
Tree = list[list[float]]


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _tree_predict_one(tree: Tree, row) -> float:
    i = 0
    while True:
        feat, thr, left, right, value = tree[i]
        if feat < 0:
            return value
        i = int(left) if row[int(feat)] <= thr else int(right)


def _tree_predict_all(tree: Tree, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        out[i] = _tree_predict_one(tree, X[i])
    return out


def _leaf_value(resid: np.ndarray, hess: np.ndarray) -> float:
    den = float(hess.sum())
    if den <= 0.0:
        return 0.0
    value = float(resid.sum()) / den
    return max(-_LEAF_CLIP, min(_LEAF_CLIP, value))


def _fit_tree(X: np.ndarray, resid: np.ndarray, hess: np.ndarray, cfg: TrainConfig) -> Tree:
    nodes: Tree = []

    def add_leaf(idx) -> int:
        nodes.append([-1, 0.0, -1, -1, _leaf_value(resid[idx], hess[idx])])
        return len(nodes) - 1

    def grow(idx: np.ndarray, depth: int) -> int:
        n = idx.size
        r = resid[idx]
        if depth >= cfg.max_depth or n < 2 * cfg.min_leaf or np.ptp(r) == 0.0:
            return add_leaf(idx)

        base = r.sum() ** 2 / n
        best_gain, best_feat, best_thr = 0.0, -1, 0.0
        for feat in range(X.shape[1]):
            vals = X[idx, feat]
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            cum = np.cumsum(r[order])
            total = cum[-1]
            ks = np.arange(cfg.min_leaf - 1, n - cfg.min_leaf)
            ks = ks[sv[ks] < sv[ks + 1]]
            if ks.size == 0:
                continue
            left = cum[ks]
            gains = left**2 / (ks + 1) + (total - left) ** 2 / (n - ks - 1) - base
            j = int(np.argmax(gains))  # first max: lowest threshold wins ties
            if gains[j] > best_gain and gains[j] > _MIN_GAIN:
                best_gain = float(gains[j])
                best_feat = feat
                best_thr = float((sv[ks[j]] + sv[ks[j] + 1]) / 2.0)

        if best_feat < 0:
            return add_leaf(idx)
        mask = X[idx, best_feat] <= best_thr
        node_id = len(nodes)
        nodes.append([best_feat, best_thr, -1, -1, 0.0])
        left_id = grow(idx[mask], depth + 1)
        right_id = grow(idx[~mask], depth + 1)
        nodes[node_id][2] = left_id
        nodes[node_id][3] = right_id
        return node_id

    grow(np.arange(X.shape[0]), 0)
    return nodes


@dataclass
class GbmModel:
    trees: list[Tree]
    learning_rate: float
    initial_score: float
    n_features: int
    feature_names: tuple[str, ...] = ()
    threshold: float = DEFAULT_THRESHOLD
    config: TrainConfig | None = None
    train_loss: list[float] = field(default_factory=list, repr=False)

    def _check_row(self, row) -> None:
        if len(row) != self.n_features:
            raise DimensionError(
                f"row has {len(row)} values, model expects {self.n_features}"
            )

    def raw_score(self, row) -> float:
        self._check_row(row)
        acc = self.initial_score
        for tree in self.trees:
            acc += self.learning_rate * _tree_predict_one(tree, row)
        return acc

    def predict_confidence(self, row) -> float:
        """Confidence in [0, 1] that `row` is a phish."""
        return float(_sigmoid(self.raw_score(row)))

    def predict_confidences(self, rows) -> np.ndarray:
        X = np.asarray(rows, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionError(
                f"rows have shape {X.shape}, model expects (*, {self.n_features})"
            )
        scores = np.full(X.shape[0], self.initial_score)
        for tree in self.trees:
            scores += self.learning_rate * _tree_predict_all(tree, X)
        return _sigmoid(scores)

    def classify(self, row) -> str:
        return decide(self.predict_confidence(row), self.threshold)


def decide(confidence: float, threshold: float = DEFAULT_THRESHOLD) -> str:
    """Phish at or above the threshold, legitimate strictly below."""
    return PHISH if confidence >= threshold else LEGITIMATE


def log_loss(labels: np.ndarray, probs: np.ndarray) -> float:
    eps = 1e-15
    p = np.clip(probs, eps, 1 - eps)
    return float(-np.mean(labels * np.log(p) + (1 - labels) * np.log(1 - p)))


def train(
    rows,
    labels,
    cfg: TrainConfig = TrainConfig(),
    feature_names: tuple[str, ...] = (),
    threshold: float = DEFAULT_THRESHOLD,
) -> GbmModel:
    """Fit the boosted ensemble. Both classes must be present.

    With subsample < 1 each round fits its tree on a seeded random subset
    of rows (stochastic variant); scores are always updated on all rows.
    """
    cfg.validate()
    X = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError("rows and labels disagree in length")
    if X.shape[0] < 2:
        raise SingleClassError("need at least two training rows")
    if not (np.any(y == 0) and np.any(y == 1)):
        raise SingleClassError("training data must contain both classes")
    if feature_names and len(feature_names) != X.shape[1]:
        raise DimensionError("feature_names length does not match row width")

    rng = np.random.default_rng(cfg.seed)
    mean = float(y.mean())
    initial = math.log(mean / (1.0 - mean))
    scores = np.full(X.shape[0], initial)

    trees: list[Tree] = []
    losses: list[float] = []
    for _ in range(cfg.n_trees):
        prob = _sigmoid(scores)
        resid = y - prob
        hess = np.abs(resid) * (1.0 - np.abs(resid))
        if cfg.subsample < 1.0:
            k = max(1, int(round(cfg.subsample * X.shape[0])))
            pick = np.sort(rng.choice(X.shape[0], size=k, replace=False))
            tree = _fit_tree(X[pick], resid[pick], hess[pick], cfg)
        else:
            tree = _fit_tree(X, resid, hess, cfg)
        trees.append(tree)
        scores += cfg.learning_rate * _tree_predict_all(tree, X)
        losses.append(log_loss(y, _sigmoid(scores)))

    return GbmModel(
        trees=trees,
        learning_rate=cfg.learning_rate,
        initial_score=initial,
        n_features=X.shape[1],
        feature_names=tuple(feature_names),
        threshold=threshold,
        config=cfg,
        train_loss=losses,
    )


def save_model(model: GbmModel, path: str | Path) -> None:
    """Serialize to a versioned JSON document (deterministic bytes)."""
    cfg = model.config or TrainConfig()
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": {
            "n_trees": cfg.n_trees,
            "max_depth": cfg.max_depth,
            "learning_rate": cfg.learning_rate,
            "min_leaf": cfg.min_leaf,
            "subsample": cfg.subsample,
            "seed": cfg.seed,
        },
        "feature_names": list(model.feature_names),
        "n_features": model.n_features,
        "initial_score": model.initial_score,
        "learning_rate": model.learning_rate,
        "threshold": model.threshold,
        "trees": model.trees,
    }
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )


def load_model(path: str | Path) -> GbmModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptModelError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise CorruptModelError(f"{path} is not a model file")
    if doc.get("version") != MODEL_VERSION:
        raise ModelVersionError(
            f"model version {doc.get('version')!r} unsupported, need {MODEL_VERSION}"
        )
    try:
        cfg = TrainConfig(**doc["config"])
        trees = [[list(map(float, node)) for node in tree] for tree in doc["trees"]]
        for tree in trees:
            for node in tree:
                node[0] = int(node[0])
                node[2] = int(node[2])
                node[3] = int(node[3])
                if node[0] >= doc["n_features"]:
                    raise ValueError("split feature out of range")
        return GbmModel(
            trees=trees,
            learning_rate=float(doc["learning_rate"]),
            initial_score=float(doc["initial_score"]),
            n_features=int(doc["n_features"]),
            feature_names=tuple(doc["feature_names"]),
            threshold=float(doc["threshold"]),
            config=cfg,
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptModelError(f"malformed model file {path}: {exc}") from exc
