"""Incremental learners, the two-stage stacking ensemble and grid search.

Every learner exposes predict(fv) -> per-class scores (never mutating) and
partial_fit(fv, label) -> None (one instance, order-sensitive). Before the
first fit, predict returns the configured prior (uniform by default).

Naive Bayes and the linear model consume the full hybrid feature space;
the tree learners consume the low-dimensional dense view (BOW counters,
numeric counters, trend).
"""

from __future__ import annotations

import itertools
import math
import pickle
from dataclasses import dataclass

import numpy as np

from finemo.features import N_NUMERIC, FeatureVector
from finemo.segmenter import EmotionLabel

DEFAULT_CLASSES = (
    EmotionLabel.PRECAUTION,
    EmotionLabel.NEUTRAL,
    EmotionLabel.OPPORTUNITY,
)


def _argmax_label(scores: dict, classes) -> EmotionLabel:
    # ties resolved by class order
    best = None
    best_score = -math.inf
    for cls in classes:
        s = scores[cls]
        if s > best_score:
            best, best_score = cls, s
    return best


class IncrementalLearner:
    """Shared predict-label plumbing; subclasses implement predict/partial_fit."""

    classes: tuple[EmotionLabel, ...]

    def predict(self, fv: FeatureVector) -> dict[EmotionLabel, float]:
        raise NotImplementedError

    def partial_fit(self, fv: FeatureVector, label: EmotionLabel) -> None:
        raise NotImplementedError

    def predict_label(self, fv: FeatureVector) -> EmotionLabel:
        return _argmax_label(self.predict(fv), self.classes)

    def _uniform(self) -> dict[EmotionLabel, float]:
        p = 1.0 / len(self.classes)
        return {c: p for c in self.classes}


class StreamingNaiveBayes(IncrementalLearner):
    """Mixed-likelihood incremental Naive Bayes.

    Multinomial with add-1 smoothing over the sparse counts, Gaussian over
    the numeric block (streaming sums / sums of squares), Bernoulli with
    add-1 over the trend flag.
    """

    def __init__(self, classes=DEFAULT_CLASSES, var_epsilon: float = 1e-9):
        self.classes = tuple(classes)
        self.var_epsilon = var_epsilon
        self.n_total = 0
        self._n = {c: 0 for c in self.classes}
        self._sparse = {c: {} for c in self.classes}
        self._sparse_total = {c: 0.0 for c in self.classes}
        self._num_sum = {c: np.zeros(N_NUMERIC) for c in self.classes}
        self._num_sumsq = {c: np.zeros(N_NUMERIC) for c in self.classes}
        self._trend_true = {c: 0 for c in self.classes}

    def partial_fit(self, fv: FeatureVector, label: EmotionLabel) -> None:
        self.n_total += 1
        self._n[label] += 1
        counts = self._sparse[label]
        for idx, val in fv.sparse_counts.items():
            counts[idx] = counts.get(idx, 0.0) + val
            self._sparse_total[label] += val
        x = np.asarray(fv.numeric, dtype=float)
        self._num_sum[label] += x
        self._num_sumsq[label] += x * x
        self._trend_true[label] += int(fv.trend)

    def predict(self, fv: FeatureVector) -> dict[EmotionLabel, float]:
        if self.n_total == 0:
            return self._uniform()
        vocab_size = fv.sparse_dim
        scores = {}
        for cls in self.classes:
            n = self._n[cls]
            if n == 0:
                scores[cls] = -math.inf
                continue
            logp = math.log(n / self.n_total)
            denom = self._sparse_total[cls] + vocab_size
            counts = self._sparse[cls]
            for idx, val in fv.sparse_counts.items():
                logp += val * math.log((counts.get(idx, 0.0) + 1.0) / denom)
            mean = self._num_sum[cls] / n
            var = self._num_sumsq[cls] / n - mean * mean
            var = np.maximum(var, self.var_epsilon)
            x = np.asarray(fv.numeric, dtype=float)
            logp += float(
                np.sum(-0.5 * np.log(2.0 * math.pi * var) - (x - mean) ** 2 / (2.0 * var))
            )
            p_true = (self._trend_true[cls] + 1.0) / (n + 2.0)
            logp += math.log(p_true if fv.trend else 1.0 - p_true)
            scores[cls] = logp
        return scores


class _LeafNode:
    __slots__ = ("class_counts", "observers", "n_since", "features")

    def __init__(self, n_classes: int, features: list[int]):
        self.class_counts = np.zeros(n_classes)
        # per feature: value -> per-class counts
        self.observers: dict[int, dict[float, np.ndarray]] = {f: {} for f in features}
        self.n_since = 0.0
        self.features = features


class _SplitNode:
    __slots__ = ("feature", "threshold", "left", "right")

    def __init__(self, feature: int, threshold: float, left, right):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


_MAX_DISTINCT = 64


class HoeffdingTreeClassifier(IncrementalLearner):
    """Incremental decision tree with Hoeffding-bound split decisions.

    A leaf splits once the information-gain gap between its two best
    candidate splits exceeds eps = sqrt(R^2 ln(1/delta) / (2 n)), with
    R = log2(#classes), or once eps falls below the tie threshold. Leaves
    predict by majority vote or a naive-Bayes hybrid over the numeric view.
    """

    def __init__(
        self,
        classes=DEFAULT_CLASSES,
        delta: float = 1e-7,
        grace_period: int = 200,
        tie_threshold: float = 0.05,
        leaf_prediction: str = "majority",
        n_features: int = N_NUMERIC + 4,
        subspace_size: int | None = None,
        rng: np.random.Generator | None = None,
    ):
        if leaf_prediction not in ("majority", "nb"):
            raise ValueError("leaf_prediction must be 'majority' or 'nb'")
        self.classes = tuple(classes)
        self.delta = delta
        self.grace_period = grace_period
        self.tie_threshold = tie_threshold
        self.leaf_prediction = leaf_prediction
        self.n_features = n_features
        self.subspace_size = subspace_size
        self.rng = rng
        self._root = self._new_leaf()
        self.n_seen = 0

    def _new_leaf(self) -> _LeafNode:
        features = list(range(self.n_features))
        if self.subspace_size is not None and self.subspace_size < self.n_features:
            assert self.rng is not None
            chosen = self.rng.choice(self.n_features, size=self.subspace_size, replace=False)
            features = sorted(int(f) for f in chosen)
        return _LeafNode(len(self.classes), features)

    def _sort(self, x: np.ndarray) -> _LeafNode:
        node = self._root
        while isinstance(node, _SplitNode):
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def partial_fit(self, fv: FeatureVector, label: EmotionLabel, weight: float = 1.0) -> None:
        x = fv.dense_view()
        self.n_seen += 1
        node, parent, side = self._root, None, None
        while isinstance(node, _SplitNode):
            parent, side = node, x[node.feature] <= node.threshold
            node = node.left if side else node.right
        ci = self.classes.index(label)
        node.class_counts[ci] += weight
        node.n_since += weight
        for f in node.features:
            per_value = node.observers[f]
            v = float(x[f])
            if v not in per_value and len(per_value) >= _MAX_DISTINCT:
                v = min(per_value, key=lambda k: abs(k - v))
            stats = per_value.get(v)
            if stats is None:
                stats = per_value[v] = np.zeros(len(self.classes))
            stats[ci] += weight
        if node.n_since >= self.grace_period:
            node.n_since = 0.0
            self._attempt_split(node, parent, side)

    def _attempt_split(self, leaf: _LeafNode, parent, side) -> None:
        counts = leaf.class_counts
        if np.count_nonzero(counts) < 2:
            return
        parent_entropy = _entropy(counts)
        n = counts.sum()
        # best split per feature; the Hoeffding gap compares across features
        per_feature: list[tuple[float, int, float]] = []
        for f, per_value in leaf.observers.items():
            values = sorted(per_value)
            if len(values) < 2:
                continue
            best_gain, best_thr = 0.0, None
            left = np.zeros(len(self.classes))
            for v in values[:-1]:
                left = left + per_value[v]
                right = counts - left
                ln, rn = left.sum(), right.sum()
                if ln <= 0 or rn <= 0:
                    continue
                gain = parent_entropy - (ln / n) * _entropy(left) - (rn / n) * _entropy(right)
                if gain > best_gain:
                    best_gain, best_thr = gain, v
            if best_thr is not None:
                per_feature.append((best_gain, f, best_thr))
        if not per_feature:
            return
        per_feature.sort(key=lambda t: (-t[0], t[1]))
        gain, feature, threshold = per_feature[0]
        second = per_feature[1][0] if len(per_feature) > 1 else 0.0
        if feature is None or gain <= 0.0:
            return
        r = math.log2(len(self.classes))
        eps = math.sqrt(r * r * math.log(1.0 / self.delta) / (2.0 * n)) if self.delta < 1 else 0.0
        if gain - second > eps or eps < self.tie_threshold:
            left_leaf, right_leaf = self._new_leaf(), self._new_leaf()
            per_value = leaf.observers[feature]
            for v, stats in per_value.items():
                if v <= threshold:
                    left_leaf.class_counts += stats
                else:
                    right_leaf.class_counts += stats
            split = _SplitNode(feature, threshold, left_leaf, right_leaf)
            if parent is None:
                self._root = split
            elif side:
                parent.left = split
            else:
                parent.right = split

    def predict(self, fv: FeatureVector) -> dict[EmotionLabel, float]:
        if self.n_seen == 0:
            return self._uniform()
        leaf = self._sort(fv.dense_view())
        counts = leaf.class_counts
        total = counts.sum()
        if total <= 0:
            return self._uniform()
        if self.leaf_prediction == "majority":
            return {c: counts[i] / total for i, c in enumerate(self.classes)}
        # nb hybrid: majority prior re-weighted by per-feature value frequencies
        x = fv.dense_view()
        scores = {}
        for i, c in enumerate(self.classes):
            if counts[i] <= 0:
                scores[c] = -math.inf
                continue
            logp = math.log(counts[i] / total)
            for f in leaf.features:
                per_value = leaf.observers[f]
                stats = per_value.get(float(x[f]))
                seen = stats[i] if stats is not None else 0.0
                logp += math.log((seen + 1.0) / (counts[i] + len(per_value) + 1.0))
            scores[c] = logp
        return scores


class _DriftMonitor:
    """Sliding-window error monitor: flags drift when the recent error rate
    exceeds the lifetime rate by three binomial standard deviations."""

    def __init__(self, window: int = 100, min_instances: int = 200):
        self.window = window
        self.min_instances = min_instances
        self.recent: list[int] = []
        self.errors = 0
        self.n = 0

    def add(self, error: bool) -> bool:
        self.n += 1
        self.errors += int(error)
        self.recent.append(int(error))
        if len(self.recent) > self.window:
            self.recent.pop(0)
        if self.n < self.min_instances or len(self.recent) < self.window:
            return False
        lifetime = self.errors / self.n
        recent = sum(self.recent) / len(self.recent)
        sigma = math.sqrt(max(lifetime * (1.0 - lifetime), 1e-12) / self.window)
        return recent > lifetime + 3.0 * sigma


class AdaptiveRandomForestClassifier(IncrementalLearner):
    """Online bagging ensemble of Hoeffding trees.

    Per-tree Poisson(lambda) instance weighting, per-leaf random feature
    subsets of size max_features, and a per-tree drift monitor that replaces
    a drifting tree with a fresh one. Prediction is a majority vote, ties
    resolved by class order.
    """

    def __init__(
        self,
        classes=DEFAULT_CLASSES,
        n_estimators: int = 10,
        lam: float | None = 6.0,
        max_features: int | str | None = "auto",
        delta: float = 1e-7,
        grace_period: int = 200,
        leaf_prediction: str = "majority",
        n_features: int = N_NUMERIC + 4,
        seed: int = 0,
        drift_detection: bool = True,
    ):
        self.classes = tuple(classes)
        self.n_estimators = n_estimators
        self.lam = lam
        self.delta = delta
        self.grace_period = grace_period
        self.leaf_prediction = leaf_prediction
        self.n_features = n_features
        self.drift_detection = drift_detection
        if max_features == "auto":
            subspace = max(1, round(math.sqrt(n_features)))
        elif max_features is None:
            subspace = n_features
        else:
            subspace = min(int(max_features), n_features)
        self.subspace_size = subspace
        self._rngs = [np.random.default_rng(seed + 1000 * k) for k in range(n_estimators)]
        self._trees = [self._new_tree(k) for k in range(n_estimators)]
        self._monitors = [_DriftMonitor() for _ in range(n_estimators)]
        self.n_seen = 0
        self.n_resets = 0

    def _new_tree(self, k: int) -> HoeffdingTreeClassifier:
        return HoeffdingTreeClassifier(
            classes=self.classes,
            delta=self.delta,
            grace_period=self.grace_period,
            leaf_prediction=self.leaf_prediction,
            n_features=self.n_features,
            subspace_size=self.subspace_size if self.subspace_size < self.n_features else None,
            rng=self._rngs[k],
        )

    def partial_fit(self, fv: FeatureVector, label: EmotionLabel) -> None:
        self.n_seen += 1
        for k, tree in enumerate(self._trees):
            if self.drift_detection and tree.n_seen > 0:
                err = tree.predict_label(fv) != label
                if self._monitors[k].add(err):
                    self._trees[k] = tree = self._new_tree(k)
                    self._monitors[k] = _DriftMonitor()
                    self.n_resets += 1
            w = 1.0 if self.lam is None else float(self._rngs[k].poisson(self.lam))
            if w > 0:
                tree.partial_fit(fv, label, weight=w)

    def predict(self, fv: FeatureVector) -> dict[EmotionLabel, float]:
        votes = {c: 0.0 for c in self.classes}
        any_vote = False
        for tree in self._trees:
            if tree.n_seen == 0:
                continue
            votes[tree.predict_label(fv)] += 1.0
            any_vote = True
        if not any_vote:
            return self._uniform()
        return votes


class SGDLinearClassifier(IncrementalLearner):
    """One-vs-rest linear model with hinge loss and eta_t = 1/(alpha t).

    max_iter and tol only bound warmup epochs (warmup_fit); the streaming
    phase is exactly one update per instance.
    """

    def __init__(
        self,
        classes=DEFAULT_CLASSES,
        penalty: str = "l2",
        l1_ratio: float = 0.15,
        alpha: float = 1e-4,
        max_iter: int = 1000,
        tol: float = 1e-3,
    ):
        if penalty not in ("l1", "l2", "elasticnet"):
            raise ValueError(f"unknown penalty: {penalty}")
        self.classes = tuple(classes)
        self.penalty = penalty
        self.l1_ratio = {"l1": 1.0, "l2": 0.0, "elasticnet": l1_ratio}[penalty]
        self.alpha = alpha
        self.max_iter = max_iter
        self.tol = tol
        self.t = 0
        self._w: np.ndarray | None = None
        self._b: np.ndarray | None = None

    def _ensure(self, fv: FeatureVector) -> None:
        if self._w is None:
            self._w = np.zeros((len(self.classes), fv.total_dim))
            self._b = np.zeros(len(self.classes))

    def _scores(self, fv: FeatureVector) -> np.ndarray:
        s = self._b.copy()
        for idx, val in fv.items():
            s += self._w[:, idx] * val
        return s

    def partial_fit(self, fv: FeatureVector, label: EmotionLabel) -> None:
        self._ensure(fv)
        self.t += 1
        eta = 1.0 / (self.alpha * self.t)
        scores = self._scores(fv)
        l2_part = self.alpha * (1.0 - self.l1_ratio)
        l1_part = self.alpha * self.l1_ratio
        if l2_part:
            self._w *= max(0.0, 1.0 - eta * l2_part)
        if l1_part:
            shrink = eta * l1_part
            self._w = np.sign(self._w) * np.maximum(np.abs(self._w) - shrink, 0.0)
        for i, cls in enumerate(self.classes):
            y = 1.0 if cls is label else -1.0
            if y * scores[i] < 1.0:
                for idx, val in fv.items():
                    self._w[i, idx] += eta * y * val
                self._b[i] += eta * y

    def warmup_fit(self, stream: list[tuple[FeatureVector, EmotionLabel]]) -> int:
        """Epoch passes over the warmup window, stopping when the mean hinge
        loss stops improving by more than tol. Returns epochs run."""
        prev = math.inf
        for epoch in range(self.max_iter):
            total = 0.0
            for fv, label in stream:
                self._ensure(fv)
                scores = self._scores(fv)
                for i, cls in enumerate(self.classes):
                    y = 1.0 if cls is label else -1.0
                    total += max(0.0, 1.0 - y * scores[i])
                self.partial_fit(fv, label)
            mean_loss = total / max(1, len(stream))
            if prev - mean_loss < self.tol:
                return epoch + 1
            prev = mean_loss
        return self.max_iter

    def predict(self, fv: FeatureVector) -> dict[EmotionLabel, float]:
        if self.t == 0 or self._w is None:
            return self._uniform()
        scores = self._scores(fv)
        return {c: float(scores[i]) for i, c in enumerate(self.classes)}


class StackedClassifier:
    """Two-stage cascade: a three-class stage followed by a binary
    emotion-vs-neutral re-check of non-neutral predictions. Stage 2 can only
    demote a prediction to neutral, never promote."""

    def __init__(
        self,
        stage1: IncrementalLearner,
        stage2_pre: IncrementalLearner,
        stage2_opp: IncrementalLearner,
        train_stage2_on_predictions: bool = False,
    ):
        if stage1 is stage2_pre or stage1 is stage2_opp or stage2_pre is stage2_opp:
            raise ValueError("the three learners must be independent instances")
        self.stage1 = stage1
        self.stage2_pre = stage2_pre
        self.stage2_opp = stage2_opp
        self.train_stage2_on_predictions = train_stage2_on_predictions
        self.classes = DEFAULT_CLASSES

    def predict_label(self, fv: FeatureVector) -> EmotionLabel:
        s1 = self.stage1.predict_label(fv)
        if s1 is EmotionLabel.NEUTRAL:
            return EmotionLabel.NEUTRAL
        if s1 is EmotionLabel.PRECAUTION:
            return self.stage2_pre.predict_label(fv)
        return self.stage2_opp.predict_label(fv)

    predict = predict_label

    def partial_fit(self, fv: FeatureVector, label: EmotionLabel) -> None:
        if self.train_stage2_on_predictions:
            routed = self.stage1.predict_label(fv)
        else:
            routed = label
        self.stage1.partial_fit(fv, label)
        if label in (EmotionLabel.PRECAUTION, EmotionLabel.NEUTRAL):
            if not self.train_stage2_on_predictions or routed is not EmotionLabel.OPPORTUNITY:
                self.stage2_pre.partial_fit(fv, label)
        if label in (EmotionLabel.OPPORTUNITY, EmotionLabel.NEUTRAL):
            if not self.train_stage2_on_predictions or routed is not EmotionLabel.PRECAUTION:
                self.stage2_opp.partial_fit(fv, label)


def make_stacked(factory) -> StackedClassifier:
    """Build a stacked classifier from a learner factory(classes)."""
    return StackedClassifier(
        stage1=factory(DEFAULT_CLASSES),
        stage2_pre=factory((EmotionLabel.PRECAUTION, EmotionLabel.NEUTRAL)),
        stage2_opp=factory((EmotionLabel.OPPORTUNITY, EmotionLabel.NEUTRAL)),
    )


CHECKPOINT_FORMAT_VERSION = 1


def save_model(model, path: str) -> None:
    """Serialize a learner (or stacked cascade) to a versioned checkpoint."""
    with open(path, "wb") as fh:
        pickle.dump({"format_version": CHECKPOINT_FORMAT_VERSION, "model": model}, fh)


def load_model(path: str):
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    version = payload.get("format_version") if isinstance(payload, dict) else None
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format version: {version!r}")
    return payload["model"]


RF_GRID = {
    "estimators": (10, 35, 50, 100),
    "max_features": ("auto", 35, 50, 100),
    "lambda": (6, 35, 50, 100),
}

SGD_GRID = {
    "penalty": ("l1", "l2", "elasticnet"),
    "l1_ratio": (0.05, 0.15, 0.9),
    "alpha": (0.001, 0.0001, 0.00001),
    "max_iter": (100, 1000, 10000),
    "tol": (1e-1, 1e-3, 1e-5),
}


def enumerate_grid(grid: dict) -> list[dict]:
    """Cartesian product of the grid values, in declaration order."""
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


@dataclass
class GridSearchResult:
    config: dict
    accuracy: float
    n_evaluated: int


def grid_search(grid: dict, warmup, factory, metric: str = "accuracy") -> GridSearchResult:
    """Prequential accuracy over the warmup window per grid point; ties go to
    the first configuration in enumeration order."""
    if metric != "accuracy":
        raise ValueError("only accuracy is supported")
    if not grid:
        raise ValueError("empty grid")
    configs = enumerate_grid(grid)
    if not warmup:
        raise ValueError("empty warmup window")
    best_cfg, best_acc = None, -1.0
    for cfg in configs:
        learner = factory(cfg)
        correct = 0
        for fv, label in warmup:
            if learner.predict_label(fv) is label:
                correct += 1
            learner.partial_fit(fv, label)
        acc = correct / len(warmup)
        if acc > best_acc:
            best_cfg, best_acc = cfg, acc
    return GridSearchResult(config=best_cfg, accuracy=best_acc, n_evaluated=len(configs))
