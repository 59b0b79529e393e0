"""Feature analysis (Pearson correlation) and chi-squared percentile selection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from finemo.segmenter import EmotionLabel

# signed ordinal target encoding for correlation against the emotion label
TARGET_ENCODING = {
    EmotionLabel.PRECAUTION: -1.0,
    EmotionLabel.NEUTRAL: 0.0,
    EmotionLabel.OPPORTUNITY: 1.0,
}


class SelectionError(Exception):
    pass


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length samples."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise SelectionError("samples must have equal length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(np.sum(dx * dx)))
    sy = math.sqrt(float(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise SelectionError("correlation undefined for zero-variance sample")
    return float(np.sum(dx * dy)) / (sx * sy)


@dataclass
class CorrelationReport:
    """Per-feature correlation against the encoded target.

    Constant features get no r value and are listed separately.
    """

    r_values: dict[int, float]
    constant: list[int]
    target_mean: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "r_values": {str(k): v for k, v in self.r_values.items()},
                "constant": self.constant,
                "target_mean": self.target_mean,
            }
        )

    def ranked(self) -> list[tuple[int, float]]:
        return sorted(self.r_values.items(), key=lambda kv: (-abs(kv[1]), kv[0]))


def correlation_report(X, labels: list[EmotionLabel]) -> CorrelationReport:
    X = np.asarray(X, dtype=float)
    y = np.array([TARGET_ENCODING[l] for l in labels])
    r_values: dict[int, float] = {}
    constant: list[int] = []
    for j in range(X.shape[1]):
        col = X[:, j]
        if np.all(col == col[0]):
            constant.append(j)
            continue
        r_values[j] = pearson(col, y)
    return CorrelationReport(r_values=r_values, constant=constant, target_mean=float(y.mean()))


def chi2_scores(X, y) -> np.ndarray:
    """Per-feature chi-squared statistic for nonnegative features.

    Observed values are the class-conditional feature sums; expected values
    assume class-independence. All-zero features score 0.
    """
    X = np.asarray(X, dtype=float)
    if np.any(X < 0):
        raise SelectionError("chi2 requires nonnegative feature values")
    y = np.asarray(y)
    classes = np.unique(y)
    if classes.size < 2:
        raise SelectionError("chi2 requires at least two classes")
    observed = np.vstack([X[y == c].sum(axis=0) for c in classes])
    class_prob = np.array([(y == c).mean() for c in classes])
    feature_total = X.sum(axis=0)
    expected = np.outer(class_prob, feature_total)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    return terms.sum(axis=0)


@dataclass
class SelectionMask:
    retained: set[int]
    percentile: int
    score_function: str = "chi2"

    def to_json(self) -> str:
        return json.dumps(
            {
                "retained": sorted(self.retained),
                "percentile": self.percentile,
                "score_function": self.score_function,
            }
        )

    @classmethod
    def from_json(cls, payload: str) -> "SelectionMask":
        data = json.loads(payload)
        return cls(
            retained=set(data["retained"]),
            percentile=data["percentile"],
            score_function=data["score_function"],
        )


def select_percentile(scores, percentile: int = 15) -> SelectionMask:
    """Top ceil(percentile/100 * N) features by score; cutoff ties go to the
    lower column index."""
    scores = list(scores)
    if not scores:
        raise SelectionError("no scores to select from")
    if not 0 < percentile <= 100:
        raise SelectionError("percentile must be in (0, 100]")
    k = math.ceil(percentile / 100 * len(scores))
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return SelectionMask(retained=set(order[:k]), percentile=percentile)
