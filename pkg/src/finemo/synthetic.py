"""Synthetic labeled segment streams with planted per-emotion bigrams.

Used by the experiment scripts and the acceptance suite: precaution
segments carry a planted "ser bajista"-style bigram, opportunity segments a
"mayor ganancia"-style bigram, neutral segments neither. Numeric counters
and the trend flag carry only a weak class signal, so the planted bigrams
dominate exactly when BOW features are enabled.
"""

from __future__ import annotations

import numpy as np

from finemo.features import N_NUMERIC, FeatureVector, fit_vocabularies, vectorize
from finemo.segmenter import EmotionLabel
from finemo.textproc import ProcessedSegment

PLANTED = {
    EmotionLabel.PRECAUTION: ("ser", "bajista"),
    EmotionLabel.OPPORTUNITY: ("mayor", "ganancia"),
}

# segment distribution of the reference corpus: 1644 / 4172 / 2392
REFERENCE_BALANCE = {
    EmotionLabel.PRECAUTION: 1644,
    EmotionLabel.NEUTRAL: 4172,
    EmotionLabel.OPPORTUNITY: 2392,
}


def scaled_balance(n: int, balance: dict | None = None) -> dict:
    balance = balance or REFERENCE_BALANCE
    total = sum(balance.values())
    counts = {c: round(n * v / total) for c, v in balance.items()}
    # fix rounding drift on the majority class
    drift = n - sum(counts.values())
    counts[EmotionLabel.NEUTRAL] += drift
    return counts


def _numeric_for(label: EmotionLabel, rng: np.random.Generator) -> tuple[int, ...]:
    vals = [0] * N_NUMERIC
    vals[0] = int(rng.integers(60, 200))  # LEN_TWEET
    neg_bias = 2.0 if label is EmotionLabel.PRECAUTION else 0.4
    pos_bias = 2.0 if label is EmotionLabel.OPPORTUNITY else 0.4
    vals[15] = int(rng.poisson(neg_bias))  # NEG_POLARITY
    vals[17] = int(rng.poisson(pos_bias))  # POS_POLARITY
    vals[10] = int(rng.poisson(0.8))  # ADVERBS
    vals[3] = int(rng.poisson(0.5))  # TOTAL_NUM
    return tuple(vals)


def _trend_for(label: EmotionLabel, rng: np.random.Generator) -> bool:
    if label is EmotionLabel.PRECAUTION:
        return bool(rng.random() < 0.2)
    if label is EmotionLabel.OPPORTUNITY:
        return bool(rng.random() < 0.8)
    return bool(rng.random() < 0.5)


def make_planted_segments(
    n: int,
    seed: int = 0,
    plant_prob: float = 0.95,
    filler_vocab: int = 40,
    balance: dict | None = None,
) -> list[ProcessedSegment]:
    """Labeled ProcessedSegments with class-exclusive planted bigrams."""
    rng = np.random.default_rng(seed)
    counts = scaled_balance(n, balance)
    labels = [c for c, k in counts.items() for _ in range(k)]
    rng.shuffle(labels)
    fillers = [f"w{k:02d}" for k in range(filler_vocab)]
    segments = []
    for i, label in enumerate(labels):
        length = int(rng.integers(8, 16))
        tokens = ["TICKER"] + [fillers[int(j)] for j in rng.integers(0, filler_vocab, length)]
        planted = PLANTED.get(label)
        if planted is not None and rng.random() < plant_prob:
            pos = int(rng.integers(1, len(tokens)))
            tokens[pos:pos] = list(planted)
        segments.append(
            ProcessedSegment(
                tweet_id=f"s{i:05d}",
                focus="TICK",
                tokens=tuple(tokens),
                raw_len=len(" ".join(tokens)),
                label=label,
            )
        )
    return segments


def make_planted_stream(
    n: int,
    seed: int = 0,
    warmup: int = 1000,
    plant_prob: float = 0.95,
    ablate_bow: bool = False,
    balance: dict | None = None,
):
    """(stream, vocabulary) where stream is a list of (FeatureVector, label).

    Vocabularies and BOWs are fitted on the first ``warmup`` segments.
    ``ablate_bow`` empties the BOW lists, removing features 4-6 while
    keeping the rest of the space identical.
    """
    rng = np.random.default_rng(seed + 1)
    segments = make_planted_segments(n, seed=seed, plant_prob=plant_prob, balance=balance)
    vm = fit_vocabularies(segments[:warmup])
    if ablate_bow:
        vm.bow_pre, vm.bow_neu, vm.bow_opp = [], [], []
    stream = []
    for seg in segments:
        fv = vectorize(
            seg,
            vm,
            _numeric_for(seg.label, rng),
            _trend_for(seg.label, rng),
            label=seg.label,
        )
        stream.append((fv, seg.label))
    return stream, vm
