"""Vocabulary fitting and feature extraction.

The hybrid feature vector per segment is:
  sparse block  - char n-grams | word n-grams | within-word char n-grams |
                  three per-emotion BOW hit counters (last three columns)
  numeric block - 20 integer counters (see NUMERIC_NAMES)
  trend         - boolean upward/downward price movement around post time
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta

import numpy as np

from finemo.lexicons import LexiconSet
from finemo.segmenter import NUMBER_RE, EmotionLabel
from finemo.textproc import _DATE_RE, ProcessedSegment

NUMERIC_NAMES = (
    "LEN_TWEET",
    "NEG_NUM",
    "POS_NUM",
    "TOTAL_NUM",
    "NEG_PERC",
    "POS_PERC",
    "TOTAL_PERC",
    "FIN_ABBR",
    "EXCLAMATION",
    "INTERROGATION",
    "ADVERBS",
    "ADVERBS_NEG",
    "ADVERBS_POS",
    "ADVERBS_DOUBT",
    "ADVERBS_INT",
    "NEG_POLARITY",
    "NEU_POLARITY",
    "POS_POLARITY",
    "NEG_EMOTION",
    "POS_EMOTION",
)

N_NUMERIC = len(NUMERIC_NAMES)
BOW_CLASSES = (EmotionLabel.PRECAUTION, EmotionLabel.NEUTRAL, EmotionLabel.OPPORTUNITY)

VOCAB_FORMAT_VERSION = 1


class VocabularyError(Exception):
    pass


class TrendUnavailableError(Exception):
    """No closing price on one of the two reference working days."""


def char_ngrams(text: str, n_min: int, n_max: int) -> list[str]:
    out = []
    for n in range(n_min, n_max + 1):
        out.extend(text[i : i + n] for i in range(len(text) - n + 1))
    return out


def word_ngrams(tokens: list[str], n_min: int, n_max: int) -> list[str]:
    out = []
    for n in range(n_min, n_max + 1):
        out.extend(" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return out


def charwb_ngrams(tokens: list[str], n_min: int, n_max: int) -> list[str]:
    """Char n-grams that never span a space; tokens are space-padded."""
    out = []
    for token in tokens:
        padded = f" {token} "
        for n in range(n_min, n_max + 1):
            if n >= len(padded):
                out.append(padded)
                break
            out.extend(padded[i : i + n] for i in range(len(padded) - n + 1))
    return out


@dataclass
class VocabularyModel:
    char_vocab: dict[str, int]
    word_vocab: dict[str, int]
    wordbound_vocab: dict[str, int]
    bow_pre: list[str]
    bow_neu: list[str]
    bow_opp: list[str]
    ngram_range: tuple[int, int] = (1, 4)
    selection_mask: set[int] | None = None

    @property
    def n_text_columns(self) -> int:
        return len(self.char_vocab) + len(self.word_vocab) + len(self.wordbound_vocab)

    @property
    def sparse_dim(self) -> int:
        # the three BOW hit counters occupy the last three sparse columns
        return self.n_text_columns + 3

    @property
    def total_dim(self) -> int:
        return self.sparse_dim + N_NUMERIC + 1

    def bow_list(self, label: EmotionLabel) -> list[str]:
        return {
            EmotionLabel.PRECAUTION: self.bow_pre,
            EmotionLabel.NEUTRAL: self.bow_neu,
            EmotionLabel.OPPORTUNITY: self.bow_opp,
        }[label]

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": VOCAB_FORMAT_VERSION,
                "ngram_range": list(self.ngram_range),
                "char_vocab": self.char_vocab,
                "word_vocab": self.word_vocab,
                "wordbound_vocab": self.wordbound_vocab,
                "bow_pre": self.bow_pre,
                "bow_neu": self.bow_neu,
                "bow_opp": self.bow_opp,
                "selection_mask": sorted(self.selection_mask)
                if self.selection_mask is not None
                else None,
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, payload: str) -> "VocabularyModel":
        data = json.loads(payload)
        if data.get("version") != VOCAB_FORMAT_VERSION:
            raise VocabularyError(f"unsupported vocabulary version: {data.get('version')}")
        return cls(
            char_vocab=data["char_vocab"],
            word_vocab=data["word_vocab"],
            wordbound_vocab=data["wordbound_vocab"],
            bow_pre=data["bow_pre"],
            bow_neu=data["bow_neu"],
            bow_opp=data["bow_opp"],
            ngram_range=tuple(data["ngram_range"]),
            selection_mask=set(data["selection_mask"])
            if data["selection_mask"] is not None
            else None,
        )


@dataclass(frozen=True)
class FeatureVector:
    sparse_counts: dict[int, float]
    numeric: tuple[int, ...]
    trend: bool
    sparse_dim: int
    label: EmotionLabel | None = None

    def __post_init__(self):
        if len(self.numeric) != N_NUMERIC:
            raise ValueError(f"numeric block must have {N_NUMERIC} entries")

    @property
    def total_dim(self) -> int:
        return self.sparse_dim + N_NUMERIC + 1

    def dense_view(self) -> np.ndarray:
        """Low-dimensional view for tree learners: BOW counters, numeric
        counters and the trend flag."""
        bow = [
            self.sparse_counts.get(self.sparse_dim - 3 + k, 0.0) for k in range(3)
        ]
        return np.array([*bow, *self.numeric, float(self.trend)], dtype=float)

    def items(self):
        """All nonzero (global column, value) pairs."""
        yield from self.sparse_counts.items()
        for i, v in enumerate(self.numeric):
            if v:
                yield self.sparse_dim + i, float(v)
        if self.trend:
            yield self.sparse_dim + N_NUMERIC, 1.0


def _norm_tokens(seg: ProcessedSegment) -> list[str]:
    return [t.casefold() for t in seg.tokens]


def _df_filter(doc_freq: Counter, n_docs: int, min_df: float, max_df: float) -> dict[str, int]:
    lo = min_df * n_docs
    hi = max_df * n_docs
    kept = sorted(term for term, df in doc_freq.items() if lo <= df <= hi)
    return {term: i for i, term in enumerate(kept)}


def fit_vocabularies(
    corpus: list[ProcessedSegment],
    ngram_range: tuple[int, int] = (1, 4),
    max_df: float = 0.5,
    min_df: float = 0.001,
    bow_size: int = 500,
) -> VocabularyModel:
    """Fit the three textual vocabularies and per-emotion exclusive BOWs."""
    if not corpus:
        raise VocabularyError("empty fitting corpus")
    n_min, n_max = ngram_range
    char_df: Counter = Counter()
    word_df: Counter = Counter()
    wb_df: Counter = Counter()
    class_docs: dict[EmotionLabel, set[str]] = {c: set() for c in BOW_CLASSES}
    term_freq: Counter = Counter()

    for seg in corpus:
        tokens = _norm_tokens(seg)
        text = " ".join(tokens)
        char_df.update(set(char_ngrams(text, n_min, n_max)))
        word_df.update(set(word_ngrams(tokens, n_min, n_max)))
        wb_df.update(set(charwb_ngrams(tokens, n_min, n_max)))
        if seg.label is not None:
            candidates = word_ngrams(tokens, 1, 2)
            class_docs[seg.label].update(candidates)
            term_freq.update(candidates)

    n_docs = len(corpus)
    char_vocab = _df_filter(char_df, n_docs, min_df, max_df)
    word_vocab = _df_filter(word_df, n_docs, min_df, max_df)
    wb_vocab = _df_filter(wb_df, n_docs, min_df, max_df)

    bows: dict[EmotionLabel, list[str]] = {}
    for cls in BOW_CLASSES:
        others = set().union(*(class_docs[o] for o in BOW_CLASSES if o is not cls))
        exclusive = class_docs[cls] - others
        ranked = sorted(exclusive, key=lambda t: (-term_freq[t], t))
        bows[cls] = ranked[:bow_size]

    return VocabularyModel(
        char_vocab=char_vocab,
        word_vocab=word_vocab,
        wordbound_vocab=wb_vocab,
        bow_pre=bows[EmotionLabel.PRECAUTION],
        bow_neu=bows[EmotionLabel.NEUTRAL],
        bow_opp=bows[EmotionLabel.OPPORTUNITY],
        ngram_range=(n_min, n_max),
    )


def extract_numeric(
    seg: ProcessedSegment, pre_clean_text: str, lx: LexiconSet
) -> tuple[int, ...]:
    """The 20 numeric counters.

    Number/percentage/mark counts come from ``pre_clean_text`` (the
    asset-tagged text before stopword removal); lexicon counts come from the
    processed lemmas. Date-like tokens are not numeric values; unsigned
    numbers count as positive.
    """
    text = _DATE_RE.sub(" ", pre_clean_text)
    neg_num = pos_num = neg_perc = pos_perc = total_num = total_perc = 0
    for m in NUMBER_RE.finditer(text):
        token = m.group(0)
        negative = token.startswith("-")
        if token.endswith("%"):
            total_perc += 1
            neg_perc += negative
            pos_perc += not negative
        else:
            total_num += 1
            neg_num += negative
            pos_num += not negative

    words = [w.casefold() for w in re.findall(r"\w[\w.]*", pre_clean_text, re.UNICODE)]
    fin_abbr = sum(w in lx.abbreviations for w in words)
    exclamation = pre_clean_text.count("!") + pre_clean_text.count("¡")
    interrogation = pre_clean_text.count("?") + pre_clean_text.count("¿")

    lemmas = [t.casefold() for t in seg.tokens]
    adverb_hits = [lx.adverbs[t] for t in lemmas if t in lx.adverbs]
    adverbs = len(adverb_hits)
    adv_neg = sum("negation" in c for c in adverb_hits)
    adv_pos = sum("affirmation" in c for c in adverb_hits)
    adv_doubt = sum("doubt" in c for c in adverb_hits)
    adv_int = sum("intensifier" in c for c in adverb_hits)

    pol = [lx.polarity.get(t) for t in lemmas]
    emo = [lx.emotions.get(t) for t in lemmas]

    return (
        seg.raw_len,
        neg_num,
        pos_num,
        total_num,
        neg_perc,
        pos_perc,
        total_perc,
        fin_abbr,
        exclamation,
        interrogation,
        adverbs,
        adv_neg,
        adv_pos,
        adv_doubt,
        adv_int,
        pol.count("negative"),
        pol.count("neutral"),
        pol.count("positive"),
        emo.count("negative_emotion"),
        emo.count("positive_emotion"),
    )


@dataclass
class PriceSeries:
    """Per-ticker closing prices by date."""

    closes: dict[str, dict[date, float]] = field(default_factory=dict)

    def add(self, ticker: str, day: date, close: float) -> None:
        if close <= 0:
            raise ValueError(f"non-positive close for {ticker} on {day}")
        series = self.closes.setdefault(ticker.casefold(), {})
        if day in series:
            raise ValueError(f"duplicate price for {ticker} on {day}")
        series[day] = close

    def get(self, ticker: str, day: date) -> float | None:
        return self.closes.get(ticker.casefold(), {}).get(day)

    @classmethod
    def from_csv(cls, path: str) -> "PriceSeries":
        series = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].startswith("#") or row[0] == "ticker":
                    continue
                ticker, day, close = row[0], row[1], row[2]
                series.add(ticker, date.fromisoformat(day), float(close))
        return series


def _prev_working_day(day: date) -> date:
    day -= timedelta(days=1)
    while day.weekday() >= 5:
        day -= timedelta(days=1)
    return day


def _next_working_day(day: date) -> date:
    day += timedelta(days=1)
    while day.weekday() >= 5:
        day += timedelta(days=1)
    return day


def compute_trend(ticker: str, post_time: datetime, prices: PriceSeries) -> bool:
    """True iff the close after the post date exceeds the close before it.

    Working days skip Saturday/Sunday (no holiday calendar). Raises
    TrendUnavailableError when either close is missing.
    """
    post_day = post_time.date()
    prev_day = _prev_working_day(post_day)
    next_day = _next_working_day(post_day)
    prev_close = prices.get(ticker, prev_day)
    next_close = prices.get(ticker, next_day)
    if prev_close is None or next_close is None:
        raise TrendUnavailableError(
            f"missing close for {ticker} on {prev_day} or {next_day}"
        )
    return next_close > prev_close


def vectorize(
    seg: ProcessedSegment,
    vm: VocabularyModel,
    numeric: tuple[int, ...],
    trend: bool,
    label: EmotionLabel | None = None,
) -> FeatureVector:
    """Map one processed segment onto the hybrid feature space."""
    if vm is None:
        raise VocabularyError("vocabulary model not fitted")
    tokens = _norm_tokens(seg)
    text = " ".join(tokens)
    n_min, n_max = vm.ngram_range

    counts: dict[int, float] = {}
    offset = 0
    for grams, vocab in (
        (char_ngrams(text, n_min, n_max), vm.char_vocab),
        (word_ngrams(tokens, n_min, n_max), vm.word_vocab),
        (charwb_ngrams(tokens, n_min, n_max), vm.wordbound_vocab),
    ):
        for gram in grams:
            idx = vocab.get(gram)
            if idx is not None:
                key = offset + idx
                counts[key] = counts.get(key, 0.0) + 1.0
        offset += len(vocab)

    uni_bi = Counter(word_ngrams(tokens, 1, 2))
    for k, bow in enumerate((vm.bow_pre, vm.bow_neu, vm.bow_opp)):
        hits = float(sum(uni_bi[entry] for entry in bow))
        if hits:
            counts[vm.n_text_columns + k] = hits

    if vm.selection_mask is not None:
        counts = {i: v for i, v in counts.items() if i in vm.selection_mask}
        numeric = tuple(
            v if (vm.sparse_dim + i) in vm.selection_mask else 0
            for i, v in enumerate(numeric)
        )
        if (vm.sparse_dim + N_NUMERIC) not in vm.selection_mask:
            trend = False

    return FeatureVector(
        sparse_counts=counts,
        numeric=tuple(numeric),
        trend=trend,
        sparse_dim=vm.sparse_dim,
        label=label,
    )
