"""Segment text normalization.

Order is fixed: asset tagging -> number tagging -> filtering/cleaning ->
hashtag/compound splitting -> lemmatization with spelling correction.
Tagging precedes cleaning so tickers survive the removal of $/@/# markers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from finemo.lexicons import LexiconSet, lookup_ticker
from finemo.segmenter import FOCUS_TAG, OTHER_TAG, NUMBER_RE, Segment, _TOKEN_RE

TAGS = (FOCUS_TAG, OTHER_TAG, "NEGATIVE", "POSITIVE", "NUMBER")

_URL_RE = re.compile(r"(?:https?://\S+|\bt\.co/\S+|\bwww\.\S+)")
_RT_RE = re.compile(r"\bRT\b[: ]?")
# date-like digit groups joined by hyphens or slashes are not numeric values
_DATE_RE = re.compile(r"\b\d{1,4}(?:[-/]\d{1,2}){1,2}(?:[-/]\d{1,4})?\b")


@dataclass(frozen=True)
class ProcessedSegment:
    tweet_id: str
    focus: str
    tokens: tuple[str, ...]
    raw_len: int
    label: object = None  # optional EmotionLabel, carried through

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def tag_assets(text: str, focus: str | None, lx: LexiconSet) -> str:
    """Replace every asset mention with TICKER (the focus) or OTHER_TICKER."""
    out = []
    last = 0
    for m in _TOKEN_RE.finditer(text):
        token = m.group(0).rstrip(".")
        if token in (FOCUS_TAG, OTHER_TAG):
            continue
        ticker = lookup_ticker(token, lx)
        if ticker is None:
            continue
        tag = FOCUS_TAG if focus is not None and ticker == focus else OTHER_TAG
        out.append(text[last:m.start()])
        out.append(tag)
        last = m.start() + len(token)
    out.append(text[last:])
    return "".join(out)


_DATE_OR_NUMBER_RE = re.compile(rf"(?P<date>{_DATE_RE.pattern})|{NUMBER_RE.pattern}")


def tag_numbers(text: str) -> str:
    """Replace numeric tokens with NEGATIVE/POSITIVE/NUMBER tags.

    The sign and a trailing percent sign are consumed with the number.
    Date-like patterns are left alone.
    """

    def _tag(m: re.Match) -> str:
        token = m.group(0)
        if m.group("date"):
            return token
        if token.startswith("-"):
            return "NEGATIVE"
        if token.startswith("+"):
            return "POSITIVE"
        return "NUMBER"

    return _DATE_OR_NUMBER_RE.sub(_tag, text)


def clean_filter(text: str, lx: LexiconSet) -> str:
    """Drop URLs, RT markers, $/@/# characters and stopwords; keep the
    keep-words; collapse whitespace."""
    text = _URL_RE.sub(" ", text)
    text = _RT_RE.sub(" ", text)
    text = text.replace("$", "").replace("@", "").replace("#", "")
    kept = []
    for token in text.split():
        stripped = token.strip(".,;:!?¡¿()\"'")
        if not stripped:
            continue
        if stripped in TAGS:
            kept.append(stripped)
            continue
        word = stripped.casefold()
        if word in lx.stopwords and word not in lx.keep_words:
            continue
        kept.append(word)
    return " ".join(kept)


def split_hashtags(token: str, lx: LexiconSet) -> list[str]:
    """Decompose an out-of-dictionary compound into dictionary words.

    Dynamic programming over split points maximizing the product of corpus
    frequencies; the token is returned unchanged when it is already a word
    or no full segmentation exists.
    """
    if token in lx.dictionary or token in TAGS:
        return [token]
    n = len(token)
    best: list[float | None] = [None] * (n + 1)
    back: list[int] = [0] * (n + 1)
    best[0] = 0.0  # log-space
    for i in range(1, n + 1):
        for j in range(max(0, i - 30), i):
            piece = token[j:i]
            if best[j] is None or piece not in lx.dictionary:
                continue
            freq = lx.freq_corpus.get(piece)
            if freq is None or freq <= 0:
                continue
            score = best[j] + math.log(freq)
            if best[i] is None or score > best[i]:
                best[i] = score
                back[i] = j
    if best[n] is None:
        return [token]
    parts = []
    i = n
    while i > 0:
        parts.append(token[back[i]:i])
        i = back[i]
    parts.reverse()
    return parts


def _edit_distance(a: str, b: str, cap: int = 2) -> int:
    if abs(len(a) - len(b)) > cap:
        return cap + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        if min(cur) > cap:
            return cap + 1
        prev = cur
    return prev[-1]


def lemmatize_correct(token: str, lx: LexiconSet) -> str:
    """Dictionary lemma, or the lemma of the closest dictionary form.

    Spelling correction considers forms within edit distance 2, preferring
    the candidate with the highest corpus frequency, ties broken
    lexicographically. Uncorrectable tokens pass through unchanged.
    """
    if token in TAGS:
        return token
    lemma = lx.dictionary.get(token)
    if lemma is not None:
        return lemma
    best: tuple[int, float, str] | None = None
    for form in lx.dictionary:
        dist = _edit_distance(token, form)
        if dist > 2:
            continue
        key = (dist, -lx.freq_corpus.get(form, 0.0), form)
        if best is None or key < best:
            best = key
    if best is None:
        return token
    return lx.dictionary[best[2]]


def process(seg: Segment, lx: LexiconSet) -> ProcessedSegment:
    """Full normalization of one replicated segment."""
    raw_len = len(seg.text)
    text = tag_assets(seg.text, seg.focus, lx)
    text = tag_numbers(text)
    text = clean_filter(text, lx)
    tokens: list[str] = []
    for token in text.split():
        for word in split_hashtags(token, lx):
            tokens.append(lemmatize_correct(word, lx))
    if seg.focus is not None and FOCUS_TAG not in tokens:
        tokens.insert(0, FOCUS_TAG)
    return ProcessedSegment(
        tweet_id=seg.tweet_id,
        focus=seg.focus or "",
        tokens=tuple(tokens),
        raw_len=raw_len,
        label=seg.label,
    )
