"""Dictionary resources used across the pipeline.

All resources are UTF-8 plain-text files, one entry per line, living in a
single directory:

    tickers.tsv        canonical<TAB>alias1<TAB>alias2...
    stopwords.txt      one lowercase word per line
    keepwords.txt      semantically loaded function words kept despite stopwords
    polarity.tsv       word<TAB>neg|neu|pos
    emotions.tsv       word<TAB>neg|pos
    adverbs.tsv        word<TAB>comma-separated classes (negation, affirmation,
                       doubt, intensifier)
    abbreviations.txt  financial abbreviations
    freq.tsv           word<TAB>relative frequency in (0, 1]
    dictionary.tsv     inflected form<TAB>lemma

Lines starting with '#' are comments.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field


class LexiconError(Exception):
    """Raised on missing files, malformed lines or duplicate entries."""


POLARITY_CODES = {"neg": "negative", "neu": "neutral", "pos": "positive"}
EMOTION_CODES = {"neg": "negative_emotion", "pos": "positive_emotion"}
ADVERB_CLASSES = frozenset({"negation", "affirmation", "doubt", "intensifier"})

_FILES = {
    "tickers": "tickers.tsv",
    "stopwords": "stopwords.txt",
    "keepwords": "keepwords.txt",
    "polarity": "polarity.tsv",
    "emotions": "emotions.tsv",
    "adverbs": "adverbs.tsv",
    "abbreviations": "abbreviations.txt",
    "freq": "freq.tsv",
    "dictionary": "dictionary.tsv",
}


@dataclass(frozen=True)
class LexiconSet:
    """Immutable bundle of all lexicon resources. Safe to share across threads."""

    tickers: dict[str, str]  # case-folded alias -> canonical ticker
    stopwords: frozenset[str]
    keep_words: frozenset[str]
    polarity: dict[str, str]  # word -> negative|neutral|positive
    emotions: dict[str, str]  # word -> negative_emotion|positive_emotion
    adverbs: dict[str, frozenset[str]]
    abbreviations: frozenset[str]
    freq_corpus: dict[str, float]
    dictionary: dict[str, str]  # inflected form -> lemma
    boundary_words: tuple[str, ...] = field(
        default=("mientras", "aunque", "pero", "y", "que")
    )

    @property
    def canonical_tickers(self) -> frozenset[str]:
        return frozenset(self.tickers.values())


def _read_lines(path: str, name: str) -> list[tuple[int, str]]:
    if not os.path.isfile(path):
        raise LexiconError(f"{name} lexicon not found: {path}")
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            out.append((lineno, line))
    return out


def _malformed(name: str, lineno: int, line: str) -> LexiconError:
    return LexiconError(f"malformed {name} line {lineno}: {line!r}")


def load_lexicons(dir_path: str, boundary_words: tuple[str, ...] | None = None) -> LexiconSet:
    """Load and validate all lexicon files from ``dir_path``.

    Entries are case-folded. Keep-words win over stopwords. Duplicate ticker
    aliases (after case folding) are an error.
    """
    paths = {key: os.path.join(dir_path, fname) for key, fname in _FILES.items()}

    tickers: dict[str, str] = {}
    for lineno, line in _read_lines(paths["tickers"], "tickers"):
        parts = [p.strip() for p in line.split("\t") if p.strip()]
        if not parts:
            raise _malformed("tickers", lineno, line)
        canonical = parts[0]
        for alias in parts:
            key = alias.casefold()
            if key in tickers:
                raise LexiconError(
                    f"duplicate ticker alias {alias!r} (tickers.tsv line {lineno})"
                )
            tickers[key] = canonical

    stopwords = {line.strip().casefold() for _, line in _read_lines(paths["stopwords"], "stopwords")}
    keep_words = {line.strip().casefold() for _, line in _read_lines(paths["keepwords"], "keepwords")}
    stopwords -= keep_words

    polarity: dict[str, str] = {}
    for lineno, line in _read_lines(paths["polarity"], "polarity"):
        parts = line.split("\t")
        if len(parts) != 2 or parts[1].strip() not in POLARITY_CODES:
            raise _malformed("polarity", lineno, line)
        polarity[parts[0].strip().casefold()] = POLARITY_CODES[parts[1].strip()]

    emotions: dict[str, str] = {}
    for lineno, line in _read_lines(paths["emotions"], "emotions"):
        parts = line.split("\t")
        if len(parts) != 2 or parts[1].strip() not in EMOTION_CODES:
            raise _malformed("emotions", lineno, line)
        emotions[parts[0].strip().casefold()] = EMOTION_CODES[parts[1].strip()]

    adverbs: dict[str, frozenset[str]] = {}
    for lineno, line in _read_lines(paths["adverbs"], "adverbs"):
        parts = line.split("\t")
        if len(parts) != 2:
            raise _malformed("adverbs", lineno, line)
        classes = frozenset(c.strip() for c in parts[1].split(",") if c.strip())
        if not classes or not classes <= ADVERB_CLASSES:
            raise _malformed("adverbs", lineno, line)
        adverbs[parts[0].strip().casefold()] = classes

    abbreviations = {
        line.strip().casefold() for _, line in _read_lines(paths["abbreviations"], "abbreviations")
    }

    freq_corpus: dict[str, float] = {}
    for lineno, line in _read_lines(paths["freq"], "freq"):
        parts = line.split("\t")
        if len(parts) != 2:
            raise _malformed("freq", lineno, line)
        try:
            value = float(parts[1])
        except ValueError:
            raise _malformed("freq", lineno, line) from None
        if not 0.0 < value <= 1.0:
            raise LexiconError(f"freq value out of (0,1] on line {lineno}: {line!r}")
        freq_corpus[parts[0].strip().casefold()] = value

    dictionary: dict[str, str] = {}
    for lineno, line in _read_lines(paths["dictionary"], "dictionary"):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise _malformed("dictionary", lineno, line)
        dictionary[parts[0].strip().casefold()] = parts[1].strip().casefold()

    kwargs = {}
    if boundary_words is not None:
        kwargs["boundary_words"] = tuple(boundary_words)
    return LexiconSet(
        tickers=tickers,
        stopwords=frozenset(stopwords),
        keep_words=frozenset(keep_words),
        polarity=polarity,
        emotions=emotions,
        adverbs=adverbs,
        abbreviations=frozenset(abbreviations),
        freq_corpus=freq_corpus,
        dictionary=dictionary,
        **kwargs,
    )


def lookup_ticker(text_token: str, lx: LexiconSet) -> str | None:
    """Return the canonical ticker for a token, or None.

    Leading $/#/@ markers are stripped before matching so detection works on
    raw, uncleaned text. Matching is case-insensitive.
    """
    token = text_token.lstrip("$#@").casefold()
    if not token:
        return None
    hit = lx.tickers.get(token)
    if hit is not None:
        return hit
    # tolerate trailing sentence punctuation glued to the token
    return lx.tickers.get(token.rstrip(".,;:!?"))
