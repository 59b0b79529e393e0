from hypothesis import given, settings
from hypothesis import strategies as st

from finemo.lexicons import LexiconSet
from finemo.segmenter import Segment, find_assets
from finemo.textproc import (
    clean_filter,
    lemmatize_correct,
    process,
    split_hashtags,
    tag_assets,
    tag_numbers,
)


def _segment(text, lx, focus=None):
    return Segment(tweet_id="t", text=text, assets=tuple(find_assets(text, lx)), focus=focus)


def _mini_lexicon(**overrides) -> LexiconSet:
    base = dict(
        tickers={},
        stopwords=frozenset(),
        keep_words=frozenset(),
        polarity={},
        emotions={},
        adverbs={},
        abbreviations=frozenset(),
        freq_corpus={},
        dictionary={},
    )
    base.update(overrides)
    return LexiconSet(**base)


def test_full_normalization_golden(lx):
    text = (
        "$Bankia sigue el crack bursátil. -1,925 euros, del IBEX35 "
        "#mayorcaída https://t.co/S73BxUSKiR"
    )
    ps = process(_segment(text, lx, focus="BKIA"), lx)
    assert ps.tokens == (
        "TICKER", "seguir", "bursátil", "NEGATIVE", "euros",
        "OTHER_TICKER", "mayor", "caída",
    )
    assert ps.raw_len == len(text)
    assert ps.focus == "BKIA"


def test_tag_assets_focus_vs_other(lx):
    out = tag_assets("$BKIA frente a BBVA", "BKIA", lx)
    assert out == "TICKER frente a OTHER_TICKER"
    out = tag_assets("$BKIA frente a BBVA", None, lx)
    assert out == "OTHER_TICKER frente a OTHER_TICKER"


def test_tag_numbers_cases():
    assert tag_numbers("-1,925 euros") == "NEGATIVE euros"
    assert tag_numbers("+8,08% arriba") == "POSITIVE arriba"
    assert tag_numbers("vale 9375 puntos") == "vale NUMBER puntos"
    # dates pass through untouched
    assert tag_numbers("30-07-2019 baja -2,48%") == "30-07-2019 baja NEGATIVE"
    assert tag_numbers("el 30/07 a las 9") == "el 30/07 a las NUMBER"


def test_clean_filter_drops_noise(lx):
    out = clean_filter("RT el mercado sube https://t.co/xyz $BBVA #hoy", lx)
    assert "https" not in out and "RT" not in out
    assert "$" not in out and "#" not in out
    assert "el" not in out.split()


def test_clean_filter_keeps_keepwords_and_tags(lx):
    out = clean_filter("no sube el TICKER, NEGATIVE!", lx)
    tokens = out.split()
    assert "no" in tokens  # keep-word despite stopword list
    assert "TICKER" in tokens and "NEGATIVE" in tokens  # tags survive punctuation


def test_split_hashtags_golden(lx):
    assert split_hashtags("mayorcaída", lx) == ["mayor", "caída"]
    assert split_hashtags("mayor", lx) == ["mayor"]  # already a word
    assert split_hashtags("zzzqqq", lx) == ["zzzqqq"]  # unsegmentable


def test_split_hashtags_maximizes_frequency_product():
    # "abc" splits as a|bc (0.5*0.4=0.2) or ab|c (0.3*0.3=0.09)
    mini = _mini_lexicon(
        dictionary={"a": "a", "bc": "bc", "ab": "ab", "c": "c"},
        freq_corpus={"a": 0.5, "bc": 0.4, "ab": 0.3, "c": 0.3},
    )
    assert split_hashtags("abc", mini) == ["a", "bc"]


def test_lemmatize_exact_and_corrected(lx):
    assert lemmatize_correct("sigue", lx) == "seguir"
    assert lemmatize_correct("sigen", lx) == "seguir"  # distance-1 misspelling
    assert lemmatize_correct("TICKER", lx) == "TICKER"
    assert lemmatize_correct("zzzzzzzz", lx) == "zzzzzzzz"


def test_correction_prefers_frequency_then_lexicographic():
    mini = _mini_lexicon(
        dictionary={"xyzb": "lemab", "xyzc": "lemac"},
        freq_corpus={"xyzb": 0.1, "xyzc": 0.9},
    )
    # both candidates at distance 1: higher frequency wins
    assert lemmatize_correct("xyza", mini) == "lemac"
    tie = _mini_lexicon(
        dictionary={"xyzb": "lemab", "xyzc": "lemac"},
        freq_corpus={"xyzb": 0.5, "xyzc": 0.5},
    )
    # frequency tie: lexicographically smaller form wins
    assert lemmatize_correct("xyza", tie) == "lemab"


def test_correction_caps_edit_distance():
    mini = _mini_lexicon(dictionary={"abcdefgh": "x"}, freq_corpus={"abcdefgh": 0.5})
    assert lemmatize_correct("abcde", mini) == "abcde"  # distance 3 > 2


def test_process_inserts_focus_tag_when_missing(lx):
    # focus asset mentioned only via an alias the cleaner strips is not the
    # case here; force it by passing focus without a mention
    seg = Segment(tweet_id="t", text="la banca sube", assets=(("BBVA", (0, 2)),), focus="BBVA")
    ps = process(seg, lx)
    assert ps.tokens[0] == "TICKER"


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(
    ["el", "mercado", "sube", "no", "muy", "$BBVA", "TICKER", "-2,5%", "hoy!", "RT"]
), min_size=1, max_size=10).map(" ".join))
def test_clean_filter_idempotent(lx, text):
    once = clean_filter(text, lx)
    assert clean_filter(once, lx) == once


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(
    ["el", "mercado", "sigue", "bursátil", "$BKIA", "BBVA", "-1,925", "euros", "#mayorcaída"]
), min_size=1, max_size=10).map(" ".join))
def test_process_deterministic_and_clean(lx, text):
    seg = _segment(text, lx, focus="BKIA")
    first = process(seg, lx)
    second = process(seg, lx)
    assert first.tokens == second.tokens
    for token in first.tokens:
        assert token and " " not in token
        assert "$" not in token and "#" not in token
