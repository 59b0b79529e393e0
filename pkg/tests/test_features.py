from collections import Counter
from datetime import date, datetime

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finemo.features import (
    N_NUMERIC,
    NUMERIC_NAMES,
    FeatureVector,
    PriceSeries,
    TrendUnavailableError,
    VocabularyError,
    VocabularyModel,
    char_ngrams,
    charwb_ngrams,
    compute_trend,
    extract_numeric,
    fit_vocabularies,
    vectorize,
    word_ngrams,
)
from finemo.segmenter import EmotionLabel, Segment, find_assets
from finemo.textproc import ProcessedSegment, process, tag_assets
from tests.conftest import SAMPLE_DIR

import os

# published counter profiles for the two reference texts
SAMPLE_1_TEXT = (
    "30-07-2019 #Ibex35 -2,48% sigen llegando resultados llega agosto mucho "
    "cuidado con piratas de guante blancoveremos si es movido o no..."
)
SAMPLE_1_EXPECTED = {
    "LEN_TWEET": 135,
    "NEG_PERC": 1,
    "TOTAL_PERC": 1,
    "ADVERBS": 2,
    "ADVERBS_NEG": 1,
    "ADVERBS_INT": 1,
    "NEG_POLARITY": 1,
    "POS_POLARITY": 2,
}

SAMPLE_2_TEXT = (
    "#IBEX35 La superación, otra vez, del 9375 del índice, aupado "
    "posiblemente por una recuperación de la banca, que ha estado muy "
    "castigada ya."
)
SAMPLE_2_EXPECTED = {
    "LEN_TWEET": 139,
    "POS_NUM": 1,
    "TOTAL_NUM": 1,
    "ADVERBS": 2,
    "ADVERBS_DOUBT": 1,
    "ADVERBS_INT": 1,
    "POS_POLARITY": 2,
}


def _numeric_for_text(text, lx, focus="IBEX35"):
    seg = Segment(tweet_id="t", text=text, assets=tuple(find_assets(text, lx)), focus=focus)
    ps = process(seg, lx)
    tagged = tag_assets(text, focus, lx)
    return ps, extract_numeric(ps, tagged, lx)


def _expected_tuple(profile):
    return tuple(profile.get(name, 0) for name in NUMERIC_NAMES)


def test_numeric_golden_sample_1(lx):
    assert len(SAMPLE_1_TEXT) == 135
    _, numeric = _numeric_for_text(SAMPLE_1_TEXT, lx)
    assert numeric == _expected_tuple(SAMPLE_1_EXPECTED)


def test_numeric_golden_sample_2(lx):
    assert len(SAMPLE_2_TEXT) == 139
    _, numeric = _numeric_for_text(SAMPLE_2_TEXT, lx)
    assert numeric == _expected_tuple(SAMPLE_2_EXPECTED)


def test_bow_hit_goldens(lx):
    ps1, _ = _numeric_for_text(SAMPLE_1_TEXT, lx)
    ps2, _ = _numeric_for_text(SAMPLE_2_TEXT, lx)
    # BOW entries are stored and matched casefolded, tags included
    vm = VocabularyModel(
        char_vocab={}, word_vocab={}, wordbound_vocab={},
        bow_pre=["mucho cuidar"], bow_neu=[], bow_opp=["vez number"],
    )
    fv1 = vectorize(ps1, vm, (0,) * N_NUMERIC, False)
    fv2 = vectorize(ps2, vm, (0,) * N_NUMERIC, False)
    pre_col, neu_col, opp_col = vm.n_text_columns, vm.n_text_columns + 1, vm.n_text_columns + 2
    assert fv1.sparse_counts.get(pre_col) == 1.0
    assert fv1.sparse_counts.get(opp_col) is None
    assert fv2.sparse_counts.get(opp_col) == 1.0
    assert fv2.sparse_counts.get(pre_col) is None


def test_trend_goldens():
    prices = PriceSeries.from_csv(os.path.join(SAMPLE_DIR, "prices.csv"))
    # posted Tuesday 2019-07-30: close falls 9200 -> 9100
    assert compute_trend("IBEX35", datetime(2019, 7, 30, 10, 0), prices) is False
    # posted Tuesday 2019-08-06: close rises 9000 -> 9050
    assert compute_trend("IBEX35", datetime(2019, 8, 6, 10, 0), prices) is True


def test_trend_skips_weekends():
    prices = PriceSeries()
    prices.add("XX", date(2019, 8, 2), 10.0)  # Friday
    prices.add("XX", date(2019, 8, 6), 12.0)  # Tuesday
    # posted Monday: previous working day is Friday, next is Tuesday
    assert compute_trend("XX", datetime(2019, 8, 5, 9, 0), prices) is True


def test_trend_missing_close_raises():
    prices = PriceSeries()
    prices.add("XX", date(2019, 8, 2), 10.0)
    with pytest.raises(TrendUnavailableError):
        compute_trend("XX", datetime(2019, 8, 5, 9, 0), prices)


def test_price_series_validation():
    prices = PriceSeries()
    with pytest.raises(ValueError):
        prices.add("XX", date(2019, 8, 2), 0.0)
    prices.add("XX", date(2019, 8, 2), 10.0)
    with pytest.raises(ValueError):
        prices.add("xx", date(2019, 8, 2), 11.0)  # duplicate, case-insensitive


def test_ngram_analyzers_small_cases():
    assert char_ngrams("abc", 1, 2) == ["a", "b", "c", "ab", "bc"]
    assert word_ngrams(["a", "b", "c"], 1, 2) == ["a", "b", "c", "a b", "b c"]
    # word-bound grams pad each token and never cross spaces
    grams = charwb_ngrams(["ab"], 2, 4)
    assert " a" in grams and "b " in grams and " ab " in grams
    assert all(" " not in g or g.startswith(" ") or g.endswith(" ") for g in grams)
    # tokens shorter than n contribute the whole padded token once
    assert charwb_ngrams(["a"], 4, 4) == [" a "]


def _corpus(labeled=True):
    docs = [
        ("mucho cuidar banca", EmotionLabel.PRECAUTION),
        ("mucho cuidar caída", EmotionLabel.PRECAUTION),
        ("mercado sesión normal", EmotionLabel.NEUTRAL),
        ("mercado sesión banca", EmotionLabel.NEUTRAL),
        ("ganancia alcista banca", EmotionLabel.OPPORTUNITY),
        ("ganancia subir fuerte", EmotionLabel.OPPORTUNITY),
    ]
    return [
        ProcessedSegment(
            tweet_id=f"d{i}", focus="X", tokens=tuple(text.split()),
            raw_len=len(text), label=(label if labeled else None),
        )
        for i, (text, label) in enumerate(docs)
    ]


def test_bow_exclusivity():
    vm = fit_vocabularies(_corpus(), min_df=0.0, max_df=1.0)
    pre, neu, opp = set(vm.bow_pre), set(vm.bow_neu), set(vm.bow_opp)
    assert "mucho cuidar" in pre
    assert not pre & neu and not pre & opp and not neu & opp
    # terms in two classes are excluded everywhere
    assert "banca" not in pre | neu | opp


def test_bow_ranking_frequency_then_lexicographic():
    vm = fit_vocabularies(_corpus(), min_df=0.0, max_df=1.0, bow_size=3)
    # "ganancia" appears twice in opportunity docs, everything else once
    assert vm.bow_opp[0] == "ganancia"
    assert vm.bow_opp[1:] == sorted(vm.bow_opp[1:])


def test_df_bounds_respected():
    corpus = _corpus()
    vm = fit_vocabularies(corpus, min_df=0.3, max_df=0.5)
    n = len(corpus)
    for vocab, analyzer in (
        (vm.char_vocab, lambda s: char_ngrams(" ".join(s.tokens), 1, 4)),
        (vm.word_vocab, lambda s: word_ngrams(list(s.tokens), 1, 4)),
        (vm.wordbound_vocab, lambda s: charwb_ngrams(list(s.tokens), 1, 4)),
    ):
        for term in vocab:
            df = sum(term in set(analyzer(seg)) for seg in corpus)
            assert 0.3 * n <= df <= 0.5 * n, term


def test_vectorize_counts_match_manual_recount():
    corpus = _corpus()
    vm = fit_vocabularies(corpus, min_df=0.0, max_df=1.0)
    seg = corpus[0]
    fv = vectorize(seg, vm, (0,) * N_NUMERIC, False, label=seg.label)
    text = " ".join(seg.tokens)
    expected = Counter()
    for gram in char_ngrams(text, 1, 4):
        if gram in vm.char_vocab:
            expected[vm.char_vocab[gram]] += 1
    offset = len(vm.char_vocab)
    for gram in word_ngrams(list(seg.tokens), 1, 4):
        if gram in vm.word_vocab:
            expected[offset + vm.word_vocab[gram]] += 1
    offset += len(vm.word_vocab)
    for gram in charwb_ngrams(list(seg.tokens), 1, 4):
        if gram in vm.wordbound_vocab:
            expected[offset + vm.wordbound_vocab[gram]] += 1
    text_part = {k: v for k, v in fv.sparse_counts.items() if k < vm.n_text_columns}
    assert text_part == {k: float(v) for k, v in expected.items()}


def test_dense_view_and_items_consistent():
    numeric = tuple(range(N_NUMERIC))
    fv = FeatureVector(
        sparse_counts={0: 2.0, 7: 1.0, 97: 3.0, 98: 1.0, 99: 4.0},
        numeric=numeric, trend=True, sparse_dim=100,
    )
    dense = fv.dense_view()
    assert list(dense[:3]) == [3.0, 1.0, 4.0]  # last three sparse columns
    assert list(dense[3 : 3 + N_NUMERIC]) == [float(v) for v in numeric]
    assert dense[-1] == 1.0
    items = dict(fv.items())
    assert items[0] == 2.0
    assert items[100 + 5] == 5.0  # numeric block offset by sparse_dim
    assert items[100 + N_NUMERIC] == 1.0  # trend column
    assert 100 + 0 not in items  # zero numerics omitted


def test_numeric_length_validated():
    with pytest.raises(ValueError):
        FeatureVector(sparse_counts={}, numeric=(1, 2), trend=False, sparse_dim=10)


def test_selection_mask_filters_all_blocks():
    corpus = _corpus()
    vm = fit_vocabularies(corpus, min_df=0.0, max_df=1.0)
    keep_numeric = vm.sparse_dim + 2
    vm.selection_mask = {0, 1, keep_numeric}  # drops trend and most columns
    fv = vectorize(corpus[0], vm, tuple(range(N_NUMERIC)), True)
    assert set(fv.sparse_counts) <= {0, 1}
    assert fv.numeric[2] == 2
    assert sum(fv.numeric) == 2  # every other numeric zeroed
    assert fv.trend is False


def test_vocabulary_json_round_trip():
    vm = fit_vocabularies(_corpus(), min_df=0.0, max_df=1.0)
    vm.selection_mask = {1, 5, 9}
    back = VocabularyModel.from_json(vm.to_json())
    assert back.char_vocab == vm.char_vocab
    assert back.word_vocab == vm.word_vocab
    assert back.wordbound_vocab == vm.wordbound_vocab
    assert back.bow_pre == vm.bow_pre
    assert back.selection_mask == vm.selection_mask
    assert back.ngram_range == vm.ngram_range


def test_vocabulary_version_check():
    vm = fit_vocabularies(_corpus(), min_df=0.0, max_df=1.0)
    payload = vm.to_json().replace('"version": 1', '"version": 99')
    with pytest.raises(VocabularyError, match="version"):
        VocabularyModel.from_json(payload)


def test_empty_corpus_rejected():
    with pytest.raises(VocabularyError):
        fit_vocabularies([])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=N_NUMERIC, max_size=N_NUMERIC),
       st.booleans())
def test_items_reconstruct_dense_blocks(values, trend):
    fv = FeatureVector(
        sparse_counts={}, numeric=tuple(values), trend=trend, sparse_dim=10
    )
    items = dict(fv.items())
    rebuilt = [items.get(10 + i, 0.0) for i in range(N_NUMERIC)]
    assert rebuilt == [float(v) for v in values]
    assert items.get(10 + N_NUMERIC, 0.0) == float(trend)


def test_marks_and_lexicon_counters(lx):
    text = "¡Cuidado! ¿Sube el ebitda? miedo y alegría, no posiblemente"
    seg = Segment(tweet_id="t", text=text, assets=(("BBVA", (0, 1)),), focus="BBVA")
    ps = process(seg, lx)
    numeric = dict(zip(NUMERIC_NAMES, extract_numeric(ps, text, lx)))
    assert numeric["EXCLAMATION"] == 2  # both ¡ and !
    assert numeric["INTERROGATION"] == 2
    assert numeric["FIN_ABBR"] == 1
    assert numeric["NEG_EMOTION"] == 1  # miedo
    assert numeric["POS_EMOTION"] == 1  # alegría
    assert numeric["ADVERBS_NEG"] == 1  # no
    assert numeric["ADVERBS_DOUBT"] == 1  # posiblemente
