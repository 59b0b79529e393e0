"""Streaming per-asset financial emotion classification.

Splits financial microblog posts into per-asset declarative segments and
classifies each segment as precaution, neutral or opportunity with an
incrementally trained two-stage stacking classifier.
"""

from finemo.lexicons import LexiconSet, load_lexicons, lookup_ticker
from finemo.segmenter import EmotionLabel, RawTweet, Segment, replicate_per_asset, segment_tweet
from finemo.textproc import ProcessedSegment, process

__all__ = [
    "LexiconSet",
    "load_lexicons",
    "lookup_ticker",
    "EmotionLabel",
    "RawTweet",
    "Segment",
    "segment_tweet",
    "replicate_per_asset",
    "ProcessedSegment",
    "process",
]
