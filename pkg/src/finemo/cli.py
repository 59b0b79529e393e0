"""Command-line entry points for the streaming pipeline.

Subcommands:
  segment     tweets -> per-asset declarative segments (JSONL)
  process     tweets -> normalized per-asset token streams (JSONL)
  features    tweets + labels -> hybrid feature rows (JSONL) + vocabulary
  analyze     feature analysis: Pearson correlations and chi2 scores
  train-eval  prequential run with evaluation artifacts
  run         alias of train-eval; without labels, inference only
  agreement   annotator-agreement report from a label matrix (TSV)

Options come from flags or a YAML config file; flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from datetime import datetime

import numpy as np
import yaml

from finemo.evaluation import CLASS_ORDER, PrequentialReport, agreement_report
from finemo.features import (
    NUMERIC_NAMES,
    FeatureVector,
    PriceSeries,
    TrendUnavailableError,
    compute_trend,
    extract_numeric,
    fit_vocabularies,
    vectorize,
)
from finemo.lexicons import load_lexicons
from finemo.segmenter import EmotionLabel, RawTweet, replicate_per_asset, segment_tweet
from finemo.selection import select_percentile
from finemo.streamml import (
    RF_GRID,
    SGD_GRID,
    AdaptiveRandomForestClassifier,
    HoeffdingTreeClassifier,
    SGDLinearClassifier,
    StreamingNaiveBayes,
    grid_search,
    make_stacked,
    save_model,
)
from finemo.textproc import ProcessedSegment, process


class PipelineError(Exception):
    pass


@dataclass
class PipelineConfig:
    """Everything one run needs; mirrors the CLI flags one to one."""

    lexicons: str = "data/lexicons"
    tweets: str | None = None
    prices: str | None = None
    labels: str | None = None
    out: str = "out"
    warmup: int = 1000
    learner: str = "rf"  # nb | dt | rf | sgd
    stacked: bool = True
    seed: int = 0
    percentile: int = 0  # 0 disables chi2 percentile selection
    grid: str | None = None  # None | rf | sgd: warmup grid search
    ngram_min: int = 1
    ngram_max: int = 4
    max_df: float = 0.5
    min_df: float = 0.001
    bow_size: int = 500
    emit_all: bool = False  # indicators for every prediction, not only non-neutral
    sample_every: int = 1
    save_model: str | None = None

    @classmethod
    def from_yaml(cls, path: str) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise PipelineError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def read_tweets(path: str) -> list[RawTweet]:
    tweets = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                tweets.append(
                    RawTweet(
                        id=str(obj["id"]),
                        timestamp=datetime.fromisoformat(obj["created_at"]),
                        text=obj["text"],
                    )
                )
            except (KeyError, ValueError) as exc:
                raise PipelineError(f"{path}:{lineno}: bad tweet record: {exc}") from exc
    tweets.sort(key=lambda t: t.timestamp)
    return tweets


def read_labels(path: str) -> dict[tuple[str, int, str], EmotionLabel]:
    """tweet_id <TAB> segment_index <TAB> focus_ticker <TAB> P|N|O"""
    out: dict[tuple[str, int, str], EmotionLabel] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise PipelineError(f"{path}:{lineno}: expected 4 tab-separated fields")
            tweet_id, index, focus, label = parts
            try:
                out[(tweet_id, int(index), focus)] = EmotionLabel.parse(label)
            except ValueError as exc:
                raise PipelineError(f"{path}:{lineno}: {exc}") from exc
    return out


@dataclass
class Instance:
    """One per-asset replica, ready for feature extraction."""

    tweet: RawTweet
    segment_index: int
    processed: ProcessedSegment
    tagged_text: str  # asset-tagged text, before number tagging and cleaning
    focus: str
    label: EmotionLabel | None


def build_instances(tweets, lx, labels=None) -> list[Instance]:
    instances = []
    for tweet in tweets:
        for index, seg in enumerate(segment_tweet(tweet, lx)):
            for replica in replicate_per_asset(seg):
                label = None
                if labels is not None:
                    label = labels.get((tweet.id, index, replica.focus))
                ps = process(replica, lx)
                if label is not None:
                    ps = ProcessedSegment(
                        tweet_id=ps.tweet_id,
                        focus=ps.focus,
                        tokens=ps.tokens,
                        raw_len=ps.raw_len,
                        label=label,
                    )
                instances.append(
                    Instance(
                        tweet=tweet,
                        segment_index=index,
                        processed=ps,
                        tagged_text=replica.text,
                        focus=replica.focus,
                        label=label,
                    )
                )
    return instances


def make_learner(cfg: PipelineConfig, params: dict | None = None):
    """Instantiate the configured learner, optionally grid-tuned parameters."""
    params = params or {}

    def factory(classes):
        if cfg.learner == "nb":
            return StreamingNaiveBayes(classes=classes)
        if cfg.learner == "dt":
            return HoeffdingTreeClassifier(classes=classes)
        if cfg.learner == "rf":
            return AdaptiveRandomForestClassifier(
                classes=classes,
                n_estimators=params.get("estimators", 10),
                max_features=params.get("max_features", "auto"),
                lam=params.get("lambda", 6),
                seed=cfg.seed,
            )
        if cfg.learner == "sgd":
            return SGDLinearClassifier(
                classes=classes,
                penalty=params.get("penalty", "l2"),
                l1_ratio=params.get("l1_ratio", 0.15),
                alpha=params.get("alpha", 1e-4),
                max_iter=params.get("max_iter", 1000),
                tol=params.get("tol", 1e-3),
            )
        raise PipelineError(f"unknown learner: {cfg.learner}")

    if cfg.stacked:
        return make_stacked(factory)
    return factory(CLASS_ORDER)


def _chi2_from_instances(fvs, labels, total_dim: int) -> np.ndarray:
    """chi2 scores over sparse feature vectors without a dense matrix."""
    classes = sorted(set(labels), key=CLASS_ORDER.index)
    index = {c: i for i, c in enumerate(classes)}
    observed: list[dict[int, float]] = [{} for _ in classes]
    feature_total: dict[int, float] = {}
    for fv, label in zip(fvs, labels):
        row = observed[index[label]]
        for col, val in fv.items():
            row[col] = row.get(col, 0.0) + val
            feature_total[col] = feature_total.get(col, 0.0) + val
    n = len(labels)
    class_prob = [sum(l is c for l in labels) / n for c in classes]
    scores = np.zeros(total_dim)
    for col, total in feature_total.items():
        s = 0.0
        for ci in range(len(classes)):
            expected = class_prob[ci] * total
            obs = observed[ci].get(col, 0.0)
            s += (obs - expected) ** 2 / expected
        scores[col] = s
    return scores


def extract_features(
    instances: list[Instance],
    cfg: PipelineConfig,
    prices: PriceSeries | None,
):
    """Fit vocabularies on the warmup window, then vectorize the stream.

    Returns (fvs, vocabulary model, default-trend count). A missing closing
    price falls back to a downward trend and is counted.
    """
    if cfg.warmup > len(instances):
        raise PipelineError(
            f"insufficient warmup data: need {cfg.warmup} instances, have {len(instances)}"
        )
    vm = fit_vocabularies(
        [inst.processed for inst in instances[: cfg.warmup]],
        ngram_range=(cfg.ngram_min, cfg.ngram_max),
        max_df=cfg.max_df,
        min_df=cfg.min_df,
        bow_size=cfg.bow_size,
    )
    lx = load_lexicons(cfg.lexicons)
    defaults = 0

    def one(inst: Instance) -> FeatureVector:
        nonlocal defaults
        numeric = extract_numeric(inst.processed, inst.tagged_text, lx)
        trend = False
        if prices is not None:
            try:
                trend = compute_trend(inst.focus, inst.tweet.timestamp, prices)
            except TrendUnavailableError:
                defaults += 1
        else:
            defaults += 1
        return vectorize(inst.processed, vm, numeric, trend, label=inst.label)

    fvs = [one(inst) for inst in instances]

    if cfg.percentile:
        warm = [(fv, inst.label) for fv, inst in zip(fvs, instances) if inst.label is not None]
        warm = warm[: cfg.warmup]
        scores = _chi2_from_instances(
            [fv for fv, _ in warm], [l for _, l in warm], vm.total_dim
        )
        vm.selection_mask = select_percentile(scores, cfg.percentile).retained
        fvs = [
            vectorize(
                inst.processed,
                vm,
                tuple(fv.numeric),
                fv.trend,
                label=inst.label,
            )
            for fv, inst in zip(fvs, instances)
        ]
    return fvs, vm, defaults


def run_pipeline(cfg: PipelineConfig) -> PrequentialReport | None:
    """Segment, normalize, vectorize and (when labeled) evaluate one stream.

    Writes report.json, confusion.csv, accuracy_series.csv and
    indicators.jsonl to the output directory. Returns the report, or None
    when the run is inference-only (no labels file).
    """
    if not cfg.tweets:
        raise PipelineError("a tweets file is required")
    lx = load_lexicons(cfg.lexicons)
    tweets = read_tweets(cfg.tweets)
    labels = read_labels(cfg.labels) if cfg.labels else None
    prices = PriceSeries.from_csv(cfg.prices) if cfg.prices else None
    if prices is None:
        print("warning: no prices file, trend defaults to downward", file=sys.stderr)

    instances = build_instances(tweets, lx, labels)
    if labels is not None:
        instances = [inst for inst in instances if inst.label is not None]
    if not instances:
        raise PipelineError("no asset-bearing segments in the input")

    fvs, vm, defaults = extract_features(instances, cfg, prices)
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "vocabulary.json"), "w", encoding="utf-8") as fh:
        fh.write(vm.to_json())

    params = None
    if cfg.grid:
        if labels is None:
            raise PipelineError("grid search needs labels")
        grid = {"rf": RF_GRID, "sgd": SGD_GRID}.get(cfg.grid)
        if grid is None:
            raise PipelineError(f"unknown grid: {cfg.grid}")
        warm = list(zip(fvs[: cfg.warmup], [i.label for i in instances[: cfg.warmup]]))
        tuned = grid_search(
            grid, warm, lambda p: make_learner(cfg, p)
        )
        params = tuned.config
        print(f"grid search: {tuned.config} (warmup accuracy {tuned.accuracy:.4f})")

    model = make_learner(cfg, params)
    report = None
    indicators = []
    if labels is not None:
        confusion = np.zeros((3, 3), dtype=int)
        series = []
        correct = 0
        index = {c: i for i, c in enumerate(CLASS_ORDER)}
        # warmup: train only; evaluation starts after the cold-start window
        for fv, inst in zip(fvs[: cfg.warmup], instances[: cfg.warmup]):
            model.partial_fit(fv, inst.label)
        n = 0
        for fv, inst in zip(fvs[cfg.warmup :], instances[cfg.warmup :]):
            predicted = model.predict_label(fv)
            n += 1
            confusion[index[inst.label], index[predicted]] += 1
            correct += predicted is inst.label
            if n % cfg.sample_every == 0 or n == len(fvs) - cfg.warmup:
                series.append((n, correct / n))
            model.partial_fit(fv, inst.label)
            _collect(indicators, inst, predicted, cfg.emit_all)
        report = PrequentialReport(
            n=n,
            confusion=confusion,
            accuracy_series=series,
            default_trend_count=defaults,
        )
        report.finalize_flags()
        with open(os.path.join(cfg.out, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
        report.write_csvs(
            os.path.join(cfg.out, "confusion.csv"),
            os.path.join(cfg.out, "accuracy_series.csv"),
        )
    else:
        for fv, inst in zip(fvs, instances):
            _collect(indicators, inst, model.predict_label(fv), cfg.emit_all)

    with open(os.path.join(cfg.out, "indicators.jsonl"), "w", encoding="utf-8") as fh:
        for record in indicators:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    if cfg.save_model:
        save_model(model, cfg.save_model)
    return report


def _collect(indicators, inst: Instance, predicted: EmotionLabel, emit_all: bool) -> None:
    if predicted is EmotionLabel.NEUTRAL and not emit_all:
        return
    indicators.append(
        {
            "tweet_id": inst.tweet.id,
            "segment_index": inst.segment_index,
            "focus": inst.focus,
            "timestamp": inst.tweet.timestamp.isoformat(),
            "text": inst.tagged_text,
            "predicted": predicted.name,
        }
    )


# ---------------------------------------------------------------- subcommands


def _cmd_segment(cfg: PipelineConfig) -> None:
    lx = load_lexicons(cfg.lexicons)
    for tweet in read_tweets(cfg.tweets):
        for index, seg in enumerate(segment_tweet(tweet, lx)):
            print(
                json.dumps(
                    {
                        "tweet_id": tweet.id,
                        "segment_index": index,
                        "text": seg.text,
                        "assets": [
                            {"ticker": t, "start": s, "end": e}
                            for t, (s, e) in seg.assets
                        ],
                    },
                    ensure_ascii=False,
                )
            )


def _cmd_process(cfg: PipelineConfig) -> None:
    lx = load_lexicons(cfg.lexicons)
    for tweet in read_tweets(cfg.tweets):
        for index, seg in enumerate(segment_tweet(tweet, lx)):
            for replica in replicate_per_asset(seg):
                ps = process(replica, lx)
                print(
                    json.dumps(
                        {
                            "tweet_id": tweet.id,
                            "segment_index": index,
                            "focus": replica.focus,
                            "tokens": list(ps.tokens),
                            "raw_len": ps.raw_len,
                        },
                        ensure_ascii=False,
                    )
                )


def _cmd_features(cfg: PipelineConfig) -> None:
    lx = load_lexicons(cfg.lexicons)
    tweets = read_tweets(cfg.tweets)
    labels = read_labels(cfg.labels) if cfg.labels else None
    prices = PriceSeries.from_csv(cfg.prices) if cfg.prices else None
    instances = build_instances(tweets, lx, labels)
    if labels is not None:
        instances = [inst for inst in instances if inst.label is not None]
    fvs, vm, _ = extract_features(instances, cfg, prices)
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "vocabulary.json"), "w", encoding="utf-8") as fh:
        fh.write(vm.to_json())
    for fv, inst in zip(fvs, instances):
        print(
            json.dumps(
                {
                    "tweet_id": inst.tweet.id,
                    "segment_index": inst.segment_index,
                    "focus": inst.focus,
                    "sparse": {str(k): v for k, v in sorted(fv.sparse_counts.items())},
                    "numeric": list(fv.numeric),
                    "trend": fv.trend,
                    "label": inst.label.name if inst.label else None,
                },
                ensure_ascii=False,
            )
        )


def _cmd_analyze(cfg: PipelineConfig) -> None:
    from finemo.selection import correlation_report

    lx = load_lexicons(cfg.lexicons)
    tweets = read_tweets(cfg.tweets)
    labels = read_labels(cfg.labels) if cfg.labels else None
    if labels is None:
        raise PipelineError("analyze needs labels")
    prices = PriceSeries.from_csv(cfg.prices) if cfg.prices else None
    instances = [i for i in build_instances(tweets, lx, labels) if i.label is not None]
    fvs, vm, _ = extract_features(instances, cfg, prices)
    # dense analysis over the interpretable block only: BOW counters,
    # numeric counters and the trend flag
    X = np.array([fv.dense_view() for fv in fvs])
    y = [inst.label for inst in instances]
    names = ["BOW_PRECAUTION", "BOW_NEUTRAL", "BOW_OPPORTUNITY", *NUMERIC_NAMES, "TREND"]
    rep = correlation_report(X, y)
    chi2 = _chi2_from_instances(fvs, y, vm.total_dim)
    out = {
        "pearson": {names[j]: r for j, r in rep.r_values.items()},
        "constant": [names[j] for j in rep.constant],
        "chi2_top": [
            {"column": int(j), "score": float(chi2[j])}
            for j in np.argsort(-chi2)[:20]
        ],
    }
    print(json.dumps(out, ensure_ascii=False, indent=2))


def _cmd_agreement(cfg: PipelineConfig) -> None:
    """cfg.labels: TSV where each row is the per-annotator labels of one item."""
    if not cfg.labels:
        raise PipelineError("agreement needs a labels file")
    rows = []
    with open(cfg.labels, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append(tuple(EmotionLabel.parse(v) for v in line.split("\t")))
    print(agreement_report(rows).to_json())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finemo",
        description="Per-asset emotion indicators from financial microblog streams.",
    )
    parser.add_argument("command", choices=[
        "segment", "process", "features", "analyze", "train-eval", "run", "agreement",
    ])
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--lexicons", help="lexicon directory")
    parser.add_argument("--tweets", help="tweets JSONL file")
    parser.add_argument("--prices", help="closing prices CSV")
    parser.add_argument("--labels", help="labels TSV")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--warmup", type=int, help="cold-start window size")
    parser.add_argument("--learner", choices=["nb", "dt", "rf", "sgd"])
    parser.add_argument("--stacked", dest="stacked", action="store_true", default=None)
    parser.add_argument("--single", dest="stacked", action="store_false", default=None)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--percentile", type=int, help="chi2 selection percentile (0 = off)")
    parser.add_argument("--grid", choices=["rf", "sgd"], help="warmup grid search")
    parser.add_argument("--all", dest="emit_all", action="store_true", default=None,
                        help="emit indicators for neutral predictions too")
    parser.add_argument("--sample-every", dest="sample_every", type=int)
    parser.add_argument("--save-model", dest="save_model")
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig.from_yaml(args.config) if args.config else PipelineConfig()
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        if args.command == "segment":
            _cmd_segment(cfg)
        elif args.command == "process":
            _cmd_process(cfg)
        elif args.command == "features":
            _cmd_features(cfg)
        elif args.command == "analyze":
            _cmd_analyze(cfg)
        elif args.command in ("train-eval", "run"):
            report = run_pipeline(cfg)
            if report is not None:
                print(report.to_json())
        elif args.command == "agreement":
            _cmd_agreement(cfg)
    except BrokenPipeError:
        return 0
    except (PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
