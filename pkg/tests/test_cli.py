import json
import os

import pytest

from finemo.cli import (
    PipelineConfig,
    PipelineError,
    build_instances,
    config_from_args,
    build_parser,
    main,
    read_labels,
    read_tweets,
    run_pipeline,
)
from finemo.lexicons import load_lexicons
from finemo.streamml import load_model


def _config(sample_paths, tmp_path, **overrides):
    cfg = PipelineConfig(
        lexicons=sample_paths["lexicons"],
        tweets=sample_paths["tweets"],
        labels=sample_paths["labels"],
        prices=sample_paths["prices"],
        warmup=10,
        learner="nb",
        stacked=False,
        out=str(tmp_path / "out"),
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def test_run_pipeline_artifact_contract(sample_paths, tmp_path):
    cfg = _config(sample_paths, tmp_path)
    report = run_pipeline(cfg)
    out = cfg.out
    for name in ("report.json", "confusion.csv", "accuracy_series.csv",
                 "indicators.jsonl", "vocabulary.json"):
        assert os.path.isfile(os.path.join(out, name)), name
    data = json.loads(open(os.path.join(out, "report.json")).read())
    assert data["n"] == report.n
    assert sum(sum(row) for row in data["confusion"]) == report.n
    # indicators only cover non-neutral predictions by default
    with open(os.path.join(out, "indicators.jsonl")) as fh:
        records = [json.loads(line) for line in fh]
    assert all(r["predicted"] in ("PRECAUTION", "OPPORTUNITY") for r in records)
    assert all({"tweet_id", "focus", "timestamp", "text"} <= set(r) for r in records)


def test_run_pipeline_emit_all(sample_paths, tmp_path):
    cfg = _config(sample_paths, tmp_path, emit_all=True)
    report = run_pipeline(cfg)
    with open(os.path.join(cfg.out, "indicators.jsonl")) as fh:
        records = [json.loads(line) for line in fh]
    assert len(records) == report.n  # one indicator per evaluated prediction


def test_deterministic_artifacts(sample_paths, tmp_path):
    blobs = []
    for run in range(2):
        cfg = _config(sample_paths, tmp_path, learner="rf", stacked=True,
                      seed=13, out=str(tmp_path / f"out{run}"))
        run_pipeline(cfg)
        blobs.append(tuple(
            open(os.path.join(cfg.out, name), "rb").read()
            for name in ("confusion.csv", "accuracy_series.csv")
        ))
    assert blobs[0] == blobs[1]


def test_inference_only_without_labels(sample_paths, tmp_path, capsys):
    cfg = _config(sample_paths, tmp_path, labels=None)
    report = run_pipeline(cfg)
    assert report is None
    assert not os.path.exists(os.path.join(cfg.out, "report.json"))
    assert os.path.isfile(os.path.join(cfg.out, "indicators.jsonl"))


def test_missing_prices_warns_and_defaults(sample_paths, tmp_path, capsys):
    cfg = _config(sample_paths, tmp_path, prices=None)
    report = run_pipeline(cfg)
    assert "trend defaults to downward" in capsys.readouterr().err
    assert report.default_trend_count > 0


def test_insufficient_warmup(sample_paths, tmp_path):
    cfg = _config(sample_paths, tmp_path, warmup=10_000)
    with pytest.raises(PipelineError, match="insufficient warmup data"):
        run_pipeline(cfg)


def test_percentile_selection_path(sample_paths, tmp_path):
    cfg = _config(sample_paths, tmp_path, percentile=15)
    report = run_pipeline(cfg)
    vm = json.loads(open(os.path.join(cfg.out, "vocabulary.json")).read())
    assert vm["selection_mask"] is not None
    assert report.n > 0


def test_grid_search_path(sample_paths, tmp_path, capsys):
    cfg = _config(sample_paths, tmp_path, learner="rf", grid="rf")
    run_pipeline(cfg)
    assert "grid search:" in capsys.readouterr().out


def test_save_and_reload_model(sample_paths, tmp_path):
    path = str(tmp_path / "model.bin")
    cfg = _config(sample_paths, tmp_path, save_model=path)
    run_pipeline(cfg)
    model = load_model(path)
    assert hasattr(model, "predict_label")


def test_read_tweets_sorted_and_validated(sample_paths, tmp_path):
    tweets = read_tweets(sample_paths["tweets"])
    stamps = [t.timestamp for t in tweets]
    assert stamps == sorted(stamps)
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "x"}\n')
    with pytest.raises(PipelineError, match="bad.jsonl:1"):
        read_tweets(str(bad))


def test_read_labels_validated(sample_paths, tmp_path):
    labels = read_labels(sample_paths["labels"])
    assert labels  # sample corpus ships labels for every replica
    bad = tmp_path / "bad.tsv"
    bad.write_text("t0\t0\tBBVA\n")
    with pytest.raises(PipelineError, match="expected 4 tab-separated fields"):
        read_labels(str(bad))
    bad.write_text("t0\t0\tBBVA\tZ\n")
    with pytest.raises(PipelineError, match="bad.tsv:1"):
        read_labels(str(bad))


def test_build_instances_covers_all_replicas(sample_paths):
    lx = load_lexicons(sample_paths["lexicons"])
    tweets = read_tweets(sample_paths["tweets"])
    labels = read_labels(sample_paths["labels"])
    instances = build_instances(tweets, lx, labels)
    labeled = [i for i in instances if i.label is not None]
    assert len(labeled) == len(labels)


def test_yaml_config_and_flag_override(sample_paths, tmp_path):
    config_file = tmp_path / "run.yaml"
    config_file.write_text(
        "learner: sgd\nwarmup: 5\nlexicons: {0}\n".format(sample_paths["lexicons"])
    )
    parser = build_parser()
    args = parser.parse_args(["run", "--config", str(config_file), "--warmup", "7"])
    cfg = config_from_args(args)
    assert cfg.learner == "sgd"  # from the file
    assert cfg.warmup == 7  # flag wins
    assert cfg.lexicons == sample_paths["lexicons"]


def test_yaml_config_rejects_unknown_keys(tmp_path):
    config_file = tmp_path / "run.yaml"
    config_file.write_text("learner: nb\nbogus_key: 1\n")
    with pytest.raises(PipelineError, match="unknown config keys"):
        PipelineConfig.from_yaml(str(config_file))


def test_main_exit_codes(sample_paths, tmp_path, capsys):
    rc = main([
        "train-eval",
        "--lexicons", sample_paths["lexicons"],
        "--tweets", sample_paths["tweets"],
        "--labels", sample_paths["labels"],
        "--prices", sample_paths["prices"],
        "--warmup", "10",
        "--learner", "nb",
        "--single",
        "--out", str(tmp_path / "out"),
    ])
    assert rc == 0
    assert '"accuracy"' in capsys.readouterr().out
    rc = main(["run", "--tweets", str(tmp_path / "missing.jsonl"),
               "--lexicons", sample_paths["lexicons"]])
    assert rc == 1


def test_main_agreement_subcommand(tmp_path, capsys):
    ann = tmp_path / "ann.tsv"
    ann.write_text("P\tP\nN\tN\nO\tO\nP\tN\n")
    rc = main(["agreement", "--labels", str(ann)])
    assert rc == 0
    data = json.loads(capsys.readouterr().out)
    assert "alpha" in data and "pairwise_accuracy" in data


def test_main_segment_subcommand(sample_paths, capsys):
    rc = main(["segment", "--tweets", sample_paths["tweets"],
               "--lexicons", sample_paths["lexicons"]])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    first = json.loads(lines[0])
    assert {"tweet_id", "segment_index", "text", "assets"} <= set(first)
