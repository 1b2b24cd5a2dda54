"""Command-line entry point.

Usage::

    tweetaffect [--config run.yaml] SUBCOMMAND [--dotted.key VALUE ...]
    tweetaffect --self-test

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, config_hash, emoticon_ranges, file_digest, load_config, parse_value

log = logging.getLogger("tweetaffect")

SUBCOMMANDS = (
    "ingest-stats",
    "preprocess",
    "train",
    "evaluate",
    "classify",
    "validate-emoticons",
    "aggregate",
    "correlate",
    "export-plot-data",
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

# short flags accepted as aliases for dotted keys
ALIASES = {"--stage": "model.stage", "--variant": "model.variant", "--epochs": "model.epochs", "--out": "paths.output_dir"}


class DataError(RuntimeError):
    pass


# -- argument handling --------------------------------------------------------


def _split_overrides(extra: list[str]) -> dict:
    overrides = {}
    i = 0
    while i < len(extra):
        arg = extra[i]
        if not arg.startswith("--"):
            raise ConfigError(f"unexpected argument {arg!r}")
        if "=" in arg:
            key, value = arg.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"flag {arg} needs a value")
            key, value = arg, extra[i + 1]
            i += 2
        key = ALIASES.get(key, key[2:])
        overrides[key] = parse_value(value)
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tweetaffect",
        description="Tweet sentiment polarity and emotion pipeline.",
        epilog="Any config key can be overridden with --dotted.key VALUE, e.g. --model.epochs 3.",
    )
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument("--self-test", action="store_true", help="run gradient and lexicon checks")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("subcommand", nargs="?", help=" | ".join(SUBCOMMANDS))
    return parser


# -- shared helpers -------------------------------------------------------------


def _require(cfg, *dotted):
    """Check that each dotted path key is set and points at an existing file."""
    paths = []
    for key in dotted:
        node = cfg
        for part in key.split("."):
            node = node[part]
        if node is None:
            raise ConfigError(f"config key {key} must be set for this subcommand")
        if not Path(node).exists():
            raise ConfigError(f"{key}: {node} does not exist")
        paths.append(node)
    return paths


def _out_dir(cfg) -> Path:
    out = Path(cfg["paths"]["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def _write_manifest(cfg, subcommand, inputs, outputs):
    out = _out_dir(cfg)
    manifest = {
        "tool": "tweetaffect",
        "version": __version__,
        "subcommand": subcommand,
        "seed": cfg["seed"],
        "config_sha256": config_hash(cfg),
        "config": cfg,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": {str(Path(p).name): file_digest(p) for p in outputs},
    }
    suffix = f"_{cfg['model']['stage']}" if subcommand in ("train", "evaluate") else ""
    _write_json(out / f"manifest_{subcommand}{suffix}.json", manifest)


def _stopwords(cfg):
    from .preprocess import load_stopwords

    return load_stopwords(cfg["paths"]["stopwords"])


def _lexicon(cfg):
    from .emoticons import EmoticonLexicon, default_lexicon

    path = cfg["paths"]["lexicon"]
    return EmoticonLexicon.load(path) if path else default_lexicon()


def _load_records(cfg):
    """Canonical records (``paths.records``) or a raw tweet CSV (``paths.tweets``), preprocessed."""
    from .ingest import ParseReport, load_location_map, parse_tweet_csv
    from .preprocess import preprocess_corpus

    report = ParseReport()
    if cfg["paths"]["records"]:
        (path,) = _require(cfg, "paths.records")
        loc = None
    else:
        (path,) = _require(cfg, "paths.tweets")
        loc = load_location_map(cfg["paths"]["location_map"]) if cfg["paths"]["location_map"] else None
    records = list(parse_tweet_csv(path, loc, report))
    if any(r.cleaned_text is None or r.emoticons is None for r in records):
        records = list(preprocess_corpus(records, _stopwords(cfg), emoticon_ranges(cfg)))
    return records, [path], report


def _stage_dataset(cfg, stage):
    from .ingest import ParseReport, parse_emotional_tweets, parse_sentiment140
    from .nn import sub_rng

    report = ParseReport()
    if stage == "A":
        (path,) = _require(cfg, "paths.sentiment140")
        rows = [(r.text, r.polarity.value) for r in parse_sentiment140(path, report)]
    else:
        (path,) = _require(cfg, "paths.emotional_tweets")
        rows = [(r.text, r.emotion.value) for r in parse_emotional_tweets(path, report)]
    if not rows:
        raise DataError(f"{path}: no usable records ({report.rejected} rejected)")
    n = cfg["model"]["subsample"]
    if n:
        rows = _balanced_subsample(rows, int(n), sub_rng(cfg["seed"], "subsample"))
    texts, labels = [t for t, _ in rows], [l for _, l in rows]
    return texts, labels, path, report


def _balanced_subsample(rows, n, rng):
    by_label: dict[str, list[int]] = {}
    for i, (_, lab) in enumerate(rows):
        by_label.setdefault(lab, []).append(i)
    per = n // len(by_label)
    keep = []
    for lab in sorted(by_label):
        idx = np.array(by_label[lab])
        take = min(per, len(idx))
        keep.extend(idx[np.sort(rng.choice(len(idx), size=take, replace=False))])
    return [rows[i] for i in sorted(keep)]


def _spec(cfg, stage):
    from .pipeline import ClassifierSpec

    m = cfg["model"]
    variant = m["variant"]
    options = {
        "seq_len": m["seq_len"],
        "max_vocab": m["max_vocab"],
        "units": m["units"],
        "batch_size": m["batch_size"],
        "learning_rate": m["learning_rate"],
        "dropout": m["dropout"],
        "recurrent_dropout": m["recurrent_dropout"],
        "loss": m["loss"],
        "class_weight": m["class_weight"],
        "max_norm": m["max_norm"],
        "embedding_dim": m["embedding_dim"],
        "trainable_embeddings": m["trainable_embeddings"],
        "stopwords_path": cfg["paths"]["stopwords"],
        "n_threads": cfg["workers"],
    }
    spec = ClassifierSpec(stage, variant, m["epochs"], cfg["seed"], m["test_fraction"], m["val_fraction"], options)
    emb = cfg["paths"]["embeddings"].get(spec.variant)
    if spec.variant in ("lstm-fasttext", "lstm-glove", "lstm-glove-twitter"):
        if emb is None:
            raise ConfigError(f"paths.embeddings.{spec.variant} must be set for variant {spec.variant}")
        if not Path(emb).exists():
            raise ConfigError(f"embedding file {emb} does not exist")
        spec.options["embedding_path"] = emb
    return spec


def _checkpoint_path(cfg, stage) -> Path:
    ckpt = cfg["paths"]["checkpoints"][stage]
    return Path(ckpt) if ckpt else _out_dir(cfg) / f"stage_{stage}.ckpt"


def _predictions(cfg, records):
    from .pipeline import read_predictions

    (path,) = _require(cfg, "paths.predictions")
    preds = read_predictions(path)
    missing = [r.tweet_id for r in records if r.tweet_id not in preds]
    if missing:
        raise DataError(f"{len(missing)} records have no prediction (first: {missing[0]})")
    return preds, path


def _series(cfg):
    """Normalized series from ``paths.series`` or from records + predictions."""
    from .analytics import aggregate_daily, normalize, read_tidy_csv

    if cfg["paths"]["series"]:
        (path,) = _require(cfg, "paths.series")
        return read_tidy_csv(path), None, [path]
    records, inputs, _ = _load_records(cfg)
    preds, ppath = _predictions(cfg, records)
    daily = aggregate_daily(records, preds, *_date_range(cfg))
    normalized = {c: normalize(s, cfg["analytics"]["normalization"]) for c, s in daily.items() if s.total > 0}
    return normalized, daily, inputs + [ppath]


def _date_range(cfg):
    from datetime import date

    a = cfg["analytics"]
    conv = lambda v: None if v is None else (v if isinstance(v, date) else date.fromisoformat(str(v)))  # noqa: E731
    return conv(a["start"]), conv(a["end"])


# -- subcommands ---------------------------------------------------------------


def cmd_ingest_stats(cfg):
    from .ingest import (
        ParseReport,
        dataset_stats,
        load_location_map,
        parse_emotional_tweets,
        parse_sentiment140,
        parse_tweet_csv,
    )

    out = _out_dir(cfg)
    result, inputs = {}, []
    sources = (
        ("sentiment140", parse_sentiment140),
        ("emotional_tweets", parse_emotional_tweets),
    )
    for key, parser in sources:
        if cfg["paths"][key]:
            (path,) = _require(cfg, f"paths.{key}")
            report = ParseReport()
            stats = dataset_stats(parser(path, report))
            stats["parse"] = report.as_dict()
            result[key] = stats
            inputs.append(path)
    if cfg["paths"]["tweets"]:
        (path,) = _require(cfg, "paths.tweets")
        report = ParseReport()
        loc = load_location_map(cfg["paths"]["location_map"]) if cfg["paths"]["location_map"] else None
        counts: dict[str, int] = {}
        for rec in parse_tweet_csv(path, loc, report):
            key = rec.country or "unassigned"
            counts[key] = counts.get(key, 0) + 1
        result["tweets"] = {"counts": dict(sorted(counts.items())), "total": sum(counts.values()), "parse": report.as_dict()}
        inputs.append(path)
    if not result:
        raise ConfigError("set at least one of paths.sentiment140, paths.emotional_tweets, paths.tweets")
    target = out / "ingest_stats.json"
    _write_json(target, result)
    print(json.dumps(result, indent=2, sort_keys=True))
    return inputs, [target]


def cmd_preprocess(cfg):
    from .ingest import write_records

    records, inputs, report = _load_records(cfg)
    target = _out_dir(cfg) / "records.csv"
    write_records(records, target)
    empty = sum("empty_cleaned_text" in r.flags for r in records)
    print(json.dumps({"records": len(records), "empty_cleaned_text": empty, "parse": report.as_dict()}, indent=2))
    return inputs, [target]


def cmd_train(cfg):
    from .pipeline import train_classifier, write_history

    stage = cfg["model"]["stage"]
    spec = _spec(cfg, stage)
    texts, labels, path, report = _stage_dataset(cfg, stage)
    result = train_classifier(spec, texts, labels)
    out = _out_dir(cfg)
    ckpt = _checkpoint_path(cfg, stage)
    ckpt.parent.mkdir(parents=True, exist_ok=True)
    result.model.save(ckpt)
    curves = out / f"curves_{stage}.csv"
    write_history(curves, result.history)
    metrics_path = out / f"metrics_{stage}.json"
    payload = {
        "stage": stage,
        "variant": spec.variant,
        "split": result.split_sizes,
        "test": result.metrics.as_dict(),
        "embedding_coverage": result.model.embedding_coverage_,
        "parse": report.as_dict(),
    }
    _write_json(metrics_path, payload)
    vocab_path = out / f"vocab_{stage}.tsv"
    result.model.vocab_.save(vocab_path)
    print(json.dumps({"stage": stage, "accuracy": result.metrics.accuracy, "f1": result.metrics.f1,
                      "macro_f1": result.metrics.macro_f1, "checkpoint": str(ckpt)}, indent=2))
    inputs = [path] + ([spec.options["embedding_path"]] if "embedding_path" in spec.options else [])
    return inputs, [ckpt, curves, metrics_path, vocab_path]


def cmd_evaluate(cfg):
    from .pipeline import TweetClassifier, evaluate, split_dataset

    stage = cfg["model"]["stage"]
    spec = _spec(cfg, stage)
    ckpt = _checkpoint_path(cfg, stage)
    if not ckpt.exists():
        raise ConfigError(f"checkpoint {ckpt} does not exist; run train first")
    model = TweetClassifier.load(ckpt)
    texts, labels, path, _ = _stage_dataset(cfg, stage)
    texts, labels = spec.select(texts, labels)
    _, _, test = split_dataset(labels, spec.seed, spec.test_fraction, spec.val_fraction)
    metrics = evaluate(model, [texts[i] for i in test], [labels[i] for i in test])
    target = _out_dir(cfg) / f"evaluation_{stage}.json"
    _write_json(target, {"stage": stage, "test_size": len(test), "test": metrics.as_dict()})
    print(json.dumps({"stage": stage, "accuracy": metrics.accuracy, "f1": metrics.f1, "macro_f1": metrics.macro_f1}))
    return [path, ckpt], [target]


def _analyser(cfg):
    from .pipeline import TwoStageAnalyser

    paths = [_checkpoint_path(cfg, s) for s in "ABC"]
    for p in paths:
        if not p.exists():
            raise ConfigError(f"checkpoint {p} does not exist")
    return TwoStageAnalyser.from_checkpoints(*paths), paths


def cmd_classify(cfg):
    from .pipeline import write_predictions

    analyser, ckpts = _analyser(cfg)
    records, inputs, _ = _load_records(cfg)
    preds = analyser.predict([r.original_text for r in records])
    target = _out_dir(cfg) / "predictions.csv"
    write_predictions(target, [r.tweet_id for r in records], preds)
    print(json.dumps({"classified": len(preds), "low_confidence": sum(p.low_confidence for p in preds)}))
    return inputs + ckpts, [target]


def cmd_validate(cfg):
    from .pipeline import TweetClassifier
    from .validate import validate_emotions, validate_polarity

    ckpt_a = _checkpoint_path(cfg, "A")
    if not ckpt_a.exists():
        raise ConfigError(f"checkpoint {ckpt_a} does not exist")
    records, inputs, _ = _load_records(cfg)
    lexicon = _lexicon(cfg)
    reports = [validate_polarity(TweetClassifier.load(ckpt_a), records, lexicon)]
    ckpts = [ckpt_a]
    b, c = _checkpoint_path(cfg, "B"), _checkpoint_path(cfg, "C")
    if b.exists() and c.exists():
        reports.append(validate_emotions(TweetClassifier.load(b), TweetClassifier.load(c), records, lexicon))
        ckpts += [b, c]
    out = _out_dir(cfg)
    jpath, tpath = out / "validation.json", out / "validation.txt"
    _write_json(jpath, {r.kind: r.as_dict() for r in reports})
    text = "\n\n".join(r.to_text() for r in reports) + "\n"
    tpath.write_text(text, encoding="utf-8")
    print(text, end="")
    return inputs + ckpts, [jpath, tpath]


def cmd_aggregate(cfg):
    from .analytics import average_line, aggregate_daily, normalize, series_to_json, write_tidy_csv

    records, inputs, _ = _load_records(cfg)
    preds, ppath = _predictions(cfg, records)
    daily = aggregate_daily(records, preds, *_date_range(cfg))
    normalized = {c: normalize(s, cfg["analytics"]["normalization"]) for c, s in daily.items() if s.total > 0}
    out = _out_dir(cfg)
    counts_csv, norm_csv = out / "daily_counts.csv", out / "normalized.csv"
    write_tidy_csv(counts_csv, daily)
    write_tidy_csv(norm_csv, normalized)
    series_json = out / "series.json"
    _write_json(series_json, {
        "counts": series_to_json(daily),
        "normalized": series_to_json(normalized),
        "averages": {c: average_line(s) for c, s in sorted(normalized.items())},
        "totals": {c: s.total for c, s in sorted(daily.items())},
    })
    print(json.dumps({c: s.total for c, s in sorted(daily.items())}))
    return inputs + [ppath], [counts_csv, norm_csv, series_json]


def cmd_correlate(cfg):
    from .analytics import correlation_table

    normalized, _, inputs = _series(cfg)
    pairs = [tuple(p) for p in cfg["analytics"]["pairs"]]
    try:
        table = correlation_table(pairs, normalized)
    except KeyError as exc:
        raise DataError(str(exc.args[0])) from None
    target = _out_dir(cfg) / "correlations.json"
    target.write_text(table.to_json() + "\n", encoding="utf-8")
    print(table.to_json())
    return inputs, [target]


def cmd_export_plot_data(cfg):
    import csv

    from .analytics import average_line, correlation_table, series_to_json, stacked_emotions

    normalized, daily, inputs = _series(cfg)
    scale = cfg["analytics"]["scale_max"]
    out = _out_dir(cfg)
    stacks_csv = out / "stacked_emotions.csv"
    plot_json = out / "plot_data.json"
    payload = {"normalized": series_to_json(normalized), "averages": {}, "stacked_emotions": {}}
    with open(stacks_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "date", "group", "layer", "value"])
        from .analytics import STACK_GROUPS

        for country, s in sorted(normalized.items()):
            payload["averages"][country] = average_line(s)
            stacks = stacked_emotions(s, scale)
            payload["stacked_emotions"][country] = {g: a.tolist() for g, a in stacks.items()}
            for group, arr in stacks.items():
                for k, cls in enumerate(STACK_GROUPS[group]):
                    for d, v in zip(s.dates, arr[k]):
                        writer.writerow([country, d.isoformat(), group, cls, repr(float(v))])
    pairs = [tuple(p) for p in cfg["analytics"]["pairs"] if all(c in normalized for c in p)]
    payload["correlations"] = correlation_table(pairs, normalized).as_dict()
    _write_json(plot_json, payload)
    print(json.dumps({"countries": sorted(normalized), "pairs": [f"{a}-{b}" for a, b in pairs]}))
    return inputs, [stacks_csv, plot_json]


COMMANDS = {
    "ingest-stats": cmd_ingest_stats,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "classify": cmd_classify,
    "validate-emoticons": cmd_validate,
    "aggregate": cmd_aggregate,
    "correlate": cmd_correlate,
    "export-plot-data": cmd_export_plot_data,
}


# -- self test -----------------------------------------------------------------


def self_test(stream=None) -> bool:
    from .emoticons import Emotion, EmoticonLexicon, Polarity, default_lexicon
    from .nn import gradient_check
    from .pipeline import STAGE_HEADS, build_architecture

    stream = stream or sys.stdout
    ok = True
    lex = default_lexicon()
    checks = [
        ("lexicon loads 23 one-to-one entries", len(lex) == 23),
        ("U+1F632 is surprise", lex.emotion_of(0x1F632) is Emotion.SURPRISE),
        ("U+1F631 is fear", lex.emotion_of(0x1F631) is Emotion.FEAR),
        ("polarity grouping", all(
            (e.polarity is Polarity.POSITIVE) == (e in (Emotion.JOY, Emotion.SURPRISE)) for e in lex.entries.values()
        )),
        ("lexicon round-trips", EmoticonLexicon.from_lines(lex.to_lines()).entries == lex.entries),
    ]
    rng = np.random.default_rng(0)
    X = rng.integers(1, 30, size=(4, 7))
    X[:, 5:] = 0
    for stage, n_cls in (("A", 2), ("B", 2), ("C", 3)):
        for variant in ("lstm-scratch", "dnn-baseline"):
            net = build_architecture(variant, 30, 6, n_cls, 7, STAGE_HEADS[stage], units=4, seed=1)
            Y = np.eye(n_cls)[rng.integers(0, n_cls, size=4)]
            report = gradient_check(net, X, Y, epsilon=1e-5, tolerance=1e-4)
            checks.append((f"gradient check stage {stage} {variant} (max rel err {report.max_rel_error:.2e})",
                           report.passed))
    for name, passed in checks:
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'}  {name}", file=stream)
    return ok


# -- main ---------------------------------------------------------------------


def main(argv=None) -> int:
    from .ingest import ParseReport  # noqa: F401  (import check for data modules)
    from .nn import CheckpointError, NumericalError

    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.self_test:
        return EXIT_OK if self_test() else EXIT_NUMERIC
    if args.subcommand not in COMMANDS:
        parser.print_usage(sys.stderr)
        print(f"tweetaffect: unknown or missing subcommand {args.subcommand!r}; choose from {', '.join(SUBCOMMANDS)}",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config, _split_overrides(extra))
        inputs, outputs = COMMANDS[args.subcommand](cfg)
        _write_manifest(cfg, args.subcommand, inputs, outputs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, CheckpointError, ValueError, KeyError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
