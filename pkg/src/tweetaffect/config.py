"""Run configuration: a YAML tree with dotted-key command-line overrides."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


DEFAULTS: dict = {
    "seed": None,
    "workers": 1,
    "paths": {
        "output_dir": "out",
        "sentiment140": None,
        "emotional_tweets": None,
        "tweets": None,
        "records": None,
        "predictions": None,
        "series": None,
        "location_map": None,
        "lexicon": None,
        "stopwords": None,
        "embeddings": {
            "lstm-fasttext": None,
            "lstm-glove": None,
            "lstm-glove-twitter": None,
        },
        "checkpoints": {"A": None, "B": None, "C": None},
    },
    "model": {
        "stage": "A",
        "variant": None,
        "seq_len": 280,
        "embedding_dim": None,
        "trainable_embeddings": None,
        "max_vocab": 50000,
        "units": 32,
        "batch_size": 128,
        "epochs": 2,
        "learning_rate": 0.001,
        "dropout": 0.2,
        "recurrent_dropout": 0.2,
        "loss": "cross-entropy",
        "class_weight": None,
        "max_norm": None,
        "subsample": None,
        "test_fraction": 0.1,
        "val_fraction": 0.1,
    },
    "preprocess": {
        "emoticon_ranges": [["U+1F300", "U+1FAFF"], ["U+2600", "U+27BF"]],
    },
    "analytics": {
        "pairs": [["US", "CA"], ["PK", "IN"], ["NO", "SE"]],
        "start": None,
        "end": None,
        "normalization": "total",
        "scale_max": 25,
    },
}


def _merge(base: dict, update: dict, prefix="") -> dict:
    for key, value in update.items():
        dotted = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {dotted!r}")
        if isinstance(base[key], dict) and base[key] and isinstance(value, dict):
            _merge(base[key], value, dotted + ".")
        else:
            base[key] = value
    return base


def set_dotted(cfg: dict, dotted: str, value):
    node = cfg
    parts = dotted.split(".")
    for i, part in enumerate(parts[:-1]):
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"unknown config key {dotted!r}")
        node = node[part]
    last = parts[-1]
    if last not in node:
        raise ConfigError(f"unknown config key {dotted!r}")
    node[last] = value


def parse_value(text: str):
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError:
        return text
    if isinstance(value, str):
        # YAML 1.1 reads "1e6" as a string
        try:
            return float(value)
        except ValueError:
            pass
    return value


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")
        _merge(cfg, data)
    for key, value in (overrides or {}).items():
        set_dotted(cfg, key, value)
    if cfg["seed"] is None:
        raise ConfigError("config must set 'seed' (no wall-clock default)")
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer")
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def emoticon_ranges(cfg: dict) -> tuple[tuple[int, int], ...]:
    from .emoticons import parse_codepoint

    out = []
    for lo, hi in cfg["preprocess"]["emoticon_ranges"]:
        lo = parse_codepoint(lo) if isinstance(lo, str) else int(lo)
        hi = parse_codepoint(hi) if isinstance(hi, str) else int(hi)
        if lo > hi:
            raise ConfigError(f"emoticon range {lo:#x}..{hi:#x} is empty")
        out.append((lo, hi))
    return tuple(out)
