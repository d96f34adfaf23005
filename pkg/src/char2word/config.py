"""Key-value run configuration files with schema validation.

Format: one `key = value` per line, '#' comments, blank lines ignored.
Unknown keys are rejected. Precedence: command-line overrides > file >
defaults.
"""

import os

from . import embeddings as emb_mod


class ConfigError(ValueError):
    pass


def _bool(text):
    if text.lower() in ("true", "yes", "1"):
        return True
    if text.lower() in ("false", "no", "0"):
        return False
    raise ValueError("not a boolean: %r" % text)


def _variant(text):
    if text not in emb_mod.VARIANTS:
        raise ValueError("must be one of %s" % (emb_mod.VARIANTS,))
    return text


# key -> (parser, default)
SCHEMA = {
    "train": (str, None),
    "dev": (str, None),
    "test": (str, None),
    "checkpoint": (str, None),
    "log": (str, None),
    "pretrained": (str, None),
    "embedder": (_variant, emb_mod.C2W),
    "apply_tanh": (_bool, False),
    "cache_capacity": (int, 10000),
    "d": (int, 50),
    "d_char": (int, 50),
    "d_char_state": (int, 150),
    "d_lm_state": (int, 150),
    "d_word_state": (int, 50),
    "lr": (float, 0.2),
    "momentum": (float, 0.95),
    "batch_sentences": (int, 100),
    "out_vocab_size": (int, 5000),
    "input_vocab_size": (int, 0),
    "singleton_unk_prob": (float, 0.5),
    "max_epochs": (int, 30),
    "seed": (int, 1),
    "word_col": (int, 1),
    "tag_col": (int, 4),
}

CONFIG_DIR_ENV = "CHAR2WORD_CONFIG_DIR"


def defaults():
    return {key: default for key, (_, default) in SCHEMA.items()}


def _parse_pair(key, text, where):
    if key not in SCHEMA:
        raise ConfigError("%s: unknown config key %r" % (where, key))
    parser, _ = SCHEMA[key]
    try:
        return parser(text)
    except ValueError as exc:
        raise ConfigError("%s: bad value for %r: %s" % (where, key, exc)) from None


def resolve_config_path(path):
    """Relative config paths may live in $CHAR2WORD_CONFIG_DIR."""
    if os.path.exists(path) or os.path.isabs(path):
        return path
    config_dir = os.environ.get(CONFIG_DIR_ENV)
    if config_dir:
        candidate = os.path.join(config_dir, path)
        if os.path.exists(candidate):
            return candidate
    return path


def parse_config(path):
    cfg = defaults()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected 'key = value'"
                                  % (path, lineno))
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            cfg[key] = _parse_pair(key, value, "%s:%d" % (path, lineno))
    return cfg


def apply_overrides(cfg, overrides):
    for item in overrides:
        if "=" not in item:
            raise ConfigError("override %r is not of the form key=value" % item)
        key, _, value = item.partition("=")
        key, value = key.strip(), value.strip()
        cfg[key] = _parse_pair(key, value, "override")
    return cfg


def require(cfg, keys, command):
    for key in keys:
        if cfg.get(key) is None:
            raise ConfigError("%s requires config key %r" % (command, key))
