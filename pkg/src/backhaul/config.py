"""Flat ``key = value`` config files (``#`` comments, no sections)."""
from __future__ import annotations

import configparser
from pathlib import Path


class ConfigError(ValueError):
    pass


def read_flat_config(path: str | Path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        interpolation=None,
    )
    parser.optionxform = str  # keep key case
    try:
        parser.read_string("[config]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return dict(parser["config"])


def parse_list(value: str, convert=str) -> list:
    items = [v.strip() for v in value.replace(";", ",").split(",")]
    return [convert(v) for v in items if v]


def parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")
