"""Plain-text ``key = value`` configuration files.

Format: UTF-8, one assignment per line, ``#`` starts a comment, blank lines
ignored.  Keys are case-sensitive; values are kept as stripped strings and
typed by the consumer.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, Union


class ConfigError(ValueError):
    """Malformed configuration or unknown/invalid parameter."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def parse_config_text(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'", key)
        values[key] = value
    return values


def load_config(path: Union[str, Path]) -> Dict[str, str]:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def format_config(values: Dict[str, object]) -> str:
    return "".join(f"{key} = {value}\n" for key, value in values.items())


def check_known(values: Dict[str, str], known: Iterable[str]) -> None:
    known = set(known)
    for key in values:
        if key not in known:
            raise ConfigError(f"unknown parameter '{key}'", key)


def as_float(values: Dict[str, str], key: str) -> float:
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(f"parameter '{key}' is not a number: {values[key]!r}", key) from None


def as_int(values: Dict[str, str], key: str) -> int:
    try:
        return int(values[key])
    except ValueError:
        raise ConfigError(f"parameter '{key}' is not an integer: {values[key]!r}", key) from None


def as_complex(values: Dict[str, str], key: str) -> complex:
    try:
        return complex(values[key].replace(" ", ""))
    except ValueError:
        raise ConfigError(f"parameter '{key}' is not a complex number: {values[key]!r}", key) from None
