"""Line-oriented ``[section]`` / ``key = value`` text format.

Comments start with ``#`` or ``;``. Values stay strings here; callers
convert them and report failures through :class:`ConfigError` with the
originating line number.
"""

import re
from typing import NamedTuple

from .errors import ConfigError

_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_.\-]+)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


class Entry(NamedTuple):
    section: str
    key: str
    value: str
    line: int


def strip_comment(text: str) -> str:
    quoted = None
    for i, ch in enumerate(text):
        if ch in "\"'":
            quoted = None if quoted == ch else (quoted or ch)
        elif ch in "#;" and quoted is None:
            return text[:i]
    return text


def parse_sections(text: str):
    """Yield entries in file order; duplicate keys within a section are errors."""
    section = None
    seen = set()
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw).strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            continue
        m = _ENTRY.match(line)
        if not m:
            raise ConfigError(f"cannot parse {raw.strip()!r}", line=lineno)
        if section is None:
            raise ConfigError(f"key {m.group(1)!r} appears before any [section]", line=lineno)
        key, value = m.group(1), m.group(2).strip()
        if (section, key) in seen:
            raise ConfigError(f"duplicate key {section}.{key}", line=lineno)
        seen.add((section, key))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        entries.append(Entry(section, key, value, lineno))
    return entries


def to_float(entry: Entry) -> float:
    try:
        return float(entry.value)
    except ValueError:
        raise ConfigError(f"{entry.section}.{entry.key}: expected a number, got {entry.value!r}", line=entry.line)


def to_int(entry: Entry) -> int:
    try:
        return int(entry.value)
    except ValueError:
        raise ConfigError(f"{entry.section}.{entry.key}: expected an integer, got {entry.value!r}", line=entry.line)


def to_bool(entry: Entry) -> bool:
    v = entry.value.lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{entry.section}.{entry.key}: expected true/false, got {entry.value!r}", line=entry.line)


def to_float_list(entry: Entry):
    parts = [p.strip() for p in entry.value.strip("[]").split(",") if p.strip()]
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{entry.section}.{entry.key}: expected numbers, got {entry.value!r}", line=entry.line)
