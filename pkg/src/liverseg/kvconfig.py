"""Plain-text ``key = value`` configuration files.

One setting per line; blank lines and lines starting with ``#`` are ignored;
everything before the first ``=`` is the key.  Keys and values are stripped
of surrounding whitespace.  This tiny format is shared by the preprocessing
pipeline and the scheduler simulator.
"""

from __future__ import annotations


def parse_keyvalues(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def read_keyvalues(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_keyvalues(fh.read())
