"""Shared wire-format helpers: attribute strings, timestamps, TSV conventions.

Attribute maps travel as url-encoded ``key=value`` pairs joined by ``&`` with
keys sorted, so every encoding of the same map is byte-identical. Timestamps
are ISO-8601 UTC with a ``Z`` suffix at second resolution.
"""

from __future__ import annotations

from datetime import datetime, timezone
from urllib.parse import quote, unquote

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def encode_attrs(attrs: dict[str, str]) -> str:
    """Encode an attribute map as sorted url-encoded key=value pairs."""
    return "&".join(
        f"{quote(k, safe='')}={quote(v, safe='')}" for k, v in sorted(attrs.items())
    )


def decode_attrs(text: str) -> dict[str, str]:
    """Inverse of :func:`encode_attrs`. Empty string decodes to an empty map."""
    if not text:
        return {}
    attrs: dict[str, str] = {}
    for pair in text.split("&"):
        key, _, value = pair.partition("=")
        attrs[unquote(key)] = unquote(value)
    return attrs


def parse_ts(text: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_ts(dt: datetime) -> str:
    """Render a timestamp as ISO-8601 UTC with a Z suffix."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def write_lines(path, lines: list[str]) -> None:
    """Write sorted-ready lines with LF endings and UTF-8 encoding."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def read_lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]
