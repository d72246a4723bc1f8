"""Structured-text report files: `key = value` lines plus named tables.

A report starts with `# handsteer-report v1`. Sections open with `[name]`;
lines inside a section are whitespace-separated table rows (first row is the
header). The format round-trips through :func:`write_report` and
:func:`parse_report` so tests and tooling can assert on report contents.
"""
from __future__ import annotations

from pathlib import Path

HEADER = "# handsteer-report v1"


def write_report(
    path: str | Path,
    values: dict[str, object],
    tables: dict[str, list[list[object]]] | None = None,
) -> None:
    lines = [HEADER]
    for key, value in values.items():
        lines.append(f"{key} = {value}")
    for name, rows in (tables or {}).items():
        lines.append("")
        lines.append(f"[{name}]")
        for row in rows:
            lines.append(" ".join(str(c) for c in row))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_report(path: str | Path):
    """Returns ``(values, tables)``; values are strings, tables row lists."""
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != HEADER:
        raise ValueError(f"{path}: not a handsteer report")
    values: dict[str, str] = {}
    tables: dict[str, list[list[str]]] = {}
    section: str | None = None
    for line in text[1:]:
        line = line.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            tables[section] = []
        elif section is None:
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
        else:
            tables[section].append(line.split())
    return values, tables
