"""Row-oriented report output (table, CSV, JSON lines) and the matching readers."""

from __future__ import annotations

import csv
import io
import json
import re
from typing import Sequence

from .transcript import dumps

FORMATS = ("table", "csv", "jsonl")


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render(rows: Sequence[dict], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(dumps(r) + "\n" for r in rows)
    if not rows:
        return ""
    columns = list(rows[0])
    for r in rows[1:]:
        columns += [c for c in r if c not in columns]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({c: _cell(r[c]) if c in r else "" for c in columns})
        return buf.getvalue()
    if fmt == "table":
        cells = [[_cell(r.get(c, "-")) for c in columns] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def read_report(text: str, fmt: str) -> list[dict]:
    """Parse output of :func:`render`. CSV and table cells come back as strings."""
    if fmt == "jsonl":
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    if fmt == "csv":
        return [dict(r) for r in csv.DictReader(io.StringIO(text))]
    if fmt == "table":
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines:
            return []
        header = re.split(r"\s{2,}", lines[0].strip())
        return [dict(zip(header, re.split(r"\s{2,}", l.strip()))) for l in lines[1:]]
    raise ValueError(f"unknown format {fmt!r}")


def as_strings(rows: Sequence[dict]) -> list[dict]:
    """Rows as the CSV/table readers return them."""
    return [{k: _cell(v) for k, v in r.items()} for r in rows]
