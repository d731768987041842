"""Trace container and deterministic JSONL serialization.

Floating-point values are written with 17 significant digits so traces
round-trip exactly and identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["SimTrace", "dumps_json"]


def _fmt(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = ",".join(f"{json.dumps(str(k))}:{_fmt(v)}" for k, v in value.items())
        return "{" + items + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps_json(obj) -> str:
    """Deterministic JSON with fixed-precision floats (no whitespace)."""
    return _fmt(obj)


@dataclass
class SimTrace:
    """Header, time-ordered records, and final summary of one run."""

    header: dict
    records: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def write_jsonl(self, path: str | Path) -> None:
        """One JSON object per line: header first, then records, then summary."""
        with open(path, "w") as fh:
            fh.write(dumps_json({"kind": "header", **self.header}) + "\n")
            for rec in self.records:
                fh.write(dumps_json({"kind": "record", **rec}) + "\n")
            fh.write(dumps_json({"kind": "summary", **self.summary}) + "\n")

    @classmethod
    def read_jsonl(cls, path: str | Path) -> "SimTrace":
        header = None
        records = []
        summary = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                kind = obj.pop("kind", None)
                if kind == "header":
                    header = obj
                elif kind == "record":
                    records.append(obj)
                elif kind == "summary":
                    summary = obj
                else:
                    raise ValueError(f"malformed trace line (kind={kind!r})")
        if header is None:
            raise ValueError("trace has no header line")
        return cls(header=header, records=records, summary=summary)
