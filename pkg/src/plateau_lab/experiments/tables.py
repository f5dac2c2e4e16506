"""Result tables with provenance headers, CSV and JSON summary writers."""

from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import dataclass, field


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


@dataclass
class ResultTable:
    columns: dict[str, list] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def add_row(self, **cells) -> None:
        if not self.columns:
            for name in cells:
                self.columns[name] = []
        if set(cells) != set(self.columns):
            raise ValueError("row does not match the table columns")
        for name, value in cells.items():
            self.columns[name].append(value)

    def check(self) -> None:
        lengths = {len(col) for col in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("column lengths differ")

    def num_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def to_csv(self) -> str:
        self.check()
        buf = io.StringIO()
        for key in sorted(self.provenance):
            buf.write(f"# {key} = {self.provenance[key]}\n")
        names = list(self.columns)
        buf.write(",".join(names) + "\n")
        for i in range(self.num_rows()):
            buf.write(",".join(format_cell(self.columns[n][i]) for n in names) + "\n")
        return buf.getvalue()

    def aggregates(self) -> dict:
        out = {}
        for name, col in self.columns.items():
            numeric = [x for x in col if isinstance(x, (int, float)) and not isinstance(x, bool)]
            if numeric:
                out[name] = {
                    "min": min(numeric),
                    "max": max(numeric),
                    "mean": sum(numeric) / len(numeric),
                    "count": len(numeric),
                }
            else:
                out[name] = {"count": len(col)}
        return out

    def to_json(self) -> str:
        payload = {
            "provenance": self.provenance,
            "summary": self.summary,
            "aggregates": self.aggregates(),
            "columns": self.columns,
        }
        return json.dumps(payload, indent=2, sort_keys=True, default=str)


def write_atomic(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
