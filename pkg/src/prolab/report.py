"""Deterministic report assembly and rendering.

A report collects key/value lines, tables, and warnings in insertion
order; rendering (text or JSON) is a pure function of that content, so
identical inputs and seeds always produce byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class Report:
    command: str
    inputs: list[tuple[str, str]] = field(default_factory=list)
    seed: int | None = None
    items: list = field(default_factory=list)
    status: str = "ok"

    def add_input(self, name: str, content: bytes):
        self.inputs.append((name, digest(content)))

    def kv(self, key: str, value):
        self.items.append(("kv", key, _stringify(value)))

    def table(self, title: str, headers: list[str], rows: list[list]):
        self.items.append(("table", title, [str(h) for h in headers],
                           [[_stringify(c) for c in row] for row in rows]))

    def warn(self, message: str):
        self.items.append(("warn", str(message)))

    def blank(self):
        self.items.append(("blank",))

    # -- rendering ----------------------------------------------------------

    def render_text(self) -> str:
        lines = [f"= plab {self.command} ="]
        for name, sha in self.inputs:
            lines.append(f"input: {name} sha256:{sha}")
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        for item in self.items:
            if item[0] == "kv":
                lines.append(f"{item[1]}: {item[2]}")
            elif item[0] == "warn":
                lines.append(f"warning: {item[1]}")
            elif item[0] == "blank":
                lines.append("")
            elif item[0] == "table":
                _, title, headers, rows = item
                lines.append(f"table: {title}")
                widths = [len(h) for h in headers]
                for row in rows:
                    for i, cell in enumerate(row):
                        widths[i] = max(widths[i], len(cell))
                header = "  " + " | ".join(h.ljust(w) for h, w in zip(headers, widths))
                lines.append(header)
                lines.append("  " + "-+-".join("-" * w for w in widths))
                for row in rows:
                    lines.append("  " + " | ".join(c.ljust(w) for c, w in zip(row, widths)))
        lines.append(f"status: {self.status}")
        return "\n".join(lines) + "\n"

    def render_json(self) -> str:
        payload = {
            "command": self.command,
            "inputs": [{"file": name, "sha256": sha} for name, sha in self.inputs],
            "seed": self.seed,
            "items": [self._item_json(item) for item in self.items],
            "status": self.status,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    @staticmethod
    def _item_json(item):
        if item[0] == "kv":
            return {"kind": "kv", "key": item[1], "value": item[2]}
        if item[0] == "warn":
            return {"kind": "warning", "message": item[1]}
        if item[0] == "blank":
            return {"kind": "blank"}
        _, title, headers, rows = item
        return {"kind": "table", "title": title, "headers": headers, "rows": rows}


def _stringify(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(_stringify(v) for v in value) + ")"
    if isinstance(value, dict):
        inner = ", ".join(f"{k}={_stringify(v)}" for k, v in sorted(value.items(),
                                                                    key=lambda kv: str(kv[0])))
        return "{" + inner + "}"
    return str(value)
