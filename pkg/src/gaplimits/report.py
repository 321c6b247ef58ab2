"""Report records and their three renderings.

A report is a list of named sections; each section is either a block of
scalars (ordered key/value pairs) or a table (header + rows).

csv
    Each section is a CSV block preceded by a ``# <section>`` line and
    followed by a blank line.  Scalar sections become a ``key,value`` table.

text
    One ``section.key = value`` line per scalar.  A table becomes a
    ``section.columns = a,b,...`` line followed by ``section.<i> = ...``
    rows numbered from 0.

tree
    JSON with sorted keys: ``{"command", "params", "sections"}``; scalar
    sections map to objects, tables to lists of row objects.

Values are rendered deterministically: exact rationals as ``p/q``,
floats with ``repr``, booleans as ``true``/``false``, sequences joined by
commas, ``None`` as ``none``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

FORMATS = ("csv", "tree", "text")


def _scalar(v: Any):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def render_value(v: Any) -> str:
    v = _scalar(v)
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(render_value(x) for x in v)
    return str(v)


def tree_value(v: Any):
    v = _scalar(v)
    if isinstance(v, Fraction):
        return render_value(v)
    if isinstance(v, float) and not math.isfinite(v):
        return render_value(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [tree_value(x) for x in v]
    if isinstance(v, dict):
        return {str(k): tree_value(x) for k, x in v.items()}
    return v


@dataclass
class Section:
    name: str
    scalars: dict = field(default_factory=dict)
    columns: tuple[str, ...] | None = None
    rows: list = field(default_factory=list)

    @property
    def is_table(self) -> bool:
        return self.columns is not None


@dataclass
class Report:
    command: str
    params: dict = field(default_factory=dict)
    sections: list[Section] = field(default_factory=list)

    def scalars(self, name: str, **values) -> Section:
        s = Section(name, dict(values))
        self.sections.append(s)
        return s

    def table(self, name: str, columns: Sequence[str], rows) -> Section:
        s = Section(name, columns=tuple(columns), rows=[tuple(r) for r in rows])
        self.sections.append(s)
        return s

    def section(self, name: str) -> Section:
        for s in self.sections:
            if s.name == name:
                return s
        raise KeyError(name)

    # -- renderings ---------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        blocks = [Section("params", dict(self.params))] + self.sections
        for s in blocks:
            buf.write(f"# {s.name}\n")
            if s.is_table:
                w.writerow(s.columns)
                for r in s.rows:
                    w.writerow([render_value(v) for v in r])
            else:
                w.writerow(("key", "value"))
                for k, v in s.scalars.items():
                    w.writerow((k, render_value(v)))
            buf.write("\n")
        return f"# command: {self.command}\n" + buf.getvalue()

    def to_text(self) -> str:
        lines = [f"command = {self.command}"]
        for k, v in self.params.items():
            lines.append(f"params.{k} = {render_value(v)}")
        for s in self.sections:
            if s.is_table:
                lines.append(f"{s.name}.columns = {','.join(s.columns)}")
                for i, r in enumerate(s.rows):
                    lines.append(f"{s.name}.{i} = {render_value(list(r))}")
            else:
                for k, v in s.scalars.items():
                    lines.append(f"{s.name}.{k} = {render_value(v)}")
        return "\n".join(lines) + "\n"

    def to_tree(self) -> dict:
        out = {}
        for s in self.sections:
            if s.is_table:
                out[s.name] = [dict(zip(s.columns, (tree_value(v) for v in r))) for r in s.rows]
            else:
                out[s.name] = {k: tree_value(v) for k, v in s.scalars.items()}
        return {"command": self.command, "params": tree_value(dict(self.params)), "sections": out}

    def to_json(self) -> str:
        return json.dumps(self.to_tree(), sort_keys=True, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.to_text()
        if fmt == "tree":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")


def parse_text(text: str) -> dict[str, str]:
    """Inverse of the text rendering at the string level: ``key -> raw value``."""
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out
