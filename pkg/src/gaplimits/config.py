"""Run configuration: typed parameters, the ``key = value`` file format and
its canonical serialization.

A config file holds one ``key = value`` per line (``#`` comments, blank
lines ignored).  Keys are the long flag names of the chosen command with
dashes or underscores (``chain-rows`` and ``chain_rows`` are the same key),
plus ``command``, ``seed``, ``out`` and ``format``.  Every key may appear
once.  Values use the same syntax as on the command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError, DuplicateKeyError, MalformedValueError, UnknownKeyError
from .report import FORMATS, render_value

DEFAULT_SEED = 20140101
GLOBAL_KEYS = ("command", "seed", "out", "format")


# -- value types -----------------------------------------------------------
# Each raises MalformedValueError; the function name doubles as the type
# name in diagnostics.


def integer(text) -> int:
    if isinstance(text, int):
        return text
    s = str(text).strip().replace("_", "")
    try:
        return int(s)
    except ValueError:
        pass
    try:
        if "**" in s:
            base, exp = s.split("**")
            return int(base) ** int(exp)
        v = float(s)
    except ValueError as exc:
        raise MalformedValueError(f"not an integer: {text!r}") from exc
    if not math.isfinite(v) or v != int(v):
        raise MalformedValueError(f"not an integer: {text!r}")
    return int(v)


def real(text) -> float:
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedValueError(f"not a real number: {text!r}") from exc


def rational(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedValueError(f"not a rational number: {text!r}") from exc


def vector(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    try:
        return tuple(float(Fraction(p)) for p in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedValueError(f"malformed vector {text!r}") from exc


def intvector(text) -> tuple[int, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise MalformedValueError(f"malformed integer vector {text!r}") from exc


def string(text) -> str:
    return str(text).strip()


def boolean(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise MalformedValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Param:
    name: str
    type: Callable[[Any], Any]
    default: Any = None
    help: str = ""
    choices: tuple | None = None

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")

    def convert(self, raw) -> Any:
        value = self.type(raw)
        if self.choices is not None and value not in self.choices:
            raise MalformedValueError(f"{self.name}: {value!r} is not one of {', '.join(map(str, self.choices))}")
        return value


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def read_pairs(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw ``key -> value`` pairs, rejecting duplicates and malformed lines."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedValueError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = normalize_key(key)
        if not key:
            raise MalformedValueError(f"{source}:{lineno}: empty key")
        if key in out:
            raise DuplicateKeyError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    output_path: str = "-"
    format: str = "csv"

    def canonical(self) -> str:
        """Sorted ``key = value`` text; parsing it reproduces this config."""
        lines = [f"command = {self.command}"]
        glob = {"format": self.format, "out": self.output_path, "seed": self.seed}
        items = {**{k: v for k, v in self.params.items() if v is not None}, **glob}
        for k in sorted(items):
            lines.append(f"{k} = {render_value(items[k])}")
        return "\n".join(lines) + "\n"


def build_config(
    command: str,
    raw: dict[str, Any],
    schema: dict[str, list[Param]],
    *,
    base: RunConfig | None = None,
    source: str = "<config>",
) -> RunConfig:
    """Type-check ``raw`` against the command's parameters.

    Values already present in ``base`` are overridden by ``raw``; missing
    ones fall back to the declared defaults.
    """
    if command not in schema:
        raise UnknownKeyError(f"{source}: unknown command {command!r}")
    params = {p.name: p for p in schema[command]}
    if base is not None and base.command == command:
        values = dict(base.params)
        cfg = RunConfig(command, values, base.seed, base.output_path, base.format)
    else:
        values = {p.name: p.default for p in params.values()}
        cfg = RunConfig(command, values)
    for key, value in raw.items():
        key = normalize_key(key)
        if key == "command":
            continue
        if key == "seed":
            cfg.seed = integer(value)
        elif key == "out":
            cfg.output_path = string(value)
        elif key == "format":
            fmt = string(value)
            if fmt not in FORMATS:
                raise MalformedValueError(f"format must be one of {', '.join(FORMATS)}; got {fmt!r}")
            cfg.format = fmt
        elif key in params:
            try:
                values[key] = params[key].convert(value)
            except MalformedValueError as exc:
                raise MalformedValueError(f"{source}: {key}: {exc}") from exc
        else:
            raise UnknownKeyError(f"{source}: unknown key {key!r} for command {command!r}")
    return cfg


def parse_config(path: str | Path, schema: dict[str, list[Param]], command: str | None = None) -> RunConfig:
    """Read a config file.  ``command`` (e.g. from the command line) wins over the file's."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    raw = read_pairs(text, str(path))
    cmd = command or raw.get("command")
    if not cmd:
        raise ConfigError(f"{path}: no command given in file or on the command line")
    return build_config(cmd, raw, schema, source=str(path))
