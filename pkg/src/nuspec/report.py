"""Run configuration and report emission (JSON, CSV, aligned table).

Every report carries the tool version and the resolved :class:`RunConfig`.
Thread count and output path are deliberately left out of the echo: they
change neither the numbers nor their order, and keeping them out makes
reports byte-identical across ``--threads`` values.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__

FORMATS = ("json", "csv", "table")


@dataclass(frozen=True)
class Tolerances:
    pointwise: float = 1e-3
    integral: float = 1e-4
    convergence_slope: float = 0.3


@dataclass(frozen=True)
class RunConfig:
    manifold: Optional[str] = None
    family: Optional[str] = None
    grid: Optional[str] = None
    levels: Optional[str] = None
    cutoff: Optional[str] = None
    alpha: str = "0"
    k: Optional[str] = None
    epsilon: float = 1e-3
    nodes: tuple[int, int] = (6, 12)
    points: int = 20
    seed: int = 0
    format: Optional[str] = None
    tolerances: Tolerances = field(default_factory=Tolerances)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["nodes"] = list(self.nodes)
        return out


# keys accepted in a config file but not echoed
RUNTIME_KEYS = ("threads", "out")


class ConfigError(ValueError):
    pass


def _coerce(name: str, value: Any) -> Any:
    if name == "tolerances":
        if not isinstance(value, dict):
            raise ConfigError("tolerances must be an object")
        known = {f.name for f in fields(Tolerances)}
        unknown = set(value) - known
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        return Tolerances(**{k: float(v) for k, v in value.items()})
    if name == "nodes":
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError("nodes must be [polar, azimuth]")
        return (int(value[0]), int(value[1]))
    if name in ("epsilon",):
        return float(value)
    if name in ("points", "seed"):
        return int(value)
    if name == "format" and value is not None and value not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    if value is None:
        return None
    return str(value)


def load_config(path: Optional[str]) -> tuple[RunConfig, dict]:
    """Config file contents as a RunConfig plus the runtime-only keys."""
    if path is None:
        return RunConfig(), {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known - set(RUNTIME_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    runtime = {k: data[k] for k in RUNTIME_KEYS if k in data}
    values = {k: _coerce(k, v) for k, v in data.items() if k in known}
    return RunConfig(**values), runtime


def override(config: RunConfig, **values: Any) -> RunConfig:
    """Apply command-line values that were actually given (not None)."""
    given = {k: _coerce(k, v) for k, v in values.items() if v is not None}
    return replace(config, **given)


@dataclass(frozen=True)
class Report:
    command: str
    config: RunConfig
    result: Any  # JSON payload
    rows: Sequence[dict]  # flat records for CSV and table output
    ok: bool = True


def _header(report: Report) -> dict:
    return {"tool": "nuspec", "version": __version__, "command": report.command, "config": report.config.to_dict()}


def to_json(report: Report) -> str:
    payload = _header(report) | {"ok": report.ok, "result": report.result}
    return json.dumps(payload, indent=2) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _columns(rows: Sequence[dict]) -> list[str]:
    cols: list[str] = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    config = json.dumps(report.config.to_dict(), separators=(",", ":"))
    buf.write(f"# nuspec {__version__} command={report.command} config={config}\n")
    rows = list(report.rows)
    if rows:
        cols = _columns(rows)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def to_table(report: Report) -> str:
    rows = list(report.rows)
    lines = [f"nuspec {__version__} {report.command}"]
    if rows:
        cols = _columns(rows)
        cells = [[_cell(row.get(c)) for c in cols] for row in rows]
        widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(cols)]
        lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
        lines.append("  ".join("-" * w for w in widths))
        lines.extend("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells)
    return "\n".join(lines) + "\n"


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    if fmt == "table":
        return to_table(report)
    raise ConfigError(f"unknown format {fmt!r}")
