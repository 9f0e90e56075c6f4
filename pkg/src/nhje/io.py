"""Table output: CSV with a one-line ``#`` JSON header, or a JSON document."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .errors import ConfigError

FORMATS = ("csv", "json")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool,)):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def write_table(path, columns, rows, meta: dict, fmt: str = "csv") -> Path:
    """Write ``rows`` under ``columns``; the suffix follows ``fmt``."""
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}", field="format")
    path = Path(path).with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
    else:
        doc = {
            "meta": meta,
            "columns": list(columns),
            "rows": [[_jsonable(v if isinstance(v, (str, int)) else float(v)) for v in r] for r in rows],
        }
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    """Return (metadata, columns, rows as strings) of a file written by :func:`write_table`."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        return doc["meta"], doc["columns"], [[str(v) for v in r] for r in doc["rows"]]
    first, _, rest = text.partition("\n")
    if not first.startswith("# "):
        raise ConfigError(f"{path} has no metadata header", line=1)
    try:
        meta = json.loads(first[2:])
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad metadata header: {exc.msg}", line=1) from None
    reader = list(csv.reader(rest.splitlines()))
    return meta, reader[0], reader[1:]
