"""Report serialization: CSV for reading, JSON mirror for full precision.

Every analysis emits the same rows twice: a CSV with floats printed at 4
decimals (table precision) and a JSON file keeping full float precision.
Both writers are deterministic: fixed column order, no timestamps, sorted
keys in JSON.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Mapping, Sequence

FLOAT_DECIMALS = 4


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{FLOAT_DECIMALS}f}"
    return str(value)


def write_csv(path: str | Path, columns: Sequence[str],
              rows: Sequence[Mapping[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(col)) for col in columns])


def write_json(path: str | Path, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")


def write_report(out_dir: str | Path, name: str, columns: Sequence[str],
                 rows: Sequence[Mapping[str, Any]],
                 extra: Mapping[str, Any] | None = None) -> tuple[Path, Path]:
    """Write ``name.csv`` and ``name.json`` under ``out_dir``.

    The JSON mirror holds the same rows at full precision plus any extra
    analysis-level fields (seeds, flags, counters).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    json_path = out / f"{name}.json"
    write_csv(csv_path, columns, rows)
    payload: dict[str, Any] = {"rows": [dict(r) for r in rows]}
    if extra:
        payload.update(extra)
    write_json(json_path, payload)
    return csv_path, json_path


def stars(p_value: float) -> str:
    """Conventional significance marker for a p-value."""
    if p_value < 0.001:
        return "***"
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""
