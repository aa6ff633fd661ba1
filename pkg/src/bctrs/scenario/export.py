"""CSV and JSON-lines export of metrics, ledger traces and curve tables."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from .curves import CurveTable
from .engine import MetricsSeries, RunResult

FAMILIES = ("trust", "reputation", "balances", "counters")


class ExportError(OSError):
    pass


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ExportError(f"{path}: {exc.strerror or exc}") from None
    return path


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return _write(Path(path), _csv_text(header, rows))


def export_metrics(series: MetricsSeries, destination: str | Path) -> list[Path]:
    """One CSV per metric family, one row per round."""
    out = Path(destination)
    written = []
    for family in FAMILIES:
        columns = {
            "trust": series.trust_columns,
            "reputation": series.reputation_columns,
            "balances": series.balance_columns,
            "counters": series.counter_columns,
        }[family]
        rows = getattr(series, family)
        body = ([r] + [row[c] for c in columns] for r, row in zip(series.rounds, rows))
        written.append(write_table(out / f"{family}.csv", ["round", *columns], body))
    return written


def export_trace(trace: list[dict[str, Any]], path: str | Path) -> Path:
    lines = "".join(json.dumps(line, sort_keys=True) + "\n" for line in trace)
    return _write(Path(path), lines)


def export(result: RunResult, destination: str | Path) -> list[Path]:
    paths = export_metrics(result.metrics, destination)
    paths.append(export_trace(result.trace, Path(destination) / "ledger_trace.jsonl"))
    return paths


def export_curve(table: CurveTable, path: str | Path) -> Path:
    return write_table(Path(path), table.columns, table.rows())
