"""Bit-stable report records and serialization.

Reports are flat sequences of check records plus a config echo, a summary
verdict, and deterministic run metadata. Serialization is byte-stable for a
fixed config and seed: fixed key order, floats at 17 significant digits,
newline-terminated lines, and no wall-clock content. File output is atomic
(temp file, then rename).
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

TOOL_NAME = "mconvex"
TOOL_VERSION = "0.1.0"


@dataclass(frozen=True)
class CheckRecord:
    """One measured check: what was measured, where, and the gate it faced.

    ``threshold`` is None for informational records, which always pass.
    ``location`` pins a reproduction point (coordinates or parameters).
    """

    name: str
    value: float
    threshold: Optional[float] = None
    passed: bool = True
    location: Optional[Sequence[float]] = None
    detail: str = ""


@dataclass
class Report:
    kind: str
    seed: int
    config_echo: dict
    records: list = field(default_factory=list)
    failure: Optional[str] = None

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    @property
    def verdict(self) -> str:
        if self.failure is not None:
            return "error"
        return "pass" if all(r.passed for r in self.records) else "fail"

    @property
    def failed_count(self) -> int:
        return sum(0 if r.passed else 1 for r in self.records)


def _fmt_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if value != value:
            return '"nan"'
        if value == float("inf"):
            return '"inf"'
        if value == float("-inf"):
            return '"-inf"'
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    return _quote(str(value))


def _quote(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
    return f'"{out}"'


def _json_value(value) -> str:
    if isinstance(value, dict):
        inner = ",".join(f"{_quote(str(k))}:{_json_value(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_json_value(v) for v in value) + "]"
    return _fmt_scalar(value)


def _json_line(pairs) -> str:
    return "{" + ",".join(f"{_quote(k)}:{_json_value(v)}" for k, v in pairs) + "}\n"


def emit(report: Report, fmt: str) -> bytes:
    """Serialize the report with a stable field order."""
    if fmt == "json-lines":
        return _emit_json_lines(report)
    if fmt == "csv-summary":
        return _emit_csv(report)
    raise ValueError(f"unknown format {fmt!r}")


def _record_pairs(rec: CheckRecord):
    return [
        ("record", "check"),
        ("name", rec.name),
        ("value", float(rec.value)),
        ("threshold", None if rec.threshold is None else float(rec.threshold)),
        ("passed", bool(rec.passed)),
        ("location", None if rec.location is None else [float(v) for v in rec.location]),
        ("detail", rec.detail),
    ]


def _emit_json_lines(report: Report) -> bytes:
    buf = io.StringIO()
    buf.write(
        _json_line(
            [
                ("record", "meta"),
                ("tool", TOOL_NAME),
                ("version", TOOL_VERSION),
                ("kind", report.kind),
                ("seed", report.seed),
            ]
        )
    )
    buf.write(_json_line([("record", "config"), ("config", report.config_echo)]))
    for rec in report.records:
        buf.write(_json_line(_record_pairs(rec)))
    if report.failure is not None:
        buf.write(
            _json_line([("record", "failure"), ("message", report.failure)])
        )
    buf.write(
        _json_line(
            [
                ("record", "summary"),
                ("verdict", report.verdict),
                ("checks", len(report.records)),
                ("failed", report.failed_count),
            ]
        )
    )
    return buf.getvalue().encode("utf-8")


_CSV_HEADER = "record,name,value,threshold,passed,location,detail\n"


def _csv_cell(text: str) -> str:
    if any(ch in text for ch in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text


def _emit_csv(report: Report) -> bytes:
    buf = io.StringIO()
    buf.write(_CSV_HEADER)
    for rec in report.records:
        loc = (
            ""
            if rec.location is None
            else ";".join(format(float(v), ".17g") for v in rec.location)
        )
        cells = [
            "check",
            rec.name,
            format(float(rec.value), ".17g"),
            "" if rec.threshold is None else format(float(rec.threshold), ".17g"),
            "true" if rec.passed else "false",
            loc,
            rec.detail,
        ]
        buf.write(",".join(_csv_cell(c) for c in cells) + "\n")
    if report.failure is not None:
        buf.write(
            ",".join(
                _csv_cell(c)
                for c in ["failure", report.failure, "", "", "false", "", ""]
            )
            + "\n"
        )
    return buf.getvalue().encode("utf-8")


def write_atomic(path: str, payload: bytes) -> None:
    """Write through a temp file and rename, so failures leave no partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
