"""Experiment report records and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["SCHEMA_VERSION", "Report", "ReportRecord", "to_plain", "write_csv"]

SCHEMA_VERSION = 1
STATUSES = ("pass", "fail", "inconclusive")


def to_plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


@dataclass
class ReportRecord:
    """One row of an experiment run.

    A ``"pass"`` status is only accepted when every tolerance key also
    present in ``outputs`` satisfies ``|outputs[key]| <= tolerances[key]``.
    """

    experiment_id: str
    inputs: dict
    outputs: dict
    status: str
    tolerances: dict = field(default_factory=dict)
    wall_time_ms: int = 0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")
        self.inputs = to_plain(self.inputs)
        self.outputs = to_plain(self.outputs)
        self.tolerances = to_plain(self.tolerances)
        self.wall_time_ms = int(self.wall_time_ms)
        if self.status == "pass":
            bad = self.violations()
            if bad:
                raise ValueError(f"record {self.experiment_id!r} marked pass but {bad} exceed tolerance")

    def violations(self) -> list[str]:
        bad = []
        for key, tol in self.tolerances.items():
            if key in self.outputs:
                value = self.outputs[key]
                if value is None or not (isinstance(value, (int, float)) and abs(value) <= tol):
                    bad.append(key)
        return bad

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ReportRecord":
        return cls(**data)


class Report:
    """Append-only collection of records for one run."""

    def __init__(self, command: str, records=()):
        self.command = command
        self._records: list[ReportRecord] = list(records)

    @property
    def records(self) -> tuple[ReportRecord, ...]:
        return tuple(self._records)

    def append(self, record: ReportRecord) -> None:
        self._records.append(record)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "records": [r.to_dict() for r in self._records],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "Report":
        data = json.loads(text)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {data.get('schema_version')!r}")
        return cls(data["command"], [ReportRecord.from_dict(r) for r in data["records"]])

    def write(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def read(cls, path) -> "Report":
        return cls.loads(Path(path).read_text())


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) and math.isfinite(v) else v for v in row])
