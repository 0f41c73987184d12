"""Structured run reports: a JSON verdict document plus CSV series.

A report is a plain tree of JSON types; numeric series destined for
plotting ride along as named column blocks and are written as one CSV per
series when an output directory is given.  Reports embed the resolved
tolerance set and a config hash so runs are auditable, and hash
identically across reruns once the volatile provenance fields (timestamp,
duration) are stripped.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .tolerances import Tolerances

__all__ = ["Series", "RunReport", "report_hash", "write_report"]

_VOLATILE_PROVENANCE = ("timestamp", "duration_s")


def _plain(obj):
    """Recursively convert numpy scalars/arrays to JSON-compatible types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not np.isfinite(v):
            return repr(v)          # "inf"/"nan" as strings, JSON has neither
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


@dataclass
class Series:
    """A labeled numeric table: columns[i] names data[:, i]."""

    columns: list
    data: np.ndarray

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if self.data.shape[1] != len(self.columns):
            raise ValueError(
                f"{len(self.columns)} column names for data with "
                f"{self.data.shape[1]} columns")

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.data:
            lines.append(",".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"


@dataclass
class RunReport:
    command: str
    outputs: dict
    series: dict = field(default_factory=dict)       # name -> Series
    tolerances: Tolerances | dict | None = None
    config_sha256: str = ""
    seed: int = 0
    extra_provenance: dict = field(default_factory=dict)

    def as_dict(self, inline_series: bool = True) -> dict:
        tol = self.tolerances
        if isinstance(tol, Tolerances):
            tol = tol.as_dict()
        doc = {
            "command": self.command,
            "outputs": _plain(self.outputs),
            "tolerances": _plain(tol or {}),
            "provenance": {
                "config_sha256": self.config_sha256,
                "version": __version__,
                "seed": int(self.seed),
                "timestamp": datetime.now(timezone.utc).isoformat(),
                **_plain(self.extra_provenance),
            },
        }
        if inline_series:
            doc["series"] = {
                name: {"columns": list(s.columns), "data": _plain(s.data)}
                for name, s in self.series.items()
            }
        else:
            doc["series"] = {name: {"columns": list(s.columns),
                                    "file": f"{name}.csv",
                                    "rows": int(s.data.shape[0])}
                             for name, s in self.series.items()}
        return doc

    def to_json(self, inline_series: bool = True) -> str:
        return json.dumps(self.as_dict(inline_series=inline_series),
                          sort_keys=True, indent=2) + "\n"


def report_hash(doc: dict) -> str:
    """sha256 of the report with volatile provenance fields removed.

    Two runs of the same command on the same config must agree here even
    though their timestamps differ.
    """
    doc = json.loads(json.dumps(doc))        # deep copy via round-trip
    prov = doc.get("provenance", {})
    for k in _VOLATILE_PROVENANCE:
        prov.pop(k, None)
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def config_sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_report(report: RunReport, out_dir) -> list:
    """Write report.json plus one CSV per series into out_dir.

    Returns the list of written paths.  The JSON goes last so a crash in
    series writing cannot leave a report that references missing files.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    for name, s in report.series.items():
        p = out / f"{name}.csv"
        p.write_text(s.to_csv())
        written.append(p)
    p = out / "report.json"
    p.write_text(report.to_json(inline_series=False))
    written.append(p)
    return written
