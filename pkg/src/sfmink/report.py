"""Structured verification reports and their deterministic serialization.

Machine reports are JSON with sorted keys and round-trip float repr, so
repeated runs with identical inputs produce byte-identical files.  Wall
time is deliberately excluded from the machine report (it is printed on
stdout only) to keep that contract.
"""

import dataclasses
import json

import numpy as np

from . import __version__


@dataclasses.dataclass
class Verdict:
    name: str
    passed: bool
    value: float
    tolerance: float

    def row(self):
        status = "PASS" if self.passed else "FAIL"
        return f"  [{status}] {self.name}: value={self.value:.6e} tol={self.tolerance:.1e}"


@dataclasses.dataclass
class Report:
    command: str
    domain: dict
    resolution: int | None
    results: dict
    verdicts: list

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def to_dict(self):
        return {
            "command": self.command,
            "tool_version": __version__,
            "resolution": self.resolution,
            "domain": _jsonable(self.domain),
            "results": _jsonable(self.results),
            "verdicts": [
                {"name": v.name, "pass": bool(v.passed), "value": _jsonable(v.value),
                 "tolerance": _jsonable(v.tolerance)}
                for v in self.verdicts
            ],
            "all_pass": bool(self.passed),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def human_lines(self):
        lines = [f"== {self.command} (sfmink {__version__}) =="]
        for key, val in self.results.items():
            lines.append(f"  {key}: {_human(val)}")
        if self.verdicts:
            lines.append("verdicts:")
            lines.extend(v.row() for v in self.verdicts)
            lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return lines


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def _human(val):
    if isinstance(val, float):
        return f"{val:.10g}"
    if isinstance(val, dict):
        return "{" + ", ".join(f"{k}: {_human(v)}" for k, v in val.items()) + "}"
    if dataclasses.is_dataclass(val) and not isinstance(val, type):
        return _human(dataclasses.asdict(val))
    if isinstance(val, (list, tuple, np.ndarray)):
        seq = list(val)
        if len(seq) > 8:
            head = ", ".join(_human(v) for v in seq[:4])
            return f"[{head}, ... {len(seq)} values]"
        return "[" + ", ".join(_human(v) for v in seq) + "]"
    return str(val)


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
