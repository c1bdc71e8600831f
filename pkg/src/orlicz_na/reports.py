"""Verification reports and deterministic serialization.

Every checker returns a :class:`VerificationReport`; the CLI writes them as
JSON plus per-case CSV.  Serialization is deterministic — sorted keys, fixed
float formatting through ``repr``, no timestamps — so identical inputs and
seeds produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence


@dataclass
class VerificationReport:
    """Outcome of one verification run."""

    name: str
    passed: bool
    n_checked: int = 0
    n_violations: int = 0
    n_undefined: int = 0
    worst_margin: Optional[float] = None
    tolerance: Optional[float] = None
    cases: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "n_checked": self.n_checked,
            "n_violations": self.n_violations,
            "n_undefined": self.n_undefined,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "cases": _plain(self.cases),
            "meta": _plain(self.meta),
        }

    def summary_line(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        extra = ""
        if self.worst_margin is not None:
            extra = f" worst_margin={self.worst_margin:.3e}"
        return (
            f"[{state}] {self.name}: checked={self.n_checked} "
            f"violations={self.n_violations} undefined={self.n_undefined}{extra}"
        )


def _plain(obj: Any) -> Any:
    """Round-trip arbitrary report payloads into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if hasattr(obj, "item") and callable(obj.item) and getattr(obj, "ndim", None) == 0:
        return obj.item()  # numpy scalar
    if hasattr(obj, "tolist"):
        return obj.tolist()  # numpy array
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return repr(obj)


def canonical_json(payload: Any) -> str:
    """Deterministic JSON text: sorted keys, repr-exact floats, no spaces drift."""
    return json.dumps(_plain(payload), sort_keys=True, indent=2, allow_nan=True)


def config_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def provenance(config_text: Optional[str], seed: Optional[int], version: str) -> dict:
    return {
        "config_sha256": config_digest(config_text) if config_text is not None else None,
        "seed": seed,
        "version": version,
    }


def write_json_report(path: str, reports: Sequence[VerificationReport], prov: dict) -> None:
    payload = {
        "provenance": prov,
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(canonical_json(payload))
        fh.write("\n")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])


def _csv_cell(v: Any) -> Any:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v
