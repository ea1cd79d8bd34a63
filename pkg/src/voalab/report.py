"""Verification reports: one line per instance plus a JSON form for replay."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .linalg import Vec, fmt_rational

SCHEMA_VERSION = 1


@dataclass
class Entry:
    check: str
    descriptor: str
    residual: Dict[str, str]

    @property
    def zero(self) -> bool:
        return not self.residual


@dataclass
class Report:
    title: str
    entries: List[Entry] = field(default_factory=list)
    skipped: int = 0
    notes: List[str] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def add(self, check: str, descriptor: str, residual: Vec, module=None) -> Entry:
        label = module.label if module is not None else str
        res = {label(k): fmt_rational(c) for k, c in residual.items() if c}
        e = Entry(check, descriptor, res)
        self.entries.append(e)
        return e

    def add_bool(self, check: str, descriptor: str, ok: bool, detail: str = "") -> Entry:
        e = Entry(check, descriptor, {} if ok else {"failure": detail or "false"})
        self.entries.append(e)
        return e

    def extend(self, other: "Report"):
        self.entries.extend(other.entries)
        self.skipped += other.skipped
        self.notes.extend(other.notes)

    @property
    def passed(self) -> bool:
        return all(e.zero for e in self.entries)

    @property
    def failures(self) -> List[Entry]:
        return [e for e in self.entries if not e.zero]

    def counts(self) -> Dict[str, int]:
        return dict(Counter(e.check for e in self.entries))

    def summary(self) -> str:
        n_bad = len(self.failures)
        status = "PASS" if self.passed else "FAIL"
        per = ", ".join(f"{k}={v}" for k, v in sorted(self.counts().items()))
        return f"{status} {self.title}: {len(self.entries)} instances ({per}), {n_bad} failing, {self.skipped} skipped"

    def lines(self, verbose: bool = False) -> List[str]:
        out = []
        for e in self.entries:
            if verbose or not e.zero:
                tag = "ok" if e.zero else "FAIL"
                tail = "" if e.zero else " residual=" + json.dumps(e.residual, sort_keys=True)
                out.append(f"{tag} {e.descriptor}{tail}")
        out.extend(self.notes)
        out.append(self.summary())
        return out

    def to_json(self) -> Dict[str, Any]:
        items = []
        for e in self.entries:
            item = {"check": e.check, "instance": e.descriptor, "residual_zero": e.zero}
            if not e.zero:
                item["residual"] = e.residual
            items.append(item)
        return {
            "schema_version": SCHEMA_VERSION,
            "title": self.title,
            "passed": self.passed,
            "skipped": self.skipped,
            "meta": self.meta,
            "notes": self.notes,
            "instances": items,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def load_report(text: str) -> Dict[str, Any]:
    data = json.loads(text)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema_version {data.get('schema_version')!r}")
    return data


def failing_instances(data: Dict[str, Any]) -> List[str]:
    return [i["instance"] for i in data["instances"] if not i["residual_zero"]]


def instance_fields(descriptor: str) -> Dict[str, str]:
    """Split ``kind;k=v;...`` into a dict with the kind under ``check``."""
    kind, *rest = descriptor.split(";")
    out = {"check": kind}
    for part in rest:
        k, _, v = part.partition("=")
        out[k] = v
    return out


def find_entry(report: Report, descriptor: str) -> Optional[Entry]:
    for e in report.entries:
        if e.descriptor == descriptor:
            return e
    return None
