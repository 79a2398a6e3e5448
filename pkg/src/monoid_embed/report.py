"""Check reports and their JSON form."""

from __future__ import annotations

import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

MAX_WITNESSES = 20

PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass
class CheckReport:
    name: str
    status: str = PASS
    counts: dict[str, Any] = field(default_factory=dict)
    witnesses: list[Any] = field(default_factory=list)
    millis: float | None = None

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def bump(self, key: str, by: int = 1) -> None:
        self.counts[key] = self.counts.get(key, 0) + by

    def fail(self, witness: Any) -> None:
        self.status = FAIL
        self.bump("failures")
        if len(self.witnesses) < MAX_WITNESSES:
            self.witnesses.append(witness)

    def note(self, witness: Any) -> None:
        if len(self.witnesses) < MAX_WITNESSES:
            self.witnesses.append(witness)

    def to_dict(self, timings: bool = False) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "counts": dict(self.counts),
            "witnesses": list(self.witnesses),
            "millis": round(self.millis, 3) if timings and self.millis is not None else None,
        }


@contextmanager
def timed(report: CheckReport):
    start = time.perf_counter()
    try:
        yield report
    finally:
        report.millis = (time.perf_counter() - start) * 1000.0


class RunReport:
    """Ordered collection of check reports; appends are thread safe."""

    def __init__(self, config: dict):
        self.config = config
        self.checks: list[CheckReport] = []
        self._lock = threading.Lock()

    def add(self, check: CheckReport) -> CheckReport:
        with self._lock:
            self.checks.append(check)
        return check

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self, timings: bool = False) -> dict:
        statuses = [c.status for c in self.checks]
        return {
            "config": self.config,
            "checks": [c.to_dict(timings) for c in self.checks],
            "summary": {
                "status": PASS if self.ok else FAIL,
                "passed": statuses.count(PASS),
                "failed": statuses.count(FAIL),
                "skipped": statuses.count(SKIP),
                "total": len(statuses),
            },
        }
