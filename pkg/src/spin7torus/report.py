"""Structured verification reports.

A report is a list of checks, each a residual measured against a tolerance.
Reports serialize to JSON deterministically (sorted keys, no timestamps) so
two runs with the same seed and configuration are byte-identical.
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, TextIO


@dataclass
class Check:
    id: str
    ref: str
    residual: float
    tolerance: float
    detail: Any = None
    status: str = field(init=False)

    def __post_init__(self):
        r = float(self.residual)
        self.residual = r
        self.tolerance = float(self.tolerance)
        self.status = "pass" if math.isfinite(r) and r <= self.tolerance else "fail"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json_obj(self) -> dict:
        out = {"id": self.id, "ref": self.ref, "residual": self.residual,
               "tolerance": self.tolerance, "status": self.status}
        if self.detail is not None:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)
    config_echo: dict = field(default_factory=dict)
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def add(self, id: str, ref: str, residual: float, tolerance: float, detail: Any = None) -> Check:
        c = Check(id, ref, residual, tolerance, detail)
        self.checks.append(c)
        return c

    def add_flag(self, id: str, ref: str, ok: bool, detail: Any = None) -> Check:
        """A yes/no check: residual 0 on success, 1 on failure, tolerance 0."""
        return self.add(id, ref, 0.0 if ok else 1.0, 0.0, detail)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json_obj(self) -> dict:
        out = {
            "suite": self.suite,
            "seed": self.seed,
            "config": self.config_echo,
            "status": "pass" if self.passed else "fail",
            "checks": [c.to_json_obj() for c in self.checks],
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2, default=_default) + "\n"

    def render_table(self, stream: TextIO = sys.stderr) -> None:
        width = max((len(c.id) for c in self.checks), default=10)
        print(f"== {self.suite} (seed={self.seed})", file=stream)
        for c in self.checks:
            print(f"  {c.status.upper():4}  {c.id:<{width}}  residual={c.residual:.3e}  tol={c.tolerance:.1e}",
                  file=stream)


def _default(o):
    import numpy as np

    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return str(o)
