"""Residual reports and their JSON / CSV / text renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import IO, List, Optional

from .errors import ReportIOError
from .identities import CheckResult

CSV_HEADER = ("id", "applicable", "samples", "max_residual", "mean_residual", "tolerance", "pass")
FORMATS = ("json", "csv", "text")


@dataclass
class ResidualReport:
    target: str
    checks: List[CheckResult] = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    harmonic: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)
    runtime: float = 0.0  # seconds; text format only, so JSON stays reproducible

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)

    @property
    def failed(self) -> List[str]:
        return [c.id for c in self.checks if c.applicable and not c.passed]

    def summary(self) -> dict:
        return {"flags": dict(self.flags), "harmonic": dict(self.harmonic),
                "all_pass": self.all_pass, "failed": self.failed}


def _num(x) -> str:
    """JSON/CSV float text: 17 significant digits, null for missing."""
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _json_value(v) -> str:
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    return _num(v)


def check_row(c: CheckResult) -> dict:
    return {
        "id": c.id,
        "description": c.description,
        "statement": c.statement,
        "applicable": c.applicable,
        "samples": c.samples,
        "max_residual": c.max_residual,
        "mean_residual": c.mean_residual,
        "tolerance": c.tolerance,
        "tolerance_class": c.tolerance_class,
        "pass": c.passed,
    }


def to_json(r: ResidualReport) -> str:
    head = [
        ("target", r.target),
        ("settings", r.settings),
        ("summary", r.summary()),
    ]
    lines = ["{"]
    lines += [f"  {json.dumps(k)}: {_json_value(v)}," for k, v in head]
    rows = [f"    {_json_value(check_row(c))}" for c in r.checks]
    if rows:
        lines.append('  "checks": [')
        lines.append(",\n".join(rows))
        lines.append("  ]")
    else:
        lines.append('  "checks": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def from_json(text: str) -> ResidualReport:
    """Inverse of :func:`to_json` (runtime is not serialized and comes back as 0)."""
    d = json.loads(text)
    checks = []
    for row in d["checks"]:
        checks.append(CheckResult(
            row["id"], row["description"], row["statement"], row["applicable"], row["samples"],
            row["max_residual"], row["mean_residual"], row["tolerance"], row["tolerance_class"],
        ))
    s = d["summary"]
    return ResidualReport(d["target"], checks, s["flags"], s["harmonic"], d["settings"])


def to_csv(r: ResidualReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in r.checks:
        w.writerow([c.id, _num(c.applicable), c.samples, _num(c.max_residual), _num(c.mean_residual),
                    _num(c.tolerance), "" if c.passed is None else _num(c.passed)])
    return buf.getvalue()


def to_text(r: ResidualReport) -> str:
    out = [f"target: {r.target}"]
    if r.settings:
        out.append("settings: " + ", ".join(f"{k}={v}" for k, v in r.settings.items()))
    if r.flags:
        out.append("flags: " + ", ".join(f"{k}={v}" for k, v in r.flags.items()))
    if r.harmonic:
        out.append("harmonic: " + ", ".join(f"{k}={v}" for k, v in r.harmonic.items()))
    rows = [("id", "max_residual", "mean_residual", "tolerance", "n", "result")]
    for c in r.checks:
        if not c.applicable:
            rows.append((c.id, "-", "-", f"{c.tolerance:.1e}", "0", "n/a"))
        else:
            rows.append((c.id, f"{c.max_residual:.3e}", f"{c.mean_residual:.3e}", f"{c.tolerance:.1e}",
                         str(c.samples), "pass" if c.passed else "FAIL"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    out.append(f"{'all checks pass' if r.all_pass else 'failed: ' + ', '.join(r.failed)}  ({r.runtime:.2f} s)")
    return "\n".join(out) + "\n"


def render(r: ResidualReport, fmt: str) -> str:
    if fmt == "json":
        return to_json(r)
    if fmt == "csv":
        return to_csv(r)
    if fmt == "text":
        return to_text(r)
    raise ValueError(f"unknown format {fmt!r}; choose one of {', '.join(FORMATS)}")


def emit_report(r: ResidualReport, fmt: str = "json", sink: Optional[IO[str]] = None) -> str:
    """Render ``r`` and write it to ``sink`` (a text stream) if given; returns the text."""
    text = render(r, fmt)
    if sink is not None:
        try:
            sink.write(text)
        except OSError as exc:
            raise ReportIOError(f"cannot write report: {exc}") from exc
    return text
