"""Run reports: per-task results rendered as text and JSON.

The JSON report holds no timings (those go to ``timings.json``), so a fixed
spec and seed give a byte-identical ``report.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

from .utils import fmt_float, log

STATUSES = ("pass", "fail", "inconclusive-interval", "inconclusive-guard")
FORMATS = ("text", "json", "both")


@dataclass
class TaskResult:
    key: str
    command: str
    status: str
    claim: str
    data: Dict[str, object] = field(default_factory=dict)
    error: str = ""
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "task": self.key,
            "command": self.command,
            "status": self.status,
            "claim": self.claim,
            "data": self.data,
        }
        if self.error:
            out["error"] = self.error
        return out


@dataclass
class Report:
    spec: str
    seed: int
    results: List[TaskResult] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(r.status == "fail" for r in self.results)

    def summary(self) -> Dict[str, int]:
        return {s: sum(1 for r in self.results if r.status == s) for s in STATUSES}

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "seed": self.seed,
            "summary": self.summary(),
            "tasks": [r.to_dict() for r in self.results],
        }

    def timings(self) -> Dict[str, str]:
        return {r.key: fmt_float(r.elapsed) for r in self.results}


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _render(value, indent: int) -> List[str]:
    pad = "  " * indent
    lines: List[str] = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_render(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and item:
                sub = _render(item, indent + 1)
                lines.append(f"{pad}- {sub[0].strip()}")
                lines.extend(sub[1:])
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(f"{pad}{_scalar(value)}")
    return lines


def _scalar(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (dict, list)):
        return "{}" if isinstance(value, dict) else "[]"
    return str(value)


def render_text(report: Report) -> str:
    data = report.to_dict()
    summary = ", ".join(f"{k} {v}" for k, v in data["summary"].items())
    lines = [
        "lp-workbench report",
        f"spec: {data['spec']}",
        f"seed: {data['seed']}",
        f"summary: {summary}",
    ]
    for task in data["tasks"]:
        lines.append("=" * 60)
        lines.append(f"[task.{task['task']}] {task['command']}: {task['status'].upper()}")
        lines.append(f"  claim: {task['claim']}")
        if "error" in task:
            lines.append(f"  error: {task['error']}")
        lines.extend(_render(task["data"], 1))
    return "\n".join(lines) + "\n"


def render_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def emit_report(report: Report, out_dir: Union[str, Path], fmt: str = "both") -> List[Path]:
    """Write ``report.txt`` and/or ``report.json`` (plus ``timings.json``) into ``out_dir``."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r} (expected one of {', '.join(FORMATS)})")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    if fmt in ("text", "both"):
        path = out / "report.txt"
        path.write_text(render_text(report), encoding="utf-8")
        written.append(path)
    if fmt in ("json", "both"):
        path = out / "report.json"
        path.write_text(render_json(report), encoding="utf-8")
        written.append(path)
        timings = out / "timings.json"
        timings.write_text(json.dumps(report.timings(), indent=2) + "\n", encoding="utf-8")
        written.append(timings)
    for path in written:
        log(f"  wrote {path}")
    return written


def load_report(path: Union[str, Path]) -> Report:
    """Read a ``report.json`` back (timings are restored when ``timings.json`` sits next to it)."""
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    timings_path = path.with_name("timings.json")
    timings = json.loads(timings_path.read_text(encoding="utf-8")) if timings_path.exists() else {}
    results = [
        TaskResult(
            key=t["task"],
            command=t["command"],
            status=t["status"],
            claim=t["claim"],
            data=t["data"],
            error=t.get("error", ""),
            elapsed=float(timings.get(t["task"], 0.0)),
        )
        for t in data["tasks"]
    ]
    return Report(data["spec"], data["seed"], results)
