"""Shared utilities: logging, number rendering, timing."""

from __future__ import annotations

import time
from contextlib import contextmanager
from datetime import datetime
from typing import Iterator, List

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------
_LOG_FILE = None


def set_log_file(fh) -> None:
    """Set the global log file handle."""
    global _LOG_FILE
    _LOG_FILE = fh


def close_log_file() -> None:
    """Close the global log file handle."""
    global _LOG_FILE
    if _LOG_FILE:
        try:
            _LOG_FILE.close()
        except Exception:
            pass
        _LOG_FILE = None


def log(msg: str) -> None:
    """Print a timestamped message to stdout and the log file (if open)."""
    timestamp = datetime.now().strftime("%H:%M:%S")
    line = f"[{timestamp}] {msg}"
    print(line, flush=True)
    if _LOG_FILE:
        _LOG_FILE.write(line + "\n")
        _LOG_FILE.flush()


def banner(title: str) -> None:
    log("=" * 60)
    log(title)
    log("=" * 60)


# ---------------------------------------------------------------------------
# Rendering helpers
# ---------------------------------------------------------------------------
def fmt_float(value: float) -> str:
    """Render a float with 12 significant digits (reports stay diffable)."""
    if value != value:
        return "nan"
    if value in (float("inf"), float("-inf")):
        return "inf" if value > 0 else "-inf"
    return f"{value:.12g}"


def fmt_label(label) -> str:
    """Render an arrow / point label compactly: ``(0, 1)`` -> ``0,1``."""
    if isinstance(label, tuple):
        return "(" + ",".join(fmt_label(x) for x in label) + ")"
    return str(label)


def plural(count: int, word: str) -> str:
    return f"{count} {word}" + ("" if count == 1 else "s")


def chunk_lines(items: List[str], width: int = 96) -> List[str]:
    """Pack short strings into lines no wider than ``width``."""
    lines: List[str] = []
    current = ""
    for item in items:
        candidate = f"{current}, {item}" if current else item
        if len(candidate) > width and current:
            lines.append(current)
            current = item
        else:
            current = candidate
    if current:
        lines.append(current)
    return lines


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------
@contextmanager
def stopwatch() -> Iterator[List[float]]:
    """Yield a one-element list that receives the elapsed seconds on exit."""
    box = [0.0]
    start = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = time.perf_counter() - start
