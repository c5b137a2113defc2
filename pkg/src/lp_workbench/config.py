"""Centralised configuration loaded from environment variables / .env file."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Tuple

from .errors import InvalidInputError

# ---------------------------------------------------------------------------
# Optional dotenv support (graceful if missing)
# ---------------------------------------------------------------------------
try:
    from dotenv import load_dotenv  # type: ignore
except Exception:

    def load_dotenv(*_args, **_kwargs):  # type: ignore[misc]
        return False


# Load .env from the current working directory (if present)
_env_path = Path.cwd() / ".env"
if _env_path.exists():
    load_dotenv(_env_path)

# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------
OUTPUT_DIR: Path = Path(os.environ.get("LP_WORKBENCH_OUT", str(Path.cwd() / "reports")))
LOG_DIR: Path = Path.cwd() / "logs"
CATALOG_SPEC: Path = Path(__file__).parent / "specs" / "catalog.toml"

# ---------------------------------------------------------------------------
# Norm estimation
# ---------------------------------------------------------------------------
DEFAULT_SEED: int = int(os.environ.get("LP_WORKBENCH_SEED", "20240101"))
POWER_ITERATION_TOL: float = float(os.environ.get("LP_WORKBENCH_POWER_TOL", "1e-10"))
POWER_ITERATION_MAX_STEPS: int = 500
POWER_ITERATION_RESTARTS: int = int(os.environ.get("LP_WORKBENCH_RESTARTS", "8"))
MAX_BASIS_STARTS: int = 256  # basis-vector starts are skipped above this dimension
NORM_SLACK: float = 1e-9

# ---------------------------------------------------------------------------
# Hermitian cross-check
# ---------------------------------------------------------------------------
HERMITIAN_TAU: float = 1e-6
HERMITIAN_GRID: Tuple[float, ...] = (
    -math.pi, -2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0, math.pi,
)

# ---------------------------------------------------------------------------
# Guards
# ---------------------------------------------------------------------------
MAX_BISECTIONS: int = int(os.environ.get("LP_WORKBENCH_MAX_BISECTIONS", "20000"))
MAX_SEARCH_NODES: int = int(os.environ.get("LP_WORKBENCH_MAX_SEARCH_NODES", "2000000"))

# ---------------------------------------------------------------------------
# Tuning
# ---------------------------------------------------------------------------
MAX_TASK_WORKERS: int = int(os.environ.get("LP_WORKBENCH_WORKERS", "4"))


@dataclass(frozen=True)
class Tolerances:
    """Numeric knobs passed down from the CLI and spec files."""

    power_tol: float = POWER_ITERATION_TOL
    power_max_steps: int = POWER_ITERATION_MAX_STEPS
    power_restarts: int = POWER_ITERATION_RESTARTS
    hermitian_tau: float = HERMITIAN_TAU
    norm_slack: float = NORM_SLACK
    max_bisections: int = MAX_BISECTIONS
    max_search_nodes: int = MAX_SEARCH_NODES

    def with_overrides(self, pairs: Iterable[Tuple[str, str]]) -> "Tolerances":
        """Return a copy with ``KEY=VAL`` overrides applied; unknown keys are rejected."""
        types = {f.name: f.type for f in fields(self)}
        changes = {}
        for key, raw in pairs:
            name = key.strip().replace("-", "_")
            if name not in types:
                raise InvalidInputError(
                    f"unknown tolerance '{key}' (known: {', '.join(sorted(types))})"
                )
            cast = int if types[name] in (int, "int") else float
            try:
                value = cast(str(raw).strip())
            except ValueError:
                raise InvalidInputError(f"tolerance '{key}' expects {cast.__name__}, got {raw!r}")
            if value <= 0:
                raise InvalidInputError(f"tolerance '{key}' must be positive")
            changes[name] = value
        return replace(self, **changes)


def parse_assignment(text: str) -> Tuple[str, str]:
    """Split a ``KEY=VAL`` string."""
    if "=" not in text:
        raise InvalidInputError(f"expected KEY=VAL, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()
