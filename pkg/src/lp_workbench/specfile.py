"""Spec files: TOML documents naming groups, actions, groupoids, algebras and tasks.

Sections are ``[group.NAME]``, ``[action.NAME]``, ``[groupoid.NAME]``,
``[algebra.NAME]`` and ``[task.N]``. Exact scalars are written as integers or
strings (``"3/2"``, ``"1/2-1/3 i"``). Objects are built and validated while
parsing; every error carries the line (and column when known) it came from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib  # type: ignore[no-redef]

from .catalog import (
    action_from_maps,
    cyclic_group,
    direct_product,
    group_from_table,
    named_group,
    permutation_action,
    relabel_action,
    rotation_action,
    swap_action,
    symmetric_group,
    translation_action,
    trivial_action,
)
from .config import Tolerances
from .errors import SpecFileError, WorkbenchError
from .exact import ExactMatrix
from .groupoid import (
    FiniteGroup,
    FiniteGroupoid,
    GroupAction,
    equivalence_groupoid,
    group_groupoid,
    pair_groupoid,
    transformation_groupoid,
    unit_groupoid,
    validate_groupoid,
)
from .groupoid_algebra import faithful_representation
from .lp_norms import (
    PExponent,
    RepresentedAlgebra,
    diagonal_algebra,
    full_matrix_algebra,
    represented_algebra,
    scalar_algebra,
    tensor_algebra,
    upper_triangular_algebra,
)

COMMANDS = (
    "validate", "core", "weyl", "coe", "norms", "crossed", "leavitt", "hermitian", "lamperti",
)

_COMMON_KEYS = {"command", "p", "seed", "tolerances", "description"}
_TASK_KEYS: Dict[str, set] = {
    "validate": {"groupoid", "groupoids", "action", "actions", "samples"},
    "core": {"groupoid", "groupoids", "algebra", "algebras", "expect"},
    "weyl": {"groupoid", "groupoids", "roundtrip_weights", "soundness_samples", "expect_arrows"},
    "coe": {"pairs", "expect"},
    "norms": {"groupoid", "groupoids", "samples"},
    "crossed": {"action", "actions", "group", "algebra", "implementers", "tensor_with", "samples"},
    "leavitt": {"check", "n", "k", "depth", "degree", "samples", "mutate"},
    "hermitian": {"algebra", "algebras", "element", "expect", "samples"},
    "lamperti": {"n", "samples"},
}
# singular key -> (plural key, object table)
_REFERENCES = {
    "groupoid": ("groupoids", "groupoid"),
    "algebra": ("algebras", "algebra"),
    "action": ("actions", "action"),
}
LEAVITT_CHECKS = ("covariant", "absorption", "model", "confluence")


@dataclass(frozen=True)
class TaskSpec:
    key: str
    command: str
    params: Mapping[str, object]
    p_values: Tuple[PExponent, ...] = ()
    seed: Optional[int] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    line: Optional[int] = None


@dataclass
class SpecFile:
    path: str
    groups: Dict[str, FiniteGroup] = field(default_factory=dict)
    actions: Dict[str, GroupAction] = field(default_factory=dict)
    groupoids: Dict[str, FiniteGroupoid] = field(default_factory=dict)
    algebras: Dict[str, RepresentedAlgebra] = field(default_factory=dict)
    tasks: List[TaskSpec] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Locations
# ---------------------------------------------------------------------------
_TOML_POSITION = re.compile(r"at line (\d+), column (\d+)")


class _Locator:
    """Find the line of a section header or of a key inside a section."""

    def __init__(self, text: str) -> None:
        self.lines = text.splitlines()

    def header(self, table: str, name: str) -> Optional[int]:
        pattern = re.compile(rf'^\s*\[\s*{re.escape(table)}\s*\.\s*"?{re.escape(name)}"?\s*\]')
        for k, line in enumerate(self.lines, start=1):
            if pattern.match(line):
                return k
        return None

    def table_line(self, table: str) -> Optional[int]:
        pattern = re.compile(rf"^\s*\[\s*{re.escape(table)}\s*[.\]]")
        for k, line in enumerate(self.lines, start=1):
            if pattern.match(line):
                return k
        return None

    def key(self, table: str, name: str, key: str) -> Tuple[Optional[int], Optional[int]]:
        start = self.header(table, name)
        if start is None:
            return None, None
        pattern = re.compile(rf"^(\s*){re.escape(key)}\s*=")
        for k in range(start, len(self.lines)):
            line = self.lines[k]
            if line.lstrip().startswith("["):
                break
            m = pattern.match(line)
            if m:
                return k + 1, len(m.group(1)) + 1
        return start, None


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------


class _Builder:
    def __init__(self, data: Mapping, locator: _Locator) -> None:
        self.data = data
        self.loc = locator
        self.built: Dict[str, Dict[str, object]] = {
            t: {} for t in ("group", "action", "groupoid", "algebra")
        }
        self._building: set = set()
        self._makers: Dict[str, Callable[[str, Mapping], object]] = {
            "group": self._make_group,
            "action": self._make_action,
            "groupoid": self._make_groupoid,
            "algebra": self._make_algebra,
        }

    # -- errors ---------------------------------------------------------------
    def error(
        self, table: str, name: str, message: str, key: Optional[str] = None
    ) -> SpecFileError:
        if key is None:
            return SpecFileError(f"[{table}.{name}] {message}", self.loc.header(table, name))
        line, column = self.loc.key(table, name, key)
        return SpecFileError(f"[{table}.{name}] {key}: {message}", line, column)

    def field(self, table: str, name: str, body: Mapping, key: str, kind=None, default=...):
        if key not in body:
            if default is not ...:
                return default
            raise self.error(table, name, f"missing required key '{key}'")
        value = body[key]
        if kind is not None and not isinstance(value, kind):
            names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
            raise self.error(table, name, f"expected {names}, got {type(value).__name__}", key)
        if kind is int and isinstance(value, bool):
            raise self.error(table, name, "expected int, got bool", key)
        return value

    # -- references -----------------------------------------------------------
    def get(self, table: str, ref: str, origin: Tuple[str, str, str]) -> object:
        if ref in self.built[table]:
            return self.built[table][ref]
        section = self.data.get(table, {})
        if ref not in section:
            if table == "group":
                try:
                    group = named_group(ref)
                except WorkbenchError:
                    pass
                else:
                    self.built["group"][ref] = group
                    return group
            raise self.error(origin[0], origin[1], f"undefined {table} '{ref}'", origin[2] or None)
        if (table, ref) in self._building:
            raise self.error(table, ref, "definition refers to itself")
        body = section[ref]
        if not isinstance(body, Mapping):
            raise self.error(table, ref, "section must be a table")
        self._building.add((table, ref))
        try:
            obj = self._makers[table](ref, body)
        except SpecFileError:
            raise
        except WorkbenchError as exc:
            raise self.error(table, ref, str(exc))
        finally:
            self._building.discard((table, ref))
        if table == "action":
            obj = replace(obj, name=ref)
        self.built[table][ref] = obj
        return obj

    def build_all(self) -> None:
        for table in ("group", "action", "groupoid", "algebra"):
            section = self.data.get(table, {})
            if not isinstance(section, Mapping):
                raise SpecFileError(f"'{table}' must be a table of named sections")
            for name in section:
                self.get(table, name, (table, name, ""))

    # -- groups ---------------------------------------------------------------
    def _make_group(self, name: str, body: Mapping) -> FiniteGroup:
        kind = self.field("group", name, body, "kind", str, default="named")
        if kind == "named":
            return named_group(self.field("group", name, body, "spec", str, default=name))
        if kind == "cyclic":
            return cyclic_group(self.field("group", name, body, "order", int))
        if kind == "symmetric":
            return symmetric_group(self.field("group", name, body, "degree", int))
        if kind == "product":
            factors = self.field("group", name, body, "factors", list)
            out = self.get("group", factors[0], ("group", name, "factors"))
            for ref in factors[1:]:
                out = direct_product(out, self.get("group", ref, ("group", name, "factors")))
            return out
        if kind == "table":
            elements = self.field("group", name, body, "elements", list)
            rows = self.field("group", name, body, "table", list)
            return group_from_table(elements, rows, name=name)
        raise self.error("group", name, f"unknown kind '{kind}'", "kind")

    # -- actions --------------------------------------------------------------
    def _points(self, table: str, name: str, body: Mapping, key: str = "points") -> List[Hashable]:
        value = self.field(table, name, body, key, (int, list))
        if isinstance(value, int):
            return list(range(value))
        return [tuple(x) if isinstance(x, list) else x for x in value]

    def _make_action(self, name: str, body: Mapping) -> GroupAction:
        kind = self.field("action", name, body, "kind", str)
        origin = ("action", name, "group")
        if kind == "translation":
            ref = self.field("action", name, body, "group", str)
            return translation_action(self.get("group", ref, origin))
        if kind == "trivial":
            group = self.get("group", self.field("action", name, body, "group", str), origin)
            return trivial_action(group, self._points("action", name, body))
        if kind == "rotation":
            n = self.field("action", name, body, "n", int)
            return rotation_action(n, self.field("action", name, body, "copies", int, default=1))
        if kind == "swap":
            return swap_action()
        if kind == "natural":
            return permutation_action(self.field("action", name, body, "n", int))
        if kind == "maps":
            group = self.get("group", self.field("action", name, body, "group", str), origin)
            points = self._points("action", name, body)
            images = self.field("action", name, body, "images", list)
            if len(images) != group.order or any(len(row) != len(points) for row in images):
                raise self.error(
                    "action", name, f"need {group.order} rows of {len(points)} images", "images"
                )
            maps = {
                g: {x: (tuple(y) if isinstance(y, list) else y) for x, y in zip(points, row)}
                for g, row in zip(group.elements, images)
            }
            return action_from_maps(group, points, maps, name)
        if kind == "relabel":
            ref = self.field("action", name, body, "action", str)
            base = self.get("action", ref, ("action", name, "action"))
            labels = self.field("action", name, body, "labels", list)
            if len(labels) != len(base.space):
                raise self.error("action", name, f"need {len(base.space)} labels", "labels")
            return relabel_action(base, dict(zip(base.space, labels)))
        raise self.error("action", name, f"unknown kind '{kind}'", "kind")

    # -- groupoids ------------------------------------------------------------
    def _make_groupoid(self, name: str, body: Mapping) -> FiniteGroupoid:
        kind = self.field("groupoid", name, body, "kind", str)
        if kind == "unit":
            return unit_groupoid(self._points("groupoid", name, body), name=name)
        if kind == "pair":
            return pair_groupoid(self._points("groupoid", name, body), name=name)
        if kind == "equivalence":
            classes = self.field("groupoid", name, body, "classes", list)
            return equivalence_groupoid(self._points("groupoid", name, body), classes, name=name)
        if kind == "group":
            ref = self.field("groupoid", name, body, "group", str)
            return group_groupoid(self.get("group", ref, ("groupoid", name, "group")), name=name)
        if kind == "transformation":
            ref = self.field("groupoid", name, body, "action", str)
            action = self.get("action", ref, ("groupoid", name, "action"))
            return transformation_groupoid(action, name=name)
        if kind == "explicit":
            arrows = self.field("groupoid", name, body, "arrows", list)
            triples = self.field("groupoid", name, body, "compose", list)
            pairs = self.field("groupoid", name, body, "inverse", list)
            if any(len(t) != 3 for t in triples):
                raise self.error("groupoid", name, "entries must be [g, h, gh]", "compose")
            if any(len(t) != 2 for t in pairs):
                raise self.error("groupoid", name, "entries must be [g, g^-1]", "inverse")
            compose = {(g, h): gh for g, h, gh in triples}
            inverse = {g: gi for g, gi in pairs}
            return validate_groupoid(arrows, compose, inverse, name=name)
        raise self.error("groupoid", name, f"unknown kind '{kind}'", "kind")

    # -- algebras -------------------------------------------------------------
    def matrix(self, table: str, name: str, rows: object, key: str) -> ExactMatrix:
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise self.error(table, name, "a matrix is a nonempty list of rows", key)
        try:
            return ExactMatrix.from_rows(rows)
        except WorkbenchError as exc:
            raise self.error(table, name, str(exc), key)

    def _make_algebra(self, name: str, body: Mapping) -> RepresentedAlgebra:
        kind = self.field("algebra", name, body, "kind", str)
        makers = {
            "matrix": full_matrix_algebra,
            "diagonal": diagonal_algebra,
            "upper": upper_triangular_algebra,
            "scalar": scalar_algebra,
        }
        if kind in makers:
            alg = makers[kind](self.field("algebra", name, body, "n", int))
            return RepresentedAlgebra(alg.n, alg.basis, alg.unital, name)
        if kind == "basis":
            raw = self.field("algebra", name, body, "matrices", list)
            mats = [self.matrix("algebra", name, m, "matrices") for m in raw]
            unital = self.field("algebra", name, body, "unital", bool, default=True)
            return represented_algebra(mats, unital=unital, name=name)
        if kind == "groupoid":
            ref = self.field("algebra", name, body, "groupoid", str)
            G = self.get("groupoid", ref, ("algebra", name, "groupoid"))
            alg = faithful_representation(G).algebra
            return RepresentedAlgebra(alg.n, alg.basis, alg.unital, name)
        if kind == "tensor":
            factors = self.field("algebra", name, body, "factors", list)
            if len(factors) < 2:
                raise self.error("algebra", name, "need at least two factors", "factors")
            out = self.get("algebra", factors[0], ("algebra", name, "factors"))
            for ref in factors[1:]:
                out = tensor_algebra(out, self.get("algebra", ref, ("algebra", name, "factors")))
            return RepresentedAlgebra(out.n, out.basis, out.unital, name)
        raise self.error("algebra", name, f"unknown kind '{kind}'", "kind")

    # -- tasks ----------------------------------------------------------------
    def task(self, key: str, body: Mapping, base: Tolerances) -> TaskSpec:
        if not isinstance(body, Mapping):
            raise self.error("task", key, "section must be a table")
        command = self.field("task", key, body, "command", str)
        if command not in COMMANDS:
            known = ", ".join(COMMANDS)
            message = f"unknown command '{command}' (known: {known})"
            raise self.error("task", key, message, "command")
        allowed = _COMMON_KEYS | _TASK_KEYS[command]
        for k in body:
            if k not in allowed:
                raise self.error("task", key, f"key not understood by '{command}'", k)

        raw_p = body.get("p", [])
        raw_p = raw_p if isinstance(raw_p, list) else [raw_p]
        try:
            p_values = tuple(PExponent.parse(p) for p in raw_p)
        except WorkbenchError as exc:
            raise self.error("task", key, str(exc), "p")

        seed = self.field("task", key, body, "seed", int, default=None)
        if seed is not None and seed < 0:
            raise self.error("task", key, "seed must be nonnegative", "seed")
        overrides = self.field("task", key, body, "tolerances", dict, default={})
        try:
            tolerances = base.with_overrides((k, str(v)) for k, v in overrides.items())
        except WorkbenchError as exc:
            raise self.error("task", key, str(exc), "tolerances")

        params: Dict[str, object] = {
            k: v for k, v in body.items() if k not in _COMMON_KEYS and k not in _REFERENCES
        }
        for single, (many, table) in _REFERENCES.items():
            if single in body and many in body:
                raise self.error("task", key, f"give either '{single}' or '{many}'", single)
            if single in body and command == "crossed" and single == "algebra":
                params[single] = self.get("algebra", body[single], ("task", key, single))
                continue
            where = single if single in body else many
            refs = [body[single]] if single in body else body.get(many)
            if refs is None:
                continue
            if not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
                raise self.error("task", key, "expected object names", where)
            params[many] = [self.get(table, r, ("task", key, where)) for r in refs]
        if "group" in body:
            ref = self.field("task", key, body, "group", str)
            params["group"] = self.get("group", ref, ("task", key, "group"))
        if "tensor_with" in body:
            ref = self.field("task", key, body, "tensor_with", str)
            params["tensor_with"] = self.get("action", ref, ("task", key, "tensor_with"))
        if "pairs" in body:
            pairs = self.field("task", key, body, "pairs", list)
            resolved = []
            for pair in pairs:
                if not isinstance(pair, list) or len(pair) != 2:
                    raise self.error("task", key, "each pair is [action, action]", "pairs")
                resolved.append(tuple(self.get("action", r, ("task", key, "pairs")) for r in pair))
            params["pairs"] = resolved
        if "element" in body:
            params["element"] = self.matrix("task", key, body["element"], "element")
        if isinstance(body.get("implementers"), list):
            params["implementers"] = [
                self.matrix("task", key, m, "implementers") for m in body["implementers"]
            ]
        self._check_task(key, command, params)
        line = self.loc.header("task", key)
        return TaskSpec(key, command, params, p_values, seed, tolerances, line)

    def _check_task(self, key: str, command: str, params: Mapping) -> None:
        need = {
            "validate": ("groupoids", "actions"),
            "core": ("groupoids", "algebras"),
            "weyl": ("groupoids",),
            "coe": ("pairs",),
            "norms": ("groupoids",),
            "hermitian": ("algebras",),
        }.get(command)
        if need and not any(params.get(k) for k in need):
            raise self.error("task", key, f"'{command}' needs one of: {', '.join(need)}")
        has_algebra_action = "group" in params and "algebra" in params
        if command == "crossed" and not (params.get("actions") or has_algebra_action):
            raise self.error("task", key, "'crossed' needs 'actions' or 'group' with 'algebra'")
        if command == "leavitt":
            check = params.get("check")
            if check not in LEAVITT_CHECKS:
                known = ", ".join(LEAVITT_CHECKS)
                raise self.error("task", key, f"check must be one of {known}", "check")
        for k in ("samples", "roundtrip_weights", "soundness_samples", "n", "k", "depth", "degree"):
            value = params.get(k, 0)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise self.error("task", key, "expected a nonnegative integer", k)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def parse_spec_text(
    text: str, path: str = "<string>", tolerances: Optional[Tolerances] = None
) -> SpecFile:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _TOML_POSITION.search(str(exc))
        line, column = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise SpecFileError(f"syntax error: {exc}", line, column) from exc
    for table in data:
        if table not in ("group", "action", "groupoid", "algebra", "task"):
            raise SpecFileError(f"unknown section '[{table}]'", _Locator(text).table_line(table))
    builder = _Builder(data, _Locator(text))
    builder.build_all()
    base = tolerances or Tolerances()
    tasks_section = data.get("task", {})
    if not isinstance(tasks_section, Mapping):
        raise SpecFileError("'task' must be a table of numbered sections")
    tasks = [builder.task(str(k), body, base) for k, body in tasks_section.items()]
    return SpecFile(
        path,
        groups=dict(builder.built["group"]),
        actions=dict(builder.built["action"]),
        groupoids=dict(builder.built["groupoid"]),
        algebras=dict(builder.built["algebra"]),
        tasks=tasks,
    )


def parse_spec(path: Union[str, Path], tolerances: Optional[Tolerances] = None) -> SpecFile:
    """Read and validate a spec file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecFileError(f"cannot read spec file {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise SpecFileError(f"spec file {path} is not UTF-8: {exc}") from exc
    return parse_spec_text(text, str(path), tolerances)


def matrices_by_element(
    group: FiniteGroup, mats: Sequence[ExactMatrix]
) -> Dict[Hashable, ExactMatrix]:
    """Pair implementer matrices with group elements in table order."""
    if len(mats) != group.order:
        raise SpecFileError(f"need {group.order} implementers for {group.name}, got {len(mats)}")
    return dict(zip(group.elements, mats))
