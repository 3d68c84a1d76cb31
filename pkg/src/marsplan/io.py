"""Scenario and plan files (JSON), plus the CSV step trace.

Scenario schema::

    {
      "name":  optional string (informational),
      "notes": optional string (informational),
      "cells": [[x, y], ...],                     # required, non-empty
      "faults": [{"cell": [x, y], "kind": "unit"},
                 {"cell": [x, y], "kind": "rotor", "rotor_index": 0..3}],
      "params":  {optional physical-parameter overrides},
      "weights": {"c1": f, "c2": f, "epsilon": f},   # any subset
      "flags":   {"relocation_rule": bool}
    }

Unknown keys are rejected by name at every level. Plan files serialize every
controllability margin with six decimal digits and carry each step's full
post-move configuration so a plan can be re-simulated and checked bit-exactly.
"""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .controllability import DEFAULT_PARAMS, PhysicalParams
from .errors import PlanningError, ScenarioError
from .model import (
    UNIT_FAULT,
    Cell,
    Configuration,
    FaultKind,
    FaultState,
    cell_key,
    rotor_fault,
)
from .planner import Plan, PlanStep

_SCENARIO_KEYS = {"name", "notes", "cells", "faults", "params", "weights", "flags"}
_FAULT_KEYS = {"cell", "kind", "rotor_index"}
_WEIGHT_KEYS = {"c1", "c2", "epsilon"}
_FLAG_KEYS = {"relocation_rule"}
_PARAM_KEYS = {f.name for f in dataclasses.fields(PhysicalParams)}


@dataclass
class Scenario:
    """Parsed scenario: configuration plus optional planner settings."""

    config: Configuration
    params: PhysicalParams
    name: str | None = None
    c1: float | None = None
    c2: float | None = None
    epsilon: float | None = None
    relocation_rule: bool | None = None


def _reject_unknown(data: dict, allowed: set[str], where: str) -> None:
    for key in data:
        if key not in allowed:
            raise ScenarioError(f"unknown key {key!r} in {where}")


def _parse_cell(raw: Any, where: str) -> Cell:
    if (not isinstance(raw, (list, tuple)) or len(raw) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw)):
        raise ScenarioError(f"{where} must be a two-integer [x, y] pair, got {raw!r}")
    return Cell(int(raw[0]), int(raw[1]))


def _parse_fault(raw: Any, index: int) -> tuple[Cell, FaultState]:
    where = f"faults[{index}]"
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where} must be an object")
    _reject_unknown(raw, _FAULT_KEYS, where)
    if "cell" not in raw:
        raise ScenarioError(f"missing key 'cell' in {where}")
    cell = _parse_cell(raw["cell"], f"{where}.cell")
    kind = raw.get("kind")
    if kind == "unit":
        if "rotor_index" in raw:
            raise ScenarioError(f"key 'rotor_index' is not valid for a unit fault in {where}")
        return cell, UNIT_FAULT
    if kind == "rotor":
        idx = raw.get("rotor_index")
        if not isinstance(idx, int) or isinstance(idx, bool) or idx not in (0, 1, 2, 3):
            raise ScenarioError(f"{where}.rotor_index must be an integer in 0..3")
        return cell, rotor_fault(idx)
    raise ScenarioError(f"{where}.kind must be 'unit' or 'rotor', got {kind!r}")


def _parse_params(raw: Any, base: PhysicalParams) -> PhysicalParams:
    if not isinstance(raw, dict):
        raise ScenarioError("'params' must be an object")
    _reject_unknown(raw, _PARAM_KEYS, "params")
    overrides: dict[str, Any] = {}
    for key, value in raw.items():
        if key == "spin":
            if (not isinstance(value, (list, tuple)) or len(value) != 4
                    or not all(v in (1, -1) for v in value)):
                raise ScenarioError("params.spin must be four entries of +1/-1")
            overrides[key] = tuple(int(v) for v in value)
        else:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ScenarioError(f"params.{key} must be a number")
            overrides[key] = float(value)
    try:
        return dataclasses.replace(base, **overrides)
    except ValueError as exc:
        raise ScenarioError(f"invalid params: {exc}") from None


def parse_scenario(data: Any, base_params: PhysicalParams = DEFAULT_PARAMS) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    _reject_unknown(data, _SCENARIO_KEYS, "scenario")
    if "cells" not in data:
        raise ScenarioError("missing key 'cells' in scenario")
    raw_cells = data["cells"]
    if not isinstance(raw_cells, list) or not raw_cells:
        raise ScenarioError("'cells' must be a non-empty list of [x, y] pairs")
    cells = [_parse_cell(rc, f"cells[{i}]") for i, rc in enumerate(raw_cells)]
    if len(set(cells)) != len(cells):
        dup = next(c for c in cells if cells.count(c) > 1)
        raise ScenarioError(f"duplicate cell [{dup.x}, {dup.y}] in 'cells'")
    faults: dict[Cell, FaultState] = {}
    for i, rf in enumerate(data.get("faults", []) or []):
        cell, state = _parse_fault(rf, i)
        if cell in faults:
            raise ScenarioError(f"duplicate fault cell [{cell.x}, {cell.y}] in 'faults'")
        if cell not in set(cells):
            raise ScenarioError(f"fault cell [{cell.x}, {cell.y}] is not in 'cells'")
        faults[cell] = state
    params = _parse_params(data["params"], base_params) if "params" in data else base_params

    weights = data.get("weights", {})
    if not isinstance(weights, dict):
        raise ScenarioError("'weights' must be an object")
    _reject_unknown(weights, _WEIGHT_KEYS, "weights")
    for key, value in weights.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScenarioError(f"weights.{key} must be a number")

    flags = data.get("flags", {})
    if not isinstance(flags, dict):
        raise ScenarioError("'flags' must be an object")
    _reject_unknown(flags, _FLAG_KEYS, "flags")
    rule = flags.get("relocation_rule")
    if rule is not None and not isinstance(rule, bool):
        raise ScenarioError("flags.relocation_rule must be a boolean")

    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise ScenarioError("'name' must be a string")
    notes = data.get("notes")
    if notes is not None and not isinstance(notes, str):
        raise ScenarioError("'notes' must be a string")

    config = Configuration.from_cells(cells, faults)
    return Scenario(
        config=config, params=params, name=name,
        c1=float(weights["c1"]) if "c1" in weights else None,
        c2=float(weights["c2"]) if "c2" in weights else None,
        epsilon=float(weights["epsilon"]) if "epsilon" in weights else None,
        relocation_rule=rule,
    )


def load_scenario(path: str | Path,
                  base_params: PhysicalParams = DEFAULT_PARAMS) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from None
    return parse_scenario(data, base_params)


# -- serialization --------------------------------------------------------


def _cm_value(x: float) -> float | None:
    """Margins go to JSON with six decimals; +inf (fault-free) becomes null."""
    if math.isinf(x):
        return None
    return round(float(x), 6)


def config_to_json(config: Configuration) -> dict:
    cells = sorted(config.cells, key=cell_key)
    faults = []
    for cell in cells:
        state = config.state(cell)
        if not state.is_faulty:
            continue
        entry: dict[str, Any] = {"cell": [cell.x, cell.y]}
        if state.kind is FaultKind.UNIT:
            entry["kind"] = "unit"
        else:
            entry["kind"] = "rotor"
            entry["rotor_index"] = state.rotor_index
        faults.append(entry)
    return {"cells": [[c.x, c.y] for c in cells], "faults": faults}


def config_from_json(data: Any, where: str = "config") -> Configuration:
    if not isinstance(data, dict):
        raise ScenarioError(f"{where} must be an object")
    _reject_unknown(data, {"cells", "faults"}, where)
    cells = [_parse_cell(rc, f"{where}.cells[{i}]") for i, rc in enumerate(data.get("cells", []))]
    faults = dict(_parse_fault(rf, i) for i, rf in enumerate(data.get("faults", [])))
    return Configuration.from_cells(cells, faults)


def params_to_json(params: PhysicalParams) -> dict:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(PhysicalParams):
        value = getattr(params, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def step_to_json(index: int, step: PlanStep) -> dict:
    out: dict[str, Any] = {
        "index": index,
        "kind": step.kind.value,
        "phase": step.phase.value,
        "moved_cells": [[c.x, c.y] for c in step.moved_cells],
        "path": [[c.x, c.y] for c in step.path.waypoints],
        "post_cm": _cm_value(step.post_cm),
        "post_config": config_to_json(step.post_config),
    }
    if step.note is not None:
        out["note"] = step.note
    return out


def plan_to_document(plan: Plan, start: Configuration,
                     name: str | None = None) -> dict:
    """Canonical JSON document for a plan (stable key order, 6-decimal CMs)."""
    doc: dict[str, Any] = {"format": "marsplan-plan-v1"}
    if name is not None:
        doc["name"] = name
    doc["params"] = params_to_json(plan.params)
    doc["weights"] = {"c1": plan.c1, "c2": plan.c2, "epsilon": plan.epsilon}
    doc["flags"] = {"relocation_rule": plan.relocation_rule}
    doc["start_config"] = config_to_json(start)
    doc["steps"] = [step_to_json(i, s) for i, s in enumerate(plan.steps)]
    doc["summary"] = {
        "step_count": plan.step_count,
        "detach_attach_count": plan.detach_attach_count,
        "total_path_length": plan.total_path_length,
        "min_cm": _cm_value(plan.min_cm),
        "target_cm": _cm_value(plan.target.cm),
        "target_config": config_to_json(plan.target.config),
    }
    return doc


_PAIR = re.compile(r"\[\s+(-?\d+),\s+(-?\d+)\s+\]")


def document_to_bytes(doc: dict) -> bytes:
    text = json.dumps(doc, indent=2)
    # keep [x, y] pairs on one line for diffability; purely cosmetic
    text = _PAIR.sub(r"[\1, \2]", text)
    return (text + "\n").encode()


def save_plan(plan: Plan, start: Configuration, path: str | Path,
              name: str | None = None) -> dict:
    doc = plan_to_document(plan, start, name)
    Path(path).write_bytes(document_to_bytes(doc))
    return doc


def load_plan_document(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot load plan file {path}: {exc}") from None
    if not isinstance(data, dict) or data.get("format") != "marsplan-plan-v1":
        raise ScenarioError(f"{path} is not a marsplan plan file")
    return data


def replay_document(doc: dict) -> Configuration:
    """Re-simulate a plan document; every recorded post state must match.

    Each step's moved cells are swept along the serialized waypoints; any
    collision with a stationary unit, or any mismatch with the recorded
    post-move configuration, raises PlanningError. Returns the final state.
    """
    work = config_from_json(doc["start_config"], "start_config")
    for raw in doc["steps"]:
        idx = raw["index"]
        moved = tuple(sorted((_parse_cell(c, "moved_cells") for c in raw["moved_cells"]),
                             key=cell_key))
        waypoints = [_parse_cell(c, "path") for c in raw["path"]]
        ref = moved[0]
        if waypoints and waypoints[0] != ref:
            raise PlanningError(f"step {idx} path does not start at the reference cell")
        stationary = work.cell_set - set(moved)
        for wp in waypoints:
            delta = (wp.x - ref.x, wp.y - ref.y)
            if {c + delta for c in moved} & stationary:
                raise PlanningError(f"step {idx} sweeps through an occupied cell")
        goal = waypoints[-1] if waypoints else ref
        work = work.translate_set(moved, (goal.x - ref.x, goal.y - ref.y))
        recorded = config_from_json(raw["post_config"], f"steps[{idx}].post_config")
        if work != recorded:
            raise PlanningError(f"step {idx} post configuration mismatch on replay")
    return work


def write_cm_trace(plan: Plan, path: str | Path) -> None:
    lines = ["step_index,phase,moved_count,path_length,post_cm"]
    for i, step in enumerate(plan.steps):
        lines.append(
            f"{i},{step.phase.value},{len(step.moved_cells)},{step.path.length},{step.post_cm:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
