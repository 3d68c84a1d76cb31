"""Command-line interface.

    marsplan plan --input scenario.json --output plan.json
                  [--cm-trace trace.csv] [--svg-dir dir]
                  [--c1 f] [--c2 f] [--epsilon f]
                  [--no-relocation-rule] [--seed n]
    marsplan cm   --input scenario.json

Exit codes: 0 success, 1 input error, 2 no fault placement reaches the margin
floor, 3 the planner could not complete a phase. Planner weights resolve as
command line over scenario file over built-in defaults. The --seed flag is
accepted and recorded for forward compatibility; planning is deterministic and
ignores it. Setting MARSPLAN_PARAMS to a JSON file of physical-parameter
fields replaces the built-in defaults (scenario overrides still apply on top).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

from .controllability import DEFAULT_PARAMS, PhysicalParams, system_cm, cached_subassembly_cm
from .errors import InfeasibleTargetError, PlanningError, ScenarioError
from .io import Scenario, load_scenario, save_plan, write_cm_trace
from .model import cell_key, partition
from .planner import plan as compute_plan
from .render import render_plan_svgs

_PARAMS_ENV = "MARSPLAN_PARAMS"


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the input-error code."""

    def error(self, message: str):  # noqa: D401 - argparse contract
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="marsplan",
                     description="controllability-safe reconfiguration planning "
                                 "for modular aerial robot assemblies")
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="plan a reconfiguration for a scenario")
    p_plan.add_argument("--input", required=True, help="scenario JSON file")
    p_plan.add_argument("--output", required=True, help="plan JSON file to write")
    p_plan.add_argument("--cm-trace", help="CSV file for the per-step margin trace")
    p_plan.add_argument("--svg-dir", help="directory for per-step SVG renderings")
    p_plan.add_argument("--c1", type=float, help="weight on the margin shortfall term")
    p_plan.add_argument("--c2", type=float, help="weight on the flight-distance term")
    p_plan.add_argument("--epsilon", type=float, help="margin floor for every step")
    p_plan.add_argument("--no-relocation-rule", action="store_true",
                        help="park cleared blockers in their own row instead of "
                             "on vacant target cells")
    p_plan.add_argument("--seed", type=int, default=None,
                        help="reserved; planning is deterministic and ignores it")

    p_cm = sub.add_parser("cm", help="print controllability margins for a scenario")
    p_cm.add_argument("--input", required=True, help="scenario JSON file")
    return parser


def _base_params() -> PhysicalParams:
    override = os.environ.get(_PARAMS_ENV)
    if not override:
        return DEFAULT_PARAMS
    try:
        data = json.loads(Path(override).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot load params file {override} from "
                            f"{_PARAMS_ENV}: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"params file {override} must hold a JSON object")
    fields = {f.name for f in dataclasses.fields(PhysicalParams)}
    for key in data:
        if key not in fields:
            raise ScenarioError(f"unknown key {key!r} in params file {override}")
    if "spin" in data:
        data["spin"] = tuple(data["spin"])
    try:
        return dataclasses.replace(DEFAULT_PARAMS, **data)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid params file {override}: {exc}") from None


def _params_label(scenario: Scenario) -> str:
    if os.environ.get(_PARAMS_ENV):
        base = f"file:{os.environ[_PARAMS_ENV]}"
    else:
        base = "default"
    if scenario.params != (_base_params()):
        return f"{base}+scenario-overrides"
    return base


def _cmd_plan(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.input, _base_params())
    c1 = args.c1 if args.c1 is not None else (scenario.c1 if scenario.c1 is not None else 2.0)
    c2 = args.c2 if args.c2 is not None else (scenario.c2 if scenario.c2 is not None else -0.1)
    epsilon = (args.epsilon if args.epsilon is not None
               else (scenario.epsilon if scenario.epsilon is not None else 0.0))
    if args.no_relocation_rule:
        rule = False
    elif scenario.relocation_rule is not None:
        rule = scenario.relocation_rule
    else:
        rule = True
    result = compute_plan(scenario.config, scenario.params, c1=c1, c2=c2,
                          relocation_rule=rule, epsilon=epsilon)
    save_plan(result, scenario.config, args.output, name=scenario.name)
    if args.cm_trace:
        write_cm_trace(result, args.cm_trace)
    if args.svg_dir:
        render_plan_svgs(result, scenario.config, args.svg_dir)
    summary_cm = "n/a" if math.isinf(result.min_cm) else f"{result.min_cm:.6f}"
    print(f"steps={result.step_count} detach_attach={result.detach_attach_count} "
          f"path_length={result.total_path_length} min_cm={summary_cm}")
    return 0


def _cmd_cm(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.input, _base_params())
    print(f"# params: {_params_label(scenario)}")
    overall = system_cm(scenario.config, scenario.params)
    if math.isinf(overall):
        print("fault-free")
        return 0
    print(f"system {overall:.6f}")
    for sub in partition(scenario.config):
        if not sub.faulty_cells:
            continue
        anchor = min(sub.cells, key=cell_key)
        value = cached_subassembly_cm(sub, scenario.params)
        print(f"subassembly [{anchor.x}, {anchor.y}] n={sub.n} {value:.6f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plan":
            return _cmd_plan(args)
        return _cmd_cm(args)
    except ScenarioError as exc:
        print(f"marsplan: input error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleTargetError as exc:
        print(f"marsplan: infeasible target: {exc}", file=sys.stderr)
        return 2
    except PlanningError as exc:
        print(f"marsplan: planning failed ({exc.reason}): {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
