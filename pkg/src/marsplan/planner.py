"""Reconfiguration planning: move faulty units to their optimal cells safely.

Pipeline, in order:

1. Choose the optimal fault placement on the fixed footprint.
2. Assign each faulty unit a goal cell; faults whose goals are 4-adjacent and
   whose current relative offsets already match the goal offsets share one
   support group.
3. For each group, pick the best feasible support shape anchored at the
   faults' current cells and fly donor units into its vacant cells.
4. Clear every stationary unit off the planned transfer corridors. With the
   relocation rule on, blockers park directly on vacant target cells off the
   corridors (so they never move again); with it off they park in their own
   row, off-target, and must be fetched later.
5. Rigidly transfer each support group so its faults land on their goals.
6. Fill the remaining vacant target cells with conflict-free assignment
   rounds until the configuration equals the target exactly.

Every step is gated: the configuration with the movers detached, the flying
piece itself (when it carries faults), and the configuration after the move
must all keep a system margin at or above the floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .controllability import DEFAULT_PARAMS, PhysicalParams, cached_subassembly_cm, system_cm
from .errors import (
    InfeasibleAssignmentError,
    InfeasibleTargetError,
    NoPathError,
    NoVmcsPlacementError,
    PlanningError,
    SafetyViolationError,
)
from .model import Cell, Configuration, FaultState, Subassembly, cell_key
from .paths import Arena, GridPath, arena_around, astar_subassembly, astar_unit, swept_cells
from .vmcs import (
    TargetConfiguration,
    identify_vmcs,
    optimal_configuration,
    plan_vmcs_completion,
    ranked_support_shapes,
)

_BIG = 10 ** 7


class StepKind(Enum):
    MOVE_UNIT = "move-unit"
    MOVE_SUBASSEMBLY = "move-subassembly"


class Phase(Enum):
    VMCS_BUILD = "vmcs-build"
    PATH_CLEARANCE = "path-clearance"
    VMCS_TRANSFER = "vmcs-transfer"
    FILL_REMAINDER = "fill-remainder"


@dataclass(frozen=True)
class PlanStep:
    kind: StepKind
    phase: Phase
    moved_cells: tuple[Cell, ...]        # pre-move cells, sorted (y, x)
    path: GridPath                       # waypoints of min(moved_cells)
    post_config: Configuration
    post_cm: float
    note: str | None = None


@dataclass
class Plan:
    steps: list[PlanStep]
    target: TargetConfiguration
    relocation_rule: bool
    c1: float
    c2: float
    epsilon: float
    params: PhysicalParams

    @property
    def step_count(self) -> int:
        return len(self.steps)

    @property
    def detach_attach_count(self) -> int:
        # one relocation = one detach plus one attach
        return 2 * len(self.steps)

    @property
    def total_path_length(self) -> int:
        return sum(s.path.length for s in self.steps)

    @property
    def min_cm(self) -> float:
        if not self.steps:
            return self.target.cm
        return min(s.post_cm for s in self.steps)


@dataclass
class _Group:
    """Faults that ride one rigid support together."""

    faults: dict[Cell, FaultState]       # current cells
    goals: dict[Cell, Cell]              # current -> goal
    delta: tuple[int, int]
    shape: frozenset[Cell] = field(default_factory=frozenset)
    cm: float = math.nan

    @property
    def sort_cell(self) -> Cell:
        return min(self.goals.values(), key=cell_key)

    @property
    def landing(self) -> frozenset[Cell]:
        return frozenset(c + self.delta for c in self.shape)


def lexicographic_min_assignment(cost: np.ndarray) -> list[int]:
    """Exact min-cost row->column assignment, lexicographically refined.

    Rows must not exceed columns. Among all assignments of minimum total cost
    the row-major smallest column choice wins, so equal-cost solutions are
    deterministic. Entries >= _BIG are treated as forbidden but may still be
    chosen if no finite-cost perfect assignment exists; callers filter them.
    """
    cost = np.asarray(cost, dtype=float)
    nr, nc = cost.shape
    if nr == 0:
        return []
    if nr > nc:
        raise InfeasibleAssignmentError(f"{nr} targets but only {nc} candidates")
    rows, cols = linear_sum_assignment(cost)
    best_total = float(cost[rows, cols].sum())
    chosen: list[int] = []
    taken: set[int] = set()
    fixed_cost = 0.0
    for r in range(nr):
        found = False
        for c in range(nc):
            if c in taken:
                continue
            rest_rows = list(range(r + 1, nr))
            rest_cols = [j for j in range(nc) if j not in taken and j != c]
            if rest_rows:
                sub = cost[np.ix_(rest_rows, rest_cols)]
                rr, cc = linear_sum_assignment(sub)
                rest = float(sub[rr, cc].sum())
            else:
                rest = 0.0
            if abs(fixed_cost + cost[r, c] + rest - best_total) <= 1e-6:
                chosen.append(c)
                taken.add(c)
                fixed_cost += float(cost[r, c])
                found = True
                break
        if not found:  # pragma: no cover - scipy already proved feasibility
            raise InfeasibleAssignmentError("assignment refinement lost feasibility")
    return chosen


def conflict_free_targets(config: Configuration, target_cells: Iterable[Cell],
                          arena: Arena) -> list[Cell]:
    """Vacant target cells safe to fill this round.

    A virtual unit enters from outside the assembly (the smallest vacant cell
    on the arena ring); any still-pending target sitting on the entry path of
    another target is deferred so filling it cannot wall off the rest.
    Unreachable targets are deferred too. The first surviving target can never
    be discarded, so the result is nonempty whenever any target is reachable.
    """
    occupied = config.cell_set
    pending = sorted((t for t in target_cells if t not in occupied), key=cell_key)
    if not pending:
        return []
    target_set = set(target_cells)
    entry = None
    for cell in arena.cells_on_ring():
        if cell not in occupied and cell not in target_set:
            entry = cell
            break
    if entry is None:
        raise NoPathError("no free entry cell on the arena ring")
    alive = dict.fromkeys(pending, True)
    reachable: dict[Cell, GridPath] = {}
    for t in pending:
        if not alive[t]:
            continue
        try:
            path = astar_unit(entry, t, occupied, arena)
        except NoPathError:
            alive[t] = False
            continue
        reachable[t] = path
        on_path = set(path.waypoints)
        for other in pending:
            if other != t and alive[other] and other in on_path:
                alive[other] = False
    return [t for t in pending if alive[t] and t in reachable]


def _reference(cells: Iterable[Cell]) -> Cell:
    return min(cells, key=cell_key)


def plan(config: Configuration, params: PhysicalParams = DEFAULT_PARAMS, *,
         c1: float = 2.0, c2: float = -0.1, relocation_rule: bool = True,
         epsilon: float = 0.0) -> Plan:
    """Compute a safe reconfiguration to the optimal fault placement.

    Raises InfeasibleTargetError when no placement reaches the margin floor,
    and PlanningError subtypes (typed by `reason`) when any phase cannot
    complete. A fault-free configuration yields an empty plan.
    """
    if config.n == 0:
        raise ValueError("cannot plan for an empty configuration")
    target = optimal_configuration(config, params)
    if config.n_faulty and target.cm < epsilon:
        raise InfeasibleTargetError(
            f"best fault placement has margin {target.cm:.6f}, below floor {epsilon:.6f}"
        )
    pipeline = _Pipeline(config, target, params, c1, c2, relocation_rule, epsilon)
    steps = pipeline.run()
    return Plan(steps=steps, target=target, relocation_rule=relocation_rule,
                c1=c1, c2=c2, epsilon=epsilon, params=params)


class _Pipeline:
    def __init__(self, config: Configuration, target: TargetConfiguration,
                 params: PhysicalParams, c1: float, c2: float,
                 relocation_rule: bool, epsilon: float):
        self.work = config
        self.target = target
        self.params = params
        self.c1 = c1
        self.c2 = c2
        self.relocation_rule = relocation_rule
        self.epsilon = epsilon
        self.arena = arena_around(config.cells)
        self.steps: list[PlanStep] = []
        self.groups: list[_Group] = []
        self.corridor: frozenset[Cell] = frozenset()

    # -- driver ----------------------------------------------------------

    def run(self) -> list[PlanStep]:
        if self.work == self.target.config:
            return []
        self._form_groups()
        self._select_supports()
        self._build_supports()
        trajectories = self._plan_trajectories()
        self._clear_corridors(trajectories)
        self._transfer_groups()
        self._fill_remainder()
        if self.work != self.target.config:
            raise PlanningError("pipeline finished away from the target configuration")
        return self.steps

    # -- step emission with the safety gate --------------------------------

    def _post_state(self, moved: tuple[Cell, ...], delta: tuple[int, int]
                    ) -> tuple[Configuration, float] | None:
        """State after the move and its margin, or None below the floor.

        The gate applies to the configuration each relocation leaves behind;
        a flying piece that carries faults must additionally be controllable
        on its own (support shapes are, by construction).
        """
        flying = [(c, self.work.state(c)) for c in moved]
        if any(s.is_faulty for _, s in flying):
            piece = Subassembly(tuple(flying))
            if cached_subassembly_cm(piece, self.params) < self.epsilon:
                return None
        post = self.work.translate_set(moved, delta)
        post_cm = system_cm(post, self.params)
        if post_cm < self.epsilon:
            return None
        return post, post_cm

    def _execute(self, moved: Sequence[Cell], path: GridPath, phase: Phase,
                 note: str | None = None) -> None:
        moved = tuple(sorted(moved, key=cell_key))
        ref = moved[0]
        delta = (path.goal.x - ref.x, path.goal.y - ref.y)
        gated = self._post_state(moved, delta)
        if gated is None:
            raise SafetyViolationError(
                f"move of {tuple(c.key() for c in moved)} would leave the system "
                f"below the margin floor", phase=phase.value,
            )
        post, post_cm = gated
        kind = StepKind.MOVE_UNIT if len(moved) == 1 else StepKind.MOVE_SUBASSEMBLY
        self.steps.append(PlanStep(kind=kind, phase=phase, moved_cells=moved,
                                   path=path, post_config=post, post_cm=post_cm,
                                   note=note))
        self.work = post

    # -- phase 2: goals and groups ----------------------------------------

    def _form_groups(self) -> None:
        goals = self._fault_goals()
        moving = {c: g for c, g in goals.items() if c != g}
        # union-find over faults whose goals touch and whose current offsets
        # already equal the goal offsets (they can ride one rigid support)
        parents = {c: c for c in moving}

        def find(c: Cell) -> Cell:
            while parents[c] != c:
                parents[c] = parents[parents[c]]
                c = parents[c]
            return c

        items = sorted(moving.items(), key=lambda it: it[0].key())
        for i, (ca, ga) in enumerate(items):
            for cb, gb in items[i + 1:]:
                if ga.manhattan(gb) == 1 and (cb.x - ca.x, cb.y - ca.y) == (gb.x - ga.x, gb.y - ga.y):
                    parents[find(ca)] = find(cb)
        clusters: dict[Cell, list[Cell]] = {}
        for c in moving:
            clusters.setdefault(find(c), []).append(c)
        for members in clusters.values():
            members.sort(key=cell_key)
            first = members[0]
            delta = (moving[first].x - first.x, moving[first].y - first.y)
            self.groups.append(_Group(
                faults={c: self.work.state(c) for c in members},
                goals={c: moving[c] for c in members},
                delta=delta,
            ))
        self.groups.sort(key=lambda g: g.sort_cell.key())

    def _fault_goals(self) -> dict[Cell, Cell]:
        current = sorted(self.work.faulty_cells, key=cell_key)
        goal_pool = sorted(self.target.config.faulty_cells, key=cell_key)
        goals: dict[Cell, Cell] = {}
        # match within each fault-state class so kinds are preserved
        states = sorted({self.work.state(c) for c in current},
                        key=lambda s: (s.kind.value, s.rotor_index or -1))
        for state in states:
            cur = [c for c in current if self.work.state(c) == state]
            tgt = [c for c in goal_pool if self.target.config.state(c) == state]
            cost = np.array([[a.manhattan(b) for b in tgt] for a in cur], dtype=float)
            for i, col in enumerate(lexicographic_min_assignment(cost)):
                goals[cur[i]] = tgt[col]
        return goals

    # -- phase 3: support selection and completion --------------------------

    def _select_supports(self) -> None:
        all_fault_cells = set(self.work.faulty_cells)
        claimed: set[Cell] = set()
        for group in self.groups:
            own = set(group.faults)
            foreign_faults = all_fault_cells - own
            spec = identify_vmcs(group.faults, self.params,
                                 max_normal_units=self.work.n - self.work.n_faulty,
                                 epsilon=self.epsilon)
            chosen = None
            for shape, cm in ranked_support_shapes(group.faults, spec.k, self.params):
                if cm < self.epsilon:
                    break
                landing = frozenset(c + group.delta for c in shape)
                if any(c not in self.arena for c in shape | landing):
                    continue
                if (shape | landing) & (foreign_faults | claimed):
                    continue
                if any(c in self.work and self.work.state(c).is_faulty and c not in own
                       for c in shape):
                    continue
                chosen = (shape, cm)
                break
            if chosen is None:
                raise NoVmcsPlacementError(
                    "no support shape fits around the faults without conflicts",
                    faults=tuple(sorted(own, key=cell_key)),
                )
            group.shape, group.cm = chosen
            claimed |= group.shape | group.landing

    def _build_supports(self) -> None:
        reserved = frozenset().union(*(g.shape for g in self.groups)) | set(self.work.faulty_cells) \
            if self.groups else frozenset(self.work.faulty_cells)
        for group in self.groups:
            moves, after = plan_vmcs_completion(
                self.work, self.target.cm, group.shape, group.faults, self.params,
                self.c1, self.c2, reserved=frozenset(reserved), arena=self.arena,
                epsilon=self.epsilon,
            )
            for mv in moves:
                self._execute((mv.donor,), mv.path, Phase.VMCS_BUILD)
            if self.work != after:
                raise PlanningError("support completion lost track of the configuration")

    # -- phase 4: corridor clearance ---------------------------------------

    def _plan_trajectories(self) -> dict[int, GridPath]:
        """Nominal transfer corridors, ignoring movable healthy units.

        Only immovable cells are obstacles here: faults staying in place and
        the other groups' anchor and landing footprints. Healthy units swept
        by a corridor become blockers and are evacuated before the transfer
        re-plans against the true occupancy.
        """
        grouped_faults = set().union(*(g.faults for g in self.groups)) if self.groups else set()
        settled = frozenset(set(self.work.faulty_cells) - grouped_faults)
        trajectories: dict[int, GridPath] = {}
        swept: set[Cell] = set()
        for i, group in enumerate(self.groups):
            ref = _reference(group.shape)
            goal_ref = ref + group.delta
            obstacles = set(settled)
            for j, other in enumerate(self.groups):
                if j != i:
                    obstacles |= other.shape | other.landing
            path = astar_subassembly(group.shape, ref, goal_ref,
                                     frozenset(obstacles - group.shape), self.arena)
            trajectories[i] = path
            swept |= swept_cells(group.shape, ref, path)
        self.corridor = frozenset(swept)
        return trajectories

    def _clear_corridors(self, trajectories: dict[int, GridPath]) -> None:
        members = frozenset().union(*(g.shape for g in self.groups)) if self.groups else frozenset()
        blockers = sorted(
            (c for c in self.corridor
             if c in self.work and not self.work.state(c).is_faulty and c not in members),
            key=cell_key,
        )
        for blocker in blockers:
            self._relocate_blocker(blocker)

    def _relocate_blocker(self, blocker: Cell) -> None:
        occupied = self.work.cell_set
        obstacles = frozenset(occupied - {blocker})
        target_cells = self.target.config.cell_set
        note = None
        best: tuple[int, tuple[int, int], GridPath] | None = None
        if self.relocation_rule:
            waiting = sorted(
                (w for w in target_cells
                 if w not in occupied and w not in self.corridor),
                key=cell_key,
            )
            for w in waiting:
                path = self._gated_unit_path(blocker, w, obstacles)
                if path is None:
                    continue
                key = (path.length, w.key())
                if best is None or key < (best[0], best[1]):
                    best = (path.length, w.key(), path)
        else:
            row = [
                w for w in self._arena_cells_in_row(blocker.y)
                if w not in occupied and w not in self.corridor and w != blocker
            ]
            row.sort(key=lambda w: (abs(w.x - blocker.x), w.key()))
            for w in row:
                path = self._gated_unit_path(blocker, w, obstacles)
                if path is not None:
                    best = (path.length, w.key(), path)
                    break
        if best is None:
            # fall back to any free cell off the corridors and off the target
            note = "off-target-parking"
            for w in self._fallback_parking(blocker, obstacles, target_cells):
                best = w
                break
            if best is None:
                raise NoPathError(f"blocker {blocker} has nowhere to park")
        self._execute((blocker,), best[2], Phase.PATH_CLEARANCE, note=note)

    def _gated_unit_path(self, start: Cell, goal: Cell,
                         obstacles: frozenset[Cell]) -> GridPath | None:
        """Path for a single unit, or None when unreachable or gate-failing."""
        try:
            path = astar_unit(start, goal, obstacles, self.arena)
        except NoPathError:
            return None
        if self._post_state((start,), (goal.x - start.x, goal.y - start.y)) is None:
            return None
        return path

    def _arena_cells_in_row(self, y: int) -> list[Cell]:
        return [Cell(x, y) for x in range(self.arena.min_x, self.arena.max_x + 1)]

    def _fallback_parking(self, blocker: Cell, obstacles: frozenset[Cell],
                          target_cells: frozenset[Cell]):
        candidates = []
        for y in range(self.arena.min_y, self.arena.max_y + 1):
            for x in range(self.arena.min_x, self.arena.max_x + 1):
                w = Cell(x, y)
                if w in obstacles or w == blocker or w in self.corridor or w in target_cells:
                    continue
                candidates.append(w)
        scored = []
        for w in sorted(candidates, key=cell_key):
            path = self._gated_unit_path(blocker, w, obstacles)
            if path is not None:
                scored.append((path.length, w.key(), path))
        scored.sort(key=lambda it: (it[0], it[1]))
        return scored

    # -- phase 5: rigid transfers ------------------------------------------

    def _transfer_groups(self) -> None:
        for group in self.groups:
            current_cells = group.shape
            ref = _reference(current_cells)
            goal_ref = ref + group.delta
            obstacles = frozenset(self.work.cells) - current_cells
            path = astar_subassembly(current_cells, ref, goal_ref, obstacles, self.arena)
            if path.length == 0:
                continue
            self._execute(tuple(current_cells), path, Phase.VMCS_TRANSFER)

    # -- phase 6: fill rounds ----------------------------------------------

    def _fill_remainder(self) -> None:
        target_cells = self.target.config.cell_set
        while True:
            vacant = sorted((t for t in target_cells if t not in self.work), key=cell_key)
            if not vacant:
                break
            round_targets = conflict_free_targets(self.work, target_cells, self.arena)
            if not round_targets:
                raise InfeasibleAssignmentError("no fill target is reachable")
            candidates = sorted(
                (c for c in self.work.cells if c not in target_cells), key=cell_key
            )
            if len(candidates) < len(round_targets):
                round_targets = round_targets[: len(candidates)]
            pairs = self._assign_fill_moves(round_targets, candidates)
            executed = self._execute_fill_round(pairs)
            if executed == 0:
                raise InfeasibleAssignmentError(
                    "fill round could not execute any assigned move"
                )

    def _assign_fill_moves(self, targets: list[Cell], candidates: list[Cell]
                           ) -> list[tuple[Cell, Cell]]:
        cost = np.full((len(targets), len(candidates)), float(_BIG))
        for j, cand in enumerate(candidates):
            obstacles = frozenset(self.work.cell_set - {cand})
            for i, t in enumerate(targets):
                path = self._gated_unit_path(cand, t, obstacles)
                if path is not None:
                    cost[i, j] = path.length
        cols = lexicographic_min_assignment(cost)
        pairs = []
        for i, j in enumerate(cols):
            if cost[i, j] >= _BIG:
                continue  # defer this target to a later round
            pairs.append((targets[i], candidates[j]))
        if not pairs:
            raise InfeasibleAssignmentError("no unit can reach any fill target")
        return pairs

    def _execute_fill_round(self, pairs: list[tuple[Cell, Cell]]) -> int:
        executed = 0
        pending = [t for t, _ in pairs]
        for t, cand in pairs:
            pending.remove(t)
            if cand not in self.work or t in self.work:
                continue
            obstacles = frozenset(self.work.cell_set - {cand})
            # keep this round's still-unfilled targets clear of the path
            path = self._gated_unit_path(cand, t, obstacles | frozenset(pending))
            if path is None:
                path = self._gated_unit_path(cand, t, obstacles)
            if path is None:
                continue  # deferred; a later round retries with a fresh state
            self._execute((cand,), path, Phase.FILL_REMAINDER)
            executed += 1
        return executed


def assign_units(config: Configuration, targets: Sequence[Cell],
                 params: PhysicalParams = DEFAULT_PARAMS, *,
                 arena: Arena | None = None, epsilon: float = 0.0,
                 ) -> list[tuple[Cell, Cell]]:
    """Min-cost matching of surplus units onto vacant target cells.

    Standalone form of the fill-round assignment: candidates are the occupied
    cells outside the target set, cost is the shortest-path length with the
    candidate removed, and the optimum is refined to the lexicographically
    smallest pairing. Returns (target, unit) pairs for every reachable target.
    """
    targets = sorted(targets, key=cell_key)
    if arena is None:
        arena = arena_around(list(config.cells) + list(targets))
    target_set = set(targets)
    candidates = sorted((c for c in config.cells if c not in target_set), key=cell_key)
    cost = np.full((len(targets), len(candidates)), float(_BIG))
    for j, cand in enumerate(candidates):
        obstacles = frozenset(config.cell_set - {cand})
        for i, t in enumerate(targets):
            try:
                path = astar_unit(cand, t, obstacles, arena)
            except NoPathError:
                continue
            moved = config.translate_set((cand,), (t.x - cand.x, t.y - cand.y))
            if system_cm(moved, params) < epsilon:
                continue
            cost[i, j] = path.length
    cols = lexicographic_min_assignment(cost)
    return [(targets[i], candidates[j]) for i, j in enumerate(cols) if cost[i, j] < _BIG]


def validate_plan(start: Configuration, plan: Plan) -> Configuration:
    """Re-simulate a plan, checking collisions and the recorded post states.

    Every waypoint of every step must place the moving cells on free grid
    cells; the end state of each step must equal its recorded post_config.
    Returns the final configuration.
    """
    work = start
    for idx, step in enumerate(plan.steps):
        moved = step.moved_cells
        ref = moved[0]
        stationary = work.cell_set - set(moved)
        for wp in step.path.waypoints:
            delta = (wp.x - ref.x, wp.y - ref.y)
            placed = {c + delta for c in moved}
            if placed & stationary:
                raise SafetyViolationError(
                    f"step {idx} sweeps through occupied cells", step=idx
                )
        goal = step.path.goal
        delta = (goal.x - ref.x, goal.y - ref.y)
        work = work.translate_set(moved, delta)
        if work != step.post_config:
            raise PlanningError(f"step {idx} post configuration mismatch", step=idx)
    return work
