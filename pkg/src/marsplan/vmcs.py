"""Search for minimum controllable supports and optimal fault placements.

A faulty unit cannot fly alone, so it travels inside a VMCS: the smallest
rigidly connected group of normal units around the faulty one(s) whose wrench
set still covers hover. Identification grows k (the number of normal units),
keeps the best-margin shape at each size, and stops at the first k whose best
shape clears the safety floor.

The companion search picks where the faulty units should end up: among all
placements of the fault multiset on the fixed footprint, the one maximizing
the system margin (ties broken toward the lexicographically smallest faulty
cell set).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Mapping

from .controllability import (
    DEFAULT_PARAMS,
    PhysicalParams,
    cached_subassembly_cm,
    quick_cm_upper,
    system_cm,
)
from .errors import NoFeasibleDonorError, NoPathError, VmcsSearchError
from .model import (
    HEALTHY,
    Cell,
    Configuration,
    FaultKind,
    FaultState,
    Subassembly,
    cell_key,
    is_connected,
)
from .paths import Arena, GridPath, astar_unit

_TIE_DECIMALS = 9


def _shape_key(cells: Iterable[Cell]) -> tuple[tuple[int, int], ...]:
    return tuple(c.key() for c in sorted(cells, key=cell_key))


def enumerate_connected_shapes(anchor: Iterable[Cell], k: int) -> list[frozenset[Cell]]:
    """All 4-connected cell sets of size |anchor| + k containing the anchor cells.

    Anchor cells keep their given coordinates (no translation quotient), so
    with a single anchor and k = 1 this yields the four dominoes through that
    cell. Growth allows transiently disconnected partial sets, which is what
    makes disconnected anchors (that the added cells must bridge) reachable;
    the final connectivity filter keeps only true subassembly shapes.
    """
    anchor = frozenset(anchor)
    if not anchor:
        raise ValueError("anchor must contain at least one cell")
    if k < 0:
        raise ValueError("k must be non-negative")
    shapes: set[frozenset[Cell]] = {anchor}
    for _ in range(k):
        grown: set[frozenset[Cell]] = set()
        for shape in shapes:
            for cell in shape:
                for nb in cell.neighbors4():
                    if nb not in shape:
                        grown.add(shape | {nb})
        shapes = grown
    result = [s for s in shapes if is_connected(s)]
    result.sort(key=_shape_key)
    return result


@dataclass(frozen=True)
class VmcsSpec:
    """A controllable support shape in canonical local coordinates.

    footprint: all member cells, translated so the bounding-box corner sits at
    the origin; faulty lists the impaired cells (same coordinates) with their
    states; k counts the normal units; cm is the shape's margin.
    """

    footprint: tuple[Cell, ...]
    faulty: tuple[tuple[Cell, FaultState], ...]
    k: int
    cm: float


def _shape_cm(shape: frozenset[Cell], faults: Mapping[Cell, FaultState],
              params: PhysicalParams) -> float:
    units = tuple(
        (c, faults.get(c, HEALTHY)) for c in sorted(shape, key=cell_key)
    )
    return cached_subassembly_cm(Subassembly(units), params)


def ranked_support_shapes(faults: Mapping[Cell, FaultState], k: int,
                          params: PhysicalParams = DEFAULT_PARAMS,
                          ) -> list[tuple[frozenset[Cell], float]]:
    """Shapes with k normal units around the given faults, best margin first.

    Anchored at the fault cells' own coordinates. Ties on margin fall back to
    the canonical cell order, so the ranking is deterministic.
    """
    ranked = []
    for shape in enumerate_connected_shapes(faults.keys(), k):
        cm = _shape_cm(shape, faults, params)
        ranked.append((shape, cm))
    ranked.sort(key=lambda it: (-round(it[1], _TIE_DECIMALS), _shape_key(it[0])))
    return ranked


def _canonical_spec(shape: frozenset[Cell], faults: Mapping[Cell, FaultState],
                    k: int, cm: float) -> VmcsSpec:
    mx = min(c.x for c in shape)
    my = min(c.y for c in shape)
    foot = tuple(sorted((Cell(c.x - mx, c.y - my) for c in shape), key=cell_key))
    flocal = tuple(
        sorted(((Cell(c.x - mx, c.y - my), s) for c, s in faults.items()), key=lambda it: it[0].key())
    )
    return VmcsSpec(footprint=foot, faulty=flocal, k=k, cm=cm)


def identify_vmcs(faults: Mapping[Cell, FaultState], params: PhysicalParams = DEFAULT_PARAMS,
                  max_normal_units: int = 16, epsilon: float = 0.0) -> VmcsSpec:
    """Smallest controllable support around a group of faulty units.

    Starting from k = 0, evaluates every connected shape with k normal units
    plus the faults, and accepts the first k whose best shape has margin at
    least epsilon. Raises when k would exceed the normal units available.
    """
    for cell, state in faults.items():
        if not state.is_faulty:
            raise ValueError(f"{cell} is not faulty")
    k = 0
    while True:
        if k > max_normal_units:
            raise VmcsSearchError(
                f"no controllable support with up to {max_normal_units} normal units",
                faults=tuple(sorted(faults, key=cell_key)),
            )
        ranked = ranked_support_shapes(faults, k, params)
        if ranked:
            shape, cm = ranked[0]
            if cm >= epsilon:
                return _canonical_spec(shape, faults, k, cm)
        k += 1


@dataclass(frozen=True)
class TargetConfiguration:
    """Optimal fault placement on the fixed footprint and its margin."""

    config: Configuration
    cm: float


def _state_key(state: FaultState) -> tuple[str, int]:
    return (state.kind.value, -1 if state.rotor_index is None else state.rotor_index)


def optimal_configuration(config: Configuration, params: PhysicalParams = DEFAULT_PARAMS,
                          ) -> TargetConfiguration:
    """Best relocation of the existing faults over the existing footprint.

    Enumerates every distinct assignment of the fault-state multiset to
    footprint cells and maximizes the system margin. Ties prefer the
    lexicographically smallest faulty cell set (then the smallest
    cell/state pairing), evaluated in enumeration order so the first best
    candidate wins. The footprint itself never changes.
    """
    fault_states = sorted((s for _, s in config.items() if s.is_faulty), key=_state_key)
    if not fault_states:
        return TargetConfiguration(config, float("inf"))
    cells = sorted(config.cells, key=cell_key)
    distinct_orders = sorted(set(permutations(fault_states)),
                             key=lambda p: tuple(_state_key(s) for s in p))
    best: tuple[float, tuple, Configuration] | None = None
    for combo in combinations(cells, len(fault_states)):
        for order in distinct_orders:
            placement = dict(zip(combo, order))
            candidate = Configuration.from_cells(cells, placement)
            if best is not None and _quick_system_upper(candidate, params) <= best[0]:
                continue
            cm = round(system_cm(candidate, params), _TIE_DECIMALS)
            if best is None or cm > best[0]:
                best = (cm, combo, candidate)
    assert best is not None
    cm, _, candidate = best
    return TargetConfiguration(candidate, system_cm(candidate, params))


def _quick_system_upper(config: Configuration, params: PhysicalParams) -> float:
    """Cheap upper bound on system_cm used to prune the placement search."""
    from .model import partition

    worst = float("inf")
    for sub in partition(config):
        if sub.faulty_cells:
            worst = min(worst, round(quick_cm_upper(sub, params), _TIE_DECIMALS))
    return worst


@dataclass(frozen=True)
class CompletionMove:
    """One donor flight filling a vacant support cell."""

    donor: Cell
    vacancy: Cell
    path: GridPath


def plan_vmcs_completion(config: Configuration, target_cm: float,
                         vmcs_cells: frozenset[Cell],
                         vmcs_faults: Mapping[Cell, FaultState],
                         params: PhysicalParams = DEFAULT_PARAMS,
                         c1: float = 2.0, c2: float = -0.1, *,
                         reserved: frozenset[Cell] = frozenset(),
                         arena: Arena, epsilon: float = 0.0,
                         ) -> tuple[list[CompletionMove], Configuration]:
    """Fly donor units into the vacant cells of an anchored support shape.

    For each vacancy (in (y, x) order) every healthy, unreserved unit is
    scored with c1 * (cm_after_detach - target_cm)^2 - c2 * path_length and
    the minimizer is flown in immediately, so later selections see the
    updated configuration. Candidates are rejected when their removal pushes
    any faulty subassembly below the floor, when no flight path exists, or
    when the state after the attach sits below the floor. Returns the moves
    and the configuration after all of them.
    """
    vacancies = sorted((c for c in vmcs_cells if c not in config), key=cell_key)
    moves: list[CompletionMove] = []
    work = config
    for vacancy in vacancies:
        best: tuple[float, tuple[int, int], Cell, GridPath, Configuration] | None = None
        for donor in work.cells:
            if work.state(donor).is_faulty or donor in reserved or donor in vmcs_cells:
                continue
            after = work.detach(donor)
            if _any_faulty_below(after, params, epsilon):
                continue
            obstacles = frozenset(after.cells)
            try:
                path = astar_unit(donor, vacancy, obstacles, arena)
            except NoPathError:
                continue
            landed = after.attach(vacancy, HEALTHY)
            if _any_faulty_below(landed, params, epsilon):
                continue
            delta = system_cm(after, params) - target_cm
            objective = round(c1 * delta * delta - c2 * path.length, _TIE_DECIMALS)
            key = (objective, donor.key())
            if best is None or key < (best[0], best[1]):
                best = (objective, donor.key(), donor, path, landed)
        if best is None:
            raise NoFeasibleDonorError(
                f"no donor can reach vacancy {vacancy} without breaking support",
                vacancy=vacancy,
            )
        _, _, donor, path, work = best
        moves.append(CompletionMove(donor=donor, vacancy=vacancy, path=path))
    return moves, work


def _any_faulty_below(config: Configuration, params: PhysicalParams, floor: float) -> bool:
    return system_cm(config, params) < floor
