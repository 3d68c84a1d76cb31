"""Grid model for modular aerial robot assemblies.

Units occupy integer grid cells (x to the right, y up) and connect to their
4-neighbors. A Configuration is an immutable snapshot of which cells are
occupied and what health state each unit is in. All deterministic tie-breaking
throughout the package orders cells lexicographically by (y, x).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping


@dataclass(frozen=True, slots=True)
class Cell:
    x: int
    y: int

    def key(self) -> tuple[int, int]:
        """Sort key implementing the package-wide (y, x) total order."""
        return (self.y, self.x)

    def __lt__(self, other: "Cell") -> bool:
        return (self.y, self.x) < (other.y, other.x)

    def __add__(self, delta: tuple[int, int]) -> "Cell":
        return Cell(self.x + delta[0], self.y + delta[1])

    def translated(self, dx: int, dy: int) -> "Cell":
        return Cell(self.x + dx, self.y + dy)

    def manhattan(self, other: "Cell") -> int:
        return abs(self.x - other.x) + abs(self.y - other.y)

    def neighbors4(self) -> tuple["Cell", "Cell", "Cell", "Cell"]:
        x, y = self.x, self.y
        return (Cell(x, y - 1), Cell(x - 1, y), Cell(x + 1, y), Cell(x, y + 1))


def cell_key(cell: Cell) -> tuple[int, int]:
    return (cell.y, cell.x)


class FaultKind(Enum):
    HEALTHY = "healthy"
    ROTOR = "rotor"
    UNIT = "unit"


@dataclass(frozen=True, slots=True)
class FaultState:
    """Health of one unit: fully healthy, one dead rotor, or fully dead.

    A rotor fault names which of the four rotors is lost; a unit fault stops
    all four rotors but the unit keeps its mass and stays attached.
    """

    kind: FaultKind = FaultKind.HEALTHY
    rotor_index: int | None = None

    def __post_init__(self) -> None:
        if self.kind is FaultKind.ROTOR:
            if self.rotor_index not in (0, 1, 2, 3):
                raise ValueError(f"rotor fault needs rotor_index in 0..3, got {self.rotor_index}")
        elif self.rotor_index is not None:
            raise ValueError(f"rotor_index only valid for rotor faults, got {self.rotor_index}")

    @property
    def is_faulty(self) -> bool:
        return self.kind is not FaultKind.HEALTHY

    def live_rotors(self) -> tuple[int, ...]:
        if self.kind is FaultKind.HEALTHY:
            return (0, 1, 2, 3)
        if self.kind is FaultKind.ROTOR:
            return tuple(i for i in range(4) if i != self.rotor_index)
        return ()


HEALTHY = FaultState()
UNIT_FAULT = FaultState(FaultKind.UNIT)


def rotor_fault(index: int) -> FaultState:
    return FaultState(FaultKind.ROTOR, index)


class CellOccupiedError(ValueError):
    pass


class CellNotOccupiedError(ValueError):
    pass


class DestinationCollisionError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Subassembly:
    """One 4-connected component of a configuration, with unit states."""

    units: tuple[tuple[Cell, FaultState], ...]  # sorted by (y, x)

    @property
    def cells(self) -> tuple[Cell, ...]:
        return tuple(c for c, _ in self.units)

    @property
    def faulty_cells(self) -> tuple[Cell, ...]:
        return tuple(c for c, s in self.units if s.is_faulty)

    @property
    def n(self) -> int:
        return len(self.units)

    def state(self, cell: Cell) -> FaultState:
        for c, s in self.units:
            if c == cell:
                return s
        raise CellNotOccupiedError(f"{cell} not in subassembly")

    def canonical(self) -> tuple[tuple[int, int, FaultState], ...]:
        """Translation-normalized signature (used as a cache key downstream)."""
        mx = min(c.x for c, _ in self.units)
        my = min(c.y for c, _ in self.units)
        return tuple((c.x - mx, c.y - my, s) for c, s in self.units)


class Configuration:
    """Immutable assignment of fault states to occupied grid cells.

    Edits (attach/detach/translate_set) return new Configuration values. An
    empty configuration is permitted so that transient states with a whole
    subassembly in flight remain representable; scenario inputs require at
    least one unit.
    """

    __slots__ = ("_units", "_hash")

    def __init__(self, units: Mapping[Cell, FaultState] | Iterable[tuple[Cell, FaultState]]):
        items = list(units.items()) if isinstance(units, Mapping) else list(units)
        if len({c for c, _ in items}) != len(items):
            raise CellOccupiedError("duplicate cell in configuration")
        self._units: dict[Cell, FaultState] = dict(sorted(items, key=lambda it: it[0].key()))
        self._hash: int | None = None

    @classmethod
    def from_cells(cls, cells: Iterable[Cell], faults: Mapping[Cell, FaultState] | None = None) -> "Configuration":
        faults = dict(faults or {})
        units = {}
        for c in cells:
            if c in units:
                raise CellOccupiedError(f"duplicate cell {c}")
            units[c] = faults.pop(c, HEALTHY)
        if faults:
            raise CellNotOccupiedError(f"fault assigned to unoccupied cell {next(iter(faults))}")
        return cls(units)

    # -- queries ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self._units)

    @property
    def cells(self) -> tuple[Cell, ...]:
        return tuple(self._units)

    @property
    def cell_set(self) -> frozenset[Cell]:
        return frozenset(self._units)

    @property
    def faulty_cells(self) -> tuple[Cell, ...]:
        return tuple(c for c, s in self._units.items() if s.is_faulty)

    @property
    def n_faulty(self) -> int:
        return sum(1 for s in self._units.values() if s.is_faulty)

    def state(self, cell: Cell) -> FaultState:
        try:
            return self._units[cell]
        except KeyError:
            raise CellNotOccupiedError(f"{cell} is not occupied") from None

    def __contains__(self, cell: Cell) -> bool:
        return cell in self._units

    def items(self) -> Iterator[tuple[Cell, FaultState]]:
        return iter(self._units.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._units == other._units

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._units.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Configuration({list(self._units.items())!r})"

    def bounding_box(self) -> tuple[int, int, int, int]:
        """(min_x, min_y, max_x, max_y) of the occupied cells."""
        if not self._units:
            raise ValueError("empty configuration has no bounding box")
        xs = [c.x for c in self._units]
        ys = [c.y for c in self._units]
        return (min(xs), min(ys), max(xs), max(ys))

    # -- edits -----------------------------------------------------------

    def attach(self, cell: Cell, state: FaultState = HEALTHY) -> "Configuration":
        if cell in self._units:
            raise CellOccupiedError(f"{cell} already occupied")
        units = dict(self._units)
        units[cell] = state
        return Configuration(units)

    def detach(self, cell: Cell) -> "Configuration":
        if cell not in self._units:
            raise CellNotOccupiedError(f"{cell} is not occupied")
        units = dict(self._units)
        del units[cell]
        return Configuration(units)

    def detach_set(self, cells: Iterable[Cell]) -> "Configuration":
        units = dict(self._units)
        for c in cells:
            if c not in units:
                raise CellNotOccupiedError(f"{c} is not occupied")
            del units[c]
        return Configuration(units)

    def translate_set(self, moving: Iterable[Cell], delta: tuple[int, int]) -> "Configuration":
        """Rigidly shift a subset of units by delta (dx, dy).

        Destinations may reuse cells vacated by the moving subset itself, but
        colliding with any stationary unit is an error.
        """
        moving = set(moving)
        for c in moving:
            if c not in self._units:
                raise CellNotOccupiedError(f"{c} is not occupied")
        stationary = {c: s for c, s in self._units.items() if c not in moving}
        units = dict(stationary)
        for c in moving:
            dest = c + delta
            if dest in stationary:
                raise DestinationCollisionError(f"{c} -> {dest} collides with a stationary unit")
            if dest in units:
                raise DestinationCollisionError(f"duplicate destination {dest}")
            units[dest] = self._units[c]
        return Configuration(units)


def connected_components(cells: Iterable[Cell]) -> list[tuple[Cell, ...]]:
    """4-connected components of a cell set, sorted by their minimal cell."""
    remaining = set(cells)
    comps: list[tuple[Cell, ...]] = []
    for seed in sorted(remaining, key=cell_key):
        if seed not in remaining:
            continue
        comp = {seed}
        remaining.discard(seed)
        queue = deque([seed])
        while queue:
            cur = queue.popleft()
            for nb in cur.neighbors4():
                if nb in remaining:
                    remaining.discard(nb)
                    comp.add(nb)
                    queue.append(nb)
        comps.append(tuple(sorted(comp, key=cell_key)))
    comps.sort(key=lambda comp: comp[0].key())
    return comps


def is_connected(cells: Iterable[Cell]) -> bool:
    cells = set(cells)
    if not cells:
        return True
    return len(connected_components(cells)[0]) == len(cells)


def partition(config: Configuration) -> list[Subassembly]:
    """Split a configuration into its 4-connected subassemblies.

    Deterministic: components are ordered by their minimal (y, x) cell and
    unit lists inside each component are sorted the same way.
    """
    return [
        Subassembly(tuple((c, config.state(c)) for c in comp))
        for comp in connected_components(config.cells)
    ]
