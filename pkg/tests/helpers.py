"""Independent oracles and random-instance generators for the test suite.

Everything here deliberately avoids the library's own algorithms: margins are
estimated by random direction sampling against the support function only,
paths by breadth-first search, assignments by permutation enumeration, and
shape counts by brute-force subset growth.
"""

from __future__ import annotations

import math
from collections import deque
from itertools import combinations, permutations

import numpy as np

from marsplan.controllability import (
    PhysicalParams,
    WrenchZonotope,
    build_zonotope,
    gravity_wrench,
)
from marsplan.model import (
    UNIT_FAULT,
    Cell,
    Configuration,
    FaultState,
    Subassembly,
    cell_key,
    is_connected,
    partition,
    rotor_fault,
)
from marsplan.paths import Arena

_ZOOM_SIGMAS = (0.1, 0.02, 4e-3, 8e-4, 1.6e-4)
_POLISH_SIGMAS = (4e-4, 8e-5, 1.6e-5)
_N_STARTS = 10


def sampling_cm(sub: Subassembly, params: PhysicalParams,
                total: int = 100_000, seed: int = 0) -> float:
    """Margin upper bound from `total` random support-function probes.

    min over unit directions d of (support(d) - d.g) equals the signed
    margin for interior and exterior hover wrenches alike, so any finite
    direction sample yields an upper bound. A global mixture batch (uniform,
    axis-whitened, and axis-focused directions, plus a few deterministic
    probes) seeds several distinct local minimizers; each is refined with
    progressively narrower Gaussian zoom batches and the overall winner gets
    a final polish, which keeps one narrow basin from hiding the true
    minimizing direction.
    """
    zono = build_zonotope(sub, params)
    g = gravity_wrench(sub.n, params)
    rng = np.random.default_rng(seed)
    if zono.m:
        scale = np.abs(zono.center) + np.abs(zono.generators).sum(axis=0) + 1e-12
    else:
        scale = np.ones(4)

    def margins(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        return d, zono.support(d) - d @ g

    zoom_budget = _N_STARTS * len(_ZOOM_SIGMAS) * 1_000
    polish_budget = 3 * 6_666
    probes = [np.vstack([np.eye(4), -np.eye(4)])]
    away = g - zono.center
    if np.linalg.norm(away) > 1e-12:
        probes.append(np.vstack([away, -away]))
    if zono.m >= 3:
        # Directions orthogonal to generator triples: for a full-dimensional
        # zonotope every boundary facet is spanned by its parallel generators,
        # so the minimizing direction of an interior margin lies among these.
        idx = np.array(list(combinations(range(zono.m), 3)))
        triples = zono.generators[idx]
        normals = np.linalg.svd(triples)[2][:, -1, :]
        probes.append(np.vstack([normals, -normals]))
    if zono.m:
        # For an exterior hover wrench the tight direction points from the
        # nearest zonotope point toward g; approximate that point by
        # projected gradient descent on ||center + lam @ G - g|| over the
        # coefficient box lam in [-1, 1]^m.
        G = zono.generators
        step = 1.0 / max(float(np.linalg.norm(G @ G.T, 2)), 1e-12)
        lam = np.zeros(zono.m)
        momentum = lam
        t_acc = 1.0
        for _ in range(2_000):
            grad = G @ (zono.center + momentum @ G - g)
            nxt = np.clip(momentum - step * grad, -1.0, 1.0)
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
            momentum = nxt + ((t_acc - 1.0) / t_next) * (nxt - lam)
            lam, t_acc = nxt, t_next
        residual = zono.center + lam @ G - g
        if np.linalg.norm(residual) > 1e-12:
            probes.append(-residual[None, :])
    probe_dirs = np.vstack(probes)
    n_global = total - zoom_budget - polish_budget - len(probe_dirs)
    third = n_global // 3
    parts = [probe_dirs,
             rng.normal(size=(third, 4)),
             rng.normal(size=(third, 4)) / scale]
    axes = rng.integers(0, 4, size=n_global - 2 * third)
    focused = np.zeros((len(axes), 4))
    focused[np.arange(len(axes)), axes] = rng.choice([-1.0, 1.0], size=len(axes))
    parts.append(focused + 0.05 * rng.normal(size=(len(axes), 4)))
    dirs, vals = margins(np.vstack(parts))

    # Pick well-separated starting directions among the best global probes.
    order = np.argsort(vals)
    starts: list[np.ndarray] = []
    for i in order:
        d = dirs[int(i)]
        if all(abs(float(d @ s)) < 0.999 for s in starts):
            starts.append(d)
        if len(starts) == _N_STARTS:
            break

    best = float(vals.min())
    best_dir = dirs[int(vals.argmin())]
    for start in starts:
        cur_val = math.inf
        cur_dir = start
        for sigma in _ZOOM_SIGMAS:
            d, v = margins(cur_dir + sigma * rng.normal(size=(1_000, 4)))
            i = int(v.argmin())
            if v[i] < cur_val:
                cur_val = float(v[i])
                cur_dir = d[i]
        if cur_val < best:
            best = cur_val
            best_dir = cur_dir
    for sigma in _POLISH_SIGMAS:
        d, v = margins(best_dir + sigma * rng.normal(size=(6_666, 4)))
        i = int(v.argmin())
        if v[i] < best:
            best = float(v[i])
            best_dir = d[i]
    return best


def random_connected_cells(rng: np.random.Generator, n: int) -> list[Cell]:
    """Random 4-connected footprint grown cell by cell from the origin."""
    cells = {Cell(0, 0)}
    while len(cells) < n:
        base = sorted(cells, key=cell_key)[rng.integers(len(cells))]
        cells.add(base.neighbors4()[rng.integers(4)])
    return sorted(cells, key=cell_key)


def random_fault_states(rng: np.random.Generator, cells: list[Cell],
                        n_faults: int, unit_only: bool = False,
                        ) -> dict[Cell, FaultState]:
    faults: dict[Cell, FaultState] = {}
    if n_faults == 0:
        return faults
    picks = rng.choice(len(cells), size=n_faults, replace=False)
    for i in picks:
        if unit_only or rng.random() < 0.5:
            faults[cells[int(i)]] = UNIT_FAULT
        else:
            faults[cells[int(i)]] = rotor_fault(int(rng.integers(4)))
    return faults


def random_faulty_subassembly(rng: np.random.Generator, n: int,
                              n_faults: int) -> Subassembly:
    cells = random_connected_cells(rng, n)
    faults = random_fault_states(rng, cells, min(n_faults, n - 1))
    return partition(Configuration.from_cells(cells, faults))[0]


def bfs_unit_length(start: Cell, goal: Cell, obstacles: frozenset[Cell],
                    arena: Arena) -> int | None:
    """Shortest 4-connected path length, or None when unreachable."""
    if goal in obstacles or goal not in arena:
        return None
    if start == goal:
        return 0
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        cell, dist = queue.popleft()
        for nb in cell.neighbors4():
            if nb == goal:
                return dist + 1
            if nb in seen or nb in obstacles or nb not in arena:
                continue
            seen.add(nb)
            queue.append((nb, dist + 1))
    return None


def bfs_footprint_length(footprint: frozenset[Cell], ref: Cell, goal_ref: Cell,
                         obstacles: frozenset[Cell], arena: Arena) -> int | None:
    """Shortest rigid-translation path length over placements, or None."""
    offsets = [(c.x - ref.x, c.y - ref.y) for c in footprint]

    def fits(r: Cell) -> bool:
        return all(r + off in arena and r + off not in obstacles for off in offsets)

    if not fits(ref) or not fits(goal_ref):
        return None
    if ref == goal_ref:
        return 0
    seen = {ref}
    queue = deque([(ref, 0)])
    while queue:
        cell, dist = queue.popleft()
        for nb in cell.neighbors4():
            if nb in seen or not fits(nb):
                continue
            if nb == goal_ref:
                return dist + 1
            seen.add(nb)
            queue.append((nb, dist + 1))
    return None


def brute_force_assignment(cost: np.ndarray) -> tuple[float, list[int]]:
    """Exact minimum assignment by enumerating permutations (rows <= cols).

    Returns (total, columns) where columns is the lexicographically smallest
    optimal choice in row order — the same refinement the library promises.
    """
    nr, nc = cost.shape
    best_total = None
    best_cols = None
    for cols in permutations(range(nc), nr):
        total = sum(cost[i, c] for i, c in enumerate(cols))
        if best_total is None or total < best_total - 1e-12 or (
                abs(total - best_total) <= 1e-12 and list(cols) < best_cols):
            best_total = total
            best_cols = list(cols)
    return float(best_total), best_cols


def enumerate_shapes_brute_force(anchors, k: int) -> set[frozenset[Cell]]:
    """All 4-connected sets of |anchors| + k cells containing every anchor.

    Exhaustive and algorithm-independent: any connected set of n cells has
    graph diameter at most n - 1, so every member lies within Manhattan
    radius n - 1 of any fixed anchor; enumerate k-subsets of that disc and
    keep the connected ones.
    """
    anchors = frozenset(anchors)
    a0 = min(anchors, key=cell_key)
    radius = len(anchors) + k - 1
    disc = [
        a0 + (dx, dy)
        for dx in range(-radius, radius + 1)
        for dy in range(-radius, radius + 1)
        if abs(dx) + abs(dy) <= radius
    ]
    free = [c for c in disc if c not in anchors]
    shapes = set()
    for extra in combinations(free, k):
        shape = anchors | set(extra)
        if is_connected(shape):
            shapes.add(frozenset(shape))
    return shapes


def zonotope_support_monte_carlo(zono: WrenchZonotope, rng: np.random.Generator,
                                 n_points: int, direction: np.ndarray) -> float:
    """Empirical support value from random points inside the zonotope."""
    if zono.m == 0:
        return float(direction @ zono.center)
    lam = rng.uniform(-1.0, 1.0, size=(n_points, zono.m))
    points = zono.center + lam @ zono.generators
    return float((points @ direction).max())
