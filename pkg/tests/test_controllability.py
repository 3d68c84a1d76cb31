"""Wrench-set construction and controllability margins.

The pinned margin constants below were frozen after cross-checking the exact
facet-enumeration values against an independent 10^5-direction sampling
estimator (see helpers.sampling_cm); the two agree to well under 0.1% on
every case in the table.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marsplan.controllability import (
    DEFAULT_PARAMS,
    PhysicalParams,
    build_zonotope,
    cached_subassembly_cm,
    clear_cm_cache,
    cm_signed_distance,
    cm_upper_bound,
    facet_normal_candidates,
    gravity_wrench,
    quick_cm_upper,
    subassembly_cm,
    system_cm,
)
from marsplan.model import (
    UNIT_FAULT,
    Cell,
    Configuration,
    partition,
    rotor_fault,
)

from helpers import random_faulty_subassembly, sampling_cm

ORACLE_REL_TOL = 0.02
ORACLE_ABS_TOL = 1e-4


def sub_of(cells, faults=None):
    parts = partition(Configuration.from_cells(cells, faults or {}))
    assert len(parts) == 1
    return parts[0]


ROW3 = [Cell(0, 0), Cell(1, 0), Cell(2, 0)]

# (cells, faults, frozen margin, live generator count)
PINNED = {
    "healthy_singleton": ([Cell(0, 0)], {}, 0.001660780117, 4),
    "rotor_singleton": ([Cell(0, 0)], {Cell(0, 0): rotor_fault(0)}, -0.001831739832, 3),
    "dead_singleton": ([Cell(0, 0)], {Cell(0, 0): UNIT_FAULT}, -0.31392, 0),
    "dead_pair": (
        [Cell(0, 0), Cell(1, 0)],
        {Cell(0, 0): UNIT_FAULT, Cell(1, 0): UNIT_FAULT},
        -0.62784,
        0,
    ),
    "unit_fault_plus_one": (
        [Cell(0, 0), Cell(1, 0)], {Cell(0, 0): UNIT_FAULT}, -0.052915646080, 4,
    ),
    "rotor_plus_one": (
        [Cell(0, 0), Cell(1, 0)], {Cell(0, 0): rotor_fault(1)}, 0.001069053347, 7,
    ),
    "live_dead_live_row": (ROW3, {Cell(1, 0): UNIT_FAULT}, 0.001549412110, 8),
    "dead_end_row": (ROW3, {Cell(0, 0): UNIT_FAULT}, -0.042174613552, 8),
}


# -- parameters ---------------------------------------------------------------


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(unit_mass=0.0)
    with pytest.raises(ValueError):
        PhysicalParams(gravity=-9.81)
    with pytest.raises(ValueError):
        PhysicalParams(arm_offset=0.075, module_pitch=0.15)  # rotors would touch
    with pytest.raises(ValueError):
        PhysicalParams(spin=(1, 1, 1, -1))


def test_params_are_hashable_value_objects():
    assert hash(PhysicalParams()) == hash(DEFAULT_PARAMS)
    assert PhysicalParams(unit_mass=0.05) != DEFAULT_PARAMS


def test_gravity_wrench_counts_every_unit_mass():
    g = gravity_wrench(3)
    assert g.shape == (4,)
    assert g[0] == pytest.approx(3 * 0.032 * 9.81, abs=1e-15)
    assert np.all(g[1:] == 0.0)


# -- zonotope construction ----------------------------------------------------


@pytest.mark.parametrize("name", sorted(PINNED))
def test_live_rotor_generator_counts(name):
    cells, faults, _, m_expected = PINNED[name]
    zono = build_zonotope(sub_of(cells, faults))
    assert zono.m == m_expected
    assert zono.generators.shape == (m_expected, 4)
    # Box [0, f_max]^m recentred: the midpoint thrust of every live rotor.
    assert zono.center == pytest.approx(zono.generators.sum(axis=0), abs=1e-15)


@pytest.mark.parametrize("name", sorted(PINNED))
def test_thrust_axis_support_is_total_live_budget(name):
    cells, faults, _, m_expected = PINNED[name]
    zono = build_zonotope(sub_of(cells, faults))
    up = np.array([1.0, 0.0, 0.0, 0.0])
    budget = m_expected * DEFAULT_PARAMS.rotor_thrust_max
    assert float(zono.support(up)[0]) == pytest.approx(budget, abs=1e-12)
    assert float(zono.support(-up)[0]) == pytest.approx(0.0, abs=1e-12)


def test_support_is_exact_for_the_sign_vertex_and_bounds_samples():
    rng = np.random.default_rng(3)
    sub = random_faulty_subassembly(rng, 5, 2)
    zono = build_zonotope(sub)
    dirs = rng.normal(size=(64, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    sup = zono.support(dirs)
    # Vertex achieving the support: coefficients sign(G d).
    for d, h in zip(dirs, sup):
        lam = np.sign(zono.generators @ d)
        vertex = zono.center + lam @ zono.generators
        assert float(d @ vertex) == pytest.approx(h, abs=1e-12)
    # Random interior points never exceed it.
    lam = rng.uniform(-1.0, 1.0, size=(2000, zono.m))
    points = zono.center + lam @ zono.generators
    assert np.all(points @ dirs.T <= sup[None, :] + 1e-12)


def test_facet_normal_candidates_are_canonical_unit_vectors():
    zono = build_zonotope(sub_of(*PINNED["live_dead_live_row"][:2]))
    normals = facet_normal_candidates(zono.generators)
    assert len(normals) >= 4
    assert np.allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-9)
    # Sign canonicalization: the first component of visible magnitude is +.
    for row in normals:
        lead = row[np.abs(row) > 1e-9][0]
        assert lead > 0
    assert len(np.unique(np.round(normals, 9), axis=0)) == len(normals)


def test_fewer_than_three_generators_yield_no_normals():
    assert facet_normal_candidates(np.zeros((0, 4))).shape == (0, 4)
    assert facet_normal_candidates(np.eye(4)[:2]).shape == (0, 4)


# -- margins ------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(PINNED))
def test_pinned_margins(name):
    cells, faults, expected, _ = PINNED[name]
    assert subassembly_cm(sub_of(cells, faults)) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("name", sorted(PINNED))
def test_margins_match_sampling_estimator(name):
    cells, faults, _, _ = PINNED[name]
    sub = sub_of(cells, faults)
    exact = subassembly_cm(sub)
    est = sampling_cm(sub, DEFAULT_PARAMS, total=100_000, seed=99)
    assert abs(exact - est) <= max(ORACLE_REL_TOL * abs(exact), ORACLE_ABS_TOL)
    if abs(exact) > 1e-9:
        assert (exact > 0) == (est > 0)


def test_all_dead_margin_is_exactly_minus_weight():
    for n in (1, 2, 3):
        cells = [Cell(i, 0) for i in range(n)]
        sub = sub_of(cells, {c: UNIT_FAULT for c in cells})
        weight = n * DEFAULT_PARAMS.unit_mass * DEFAULT_PARAMS.gravity
        assert subassembly_cm(sub) == pytest.approx(-weight, abs=1e-12)


def test_rank_deficient_wrench_set_has_negative_margin():
    # Three live rotors cannot span all four wrench axes.
    sub = sub_of([Cell(0, 0)], {Cell(0, 0): rotor_fault(2)})
    zono = build_zonotope(sub)
    assert zono.m == 3
    assert subassembly_cm(sub) < 0


def test_exterior_margin_is_bounded_by_direction_separation():
    # For any unit direction d, d.g - h(d) is a lower bound on the distance
    # from g to the set, so -cm must dominate every sampled separation.
    sub = sub_of(*PINNED["unit_fault_plus_one"][:2])
    zono = build_zonotope(sub)
    g = gravity_wrench(sub.n)
    cm = cm_signed_distance(zono, g)
    assert cm < 0
    rng = np.random.default_rng(11)
    dirs = rng.normal(size=(5000, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    separations = dirs @ g - zono.support(dirs)
    assert -cm >= float(separations.max()) - 1e-12


def test_interior_margin_is_min_facet_margin():
    sub = sub_of(*PINNED["live_dead_live_row"][:2])
    zono = build_zonotope(sub)
    g = gravity_wrench(sub.n)
    cm = cm_signed_distance(zono, g)
    assert cm > 0
    normals = facet_normal_candidates(zono.generators)
    habs = np.abs(normals @ zono.generators.T).sum(axis=1)
    margins = np.minimum(
        normals @ zono.center + habs - normals @ g,
        -(normals @ zono.center) + habs + normals @ g,
    )
    assert cm == pytest.approx(float(margins.min()), abs=1e-12)


def test_margin_is_translation_invariant():
    cells, faults, expected, _ = PINNED["live_dead_live_row"]
    moved = [c + (7, -3) for c in cells]
    moved_faults = {c + (7, -3): s for c, s in faults.items()}
    assert subassembly_cm(sub_of(moved, moved_faults)) == pytest.approx(expected, rel=1e-9)


def test_cached_margin_matches_direct_and_survives_cache_clear():
    sub = sub_of(*PINNED["rotor_plus_one"][:2])
    clear_cm_cache()
    first = cached_subassembly_cm(sub)
    assert first == subassembly_cm(sub)
    moved = sub_of(
        [c + (3, 9) for c in PINNED["rotor_plus_one"][0]],
        {c + (3, 9): s for c, s in PINNED["rotor_plus_one"][1].items()},
    )
    assert cached_subassembly_cm(moved) == first  # canonical-form cache hit
    clear_cm_cache()
    assert cached_subassembly_cm(sub) == pytest.approx(first, abs=1e-15)


def test_quick_upper_bound_dominates_exact_margin():
    for cells, faults, expected, _ in PINNED.values():
        sub = sub_of(cells, faults)
        assert quick_cm_upper(sub) >= subassembly_cm(sub) - 1e-12


def test_direction_set_upper_bound_contract():
    sub = sub_of(*PINNED["healthy_singleton"][:2])
    zono = build_zonotope(sub)
    g = gravity_wrench(sub.n)
    axes = np.vstack([np.eye(4), -np.eye(4)])
    assert cm_upper_bound(zono, g, axes) >= cm_signed_distance(zono, g) - 1e-12


# -- system margin -------------------------------------------------------------


def test_system_cm_is_infinite_without_faults():
    cfg = Configuration.from_cells([Cell(0, 0), Cell(1, 0)])
    assert system_cm(cfg) == math.inf


def test_system_cm_is_min_over_faulty_components_only():
    # Healthy blob far away + dead singleton + live-dead-live row.
    cells = (
        [Cell(20, 0), Cell(21, 0)]
        + [Cell(10, 10)]
        + ROW3
    )
    faults = {Cell(10, 10): UNIT_FAULT, Cell(1, 0): UNIT_FAULT}
    cfg = Configuration.from_cells(cells, faults)
    expected = min(
        PINNED["dead_singleton"][2], PINNED["live_dead_live_row"][2]
    )
    assert system_cm(cfg) == pytest.approx(expected, abs=1e-9)


def test_system_cm_positive_example():
    cfg = Configuration.from_cells(ROW3, {Cell(1, 0): UNIT_FAULT})
    assert system_cm(cfg) == pytest.approx(PINNED["live_dead_live_row"][2], abs=1e-9)


# -- properties -----------------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 2))
@settings(max_examples=40, deadline=None)
def test_quick_upper_bound_property(seed, n, nf):
    rng = np.random.default_rng(seed)
    sub = random_faulty_subassembly(rng, n, nf)
    assert quick_cm_upper(sub) >= subassembly_cm(sub) - 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 2),
       st.integers(-5, 5), st.integers(-5, 5))
@settings(max_examples=40, deadline=None)
def test_translation_invariance_property(seed, n, nf, dx, dy):
    rng = np.random.default_rng(seed)
    sub = random_faulty_subassembly(rng, n, nf)
    moved = sub_of(
        [c + (dx, dy) for c, _ in sub.units],
        {c + (dx, dy): s for c, s in sub.units if s.is_faulty},
    )
    base = subassembly_cm(sub)
    assert subassembly_cm(moved) == pytest.approx(base, rel=1e-9, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 2))
@settings(max_examples=25, deadline=None)
def test_interior_hover_wrench_iff_positive_margin(seed, n, nf):
    # cm > 0 must mean g is inside the wrench set: every sampled direction
    # leaves at least cm of slack. cm < 0 must mean some direction separates.
    rng = np.random.default_rng(seed)
    sub = random_faulty_subassembly(rng, n, nf)
    zono = build_zonotope(sub)
    g = gravity_wrench(sub.n)
    cm = subassembly_cm(sub)
    dirs = rng.normal(size=(4000, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    slack = zono.support(dirs) - dirs @ g
    if cm > 1e-9:
        assert float(slack.min()) >= cm - 1e-9
    elif cm < -1e-9:
        assert float(slack.min()) >= cm - 1e-9  # no direction separates deeper
