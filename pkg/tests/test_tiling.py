import numpy as np
import pytest

from treecap import (
    BoundaryMeasure,
    SphericallySymmetric,
    Tiling,
    TilingSquare,
    build_tiling,
    build_tree,
    capacity_of_set,
    capacity_recursive,
    emit_svg,
    measure_from_tiling,
    tiling_from_json,
    validate_tiling,
)


def fixture_tiling():
    t = build_tree(SphericallySymmetric([2]))
    r = capacity_recursive(t, 2)
    return t, r, build_tiling(t, r.measure)


def test_exact_fixture_geometry():
    t, r, til = fixture_tiling()
    assert til.width == pytest.approx(2 / 3, abs=1e-15)
    assert til.height == 1.0
    got = sorted((s.x, s.y, s.side) for s in til.squares)
    want = [(0.0, 0.0, 2 / 3), (0.0, 2 / 3, 1 / 3), (1 / 3, 2 / 3, 1 / 3)]
    for g, w in zip(got, want):
        assert g == pytest.approx(w, abs=1e-15)


def test_validation_and_inversion():
    t, r, til = fixture_tiling()
    rep = validate_tiling(til)
    assert rep.ok
    assert rep.area_defect <= 1e-15
    assert rep.max_overlap == 0.0
    mu, ver = measure_from_tiling(t, til)
    assert np.allclose(mu.M, r.measure.M, atol=1e-15)
    assert ver.is_equilibrium


def test_gate_rejects_non_equilibrium():
    t = build_tree(SphericallySymmetric([2]))
    mu = BoundaryMeasure.from_leaf_masses(t, {1: 0.3, 2: 0.4})
    with pytest.raises(ValueError):
        build_tiling(t, mu)


def test_zero_mass_squares_dropped():
    t = build_tree(SphericallySymmetric([2, 2]))
    r = capacity_of_set(t, t.true_leaves()[:2], 2)
    til = build_tiling(t, r.measure)
    drawn = {s.edge for s in til.squares}
    assert 2 not in drawn  # empty branch contributes nothing
    assert validate_tiling(til).ok
    mu, ver = measure_from_tiling(t, til)
    assert ver.is_equilibrium
    assert np.allclose(mu.M, r.measure.M, atol=1e-15)


def test_validator_flags_overlap_and_adjacency():
    t, r, til = fixture_tiling()
    shifted = Tiling(tree=t, width=til.width, height=til.height,
                     squares=[til.squares[0],
                              til.squares[1],
                              TilingSquare(edge=2, x=0.2, y=2 / 3,
                                           side=1 / 3)])
    rep = validate_tiling(shifted)
    assert not rep.ok
    assert rep.max_overlap > 0
    hanging = Tiling(tree=t, width=til.width, height=til.height,
                     squares=[til.squares[0],
                              TilingSquare(edge=1, x=0.0, y=0.5, side=1 / 3),
                              til.squares[2]])
    rep = validate_tiling(hanging)
    assert not rep.ok
    assert rep.adjacency_defect > 1e-9
    missing = Tiling(tree=t, width=til.width, height=til.height,
                     squares=til.squares[1:])
    rep = validate_tiling(missing)
    assert not rep.ok  # children have no parent square


def test_validator_flags_area_and_containment():
    t, r, til = fixture_tiling()
    shrunk = Tiling(tree=t, width=1.0, height=1.0, squares=til.squares)
    rep = validate_tiling(shrunk)
    assert rep.area_defect > 1e-3
    outside = Tiling(tree=t, width=til.width, height=til.height,
                     squares=[TilingSquare(edge=0, x=-0.5, y=0.0,
                                           side=2 / 3)] + til.squares[1:])
    rep = validate_tiling(outside)
    assert rep.containment_defect >= 0.5


def test_json_roundtrip_and_svg():
    t, r, til = fixture_tiling()
    back = tiling_from_json(t, til.to_json())
    assert validate_tiling(back).ok
    assert [s.edge for s in sorted(back.squares, key=lambda s: s.edge)] == \
        [s.edge for s in sorted(til.squares, key=lambda s: s.edge)]
    svg = emit_svg(til, labels=True)
    assert svg == emit_svg(til, labels=True)  # deterministic
    assert svg.count("<rect") == len(til.squares) + 1
    assert svg.count("<text") == len(til.squares)


def test_deep_random_tilings():
    rng = np.random.default_rng(41)
    from helpers import random_tree
    for _ in range(10):
        tree = random_tree(rng, max_edges=120)
        r = capacity_recursive(tree, 2)
        til = build_tiling(tree, r.measure)
        assert validate_tiling(til, tol=1e-9).ok
        mu, ver = measure_from_tiling(tree, til)
        assert ver.is_equilibrium
        assert float(np.abs(mu.M - r.measure.M).max()) <= 1e-12
