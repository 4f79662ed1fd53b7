import math

import numpy as np
import pytest

from treecap import (
    BoundaryMeasure,
    CapacityInterval,
    EquilibriumResult,
    Homogeneous,
    LevelEquilibriumResult,
    SphericallySymmetric,
    build_tree,
    capacity_of_set,
    capacity_recursive,
    homogeneous_capacity,
    rescaling_constant,
    symmetric_capacity,
    total_resistance,
)
from helpers import random_p, random_tree


def series_capacity(cards, p):
    """Independent level-counting reference: (sum card^(1-p'))^(1-p)."""
    q = 1.0 - p / (p - 1.0)
    return sum(c ** q for c in cards) ** (1.0 - p)


def test_interval_basics():
    iv = CapacityInterval(0.25, 0.5)
    assert iv.width == 0.25
    assert iv.midpoint == 0.375
    assert iv.contains(0.3) and not iv.contains(0.6)
    assert iv.to_json() == {"lower": 0.25, "upper": 0.5}
    with pytest.raises(ValueError):
        CapacityInterval(0.5, 0.25)


def test_three_edge_fixture():
    t = build_tree(SphericallySymmetric([2]))
    r = capacity_recursive(t, 2)
    assert r.capacity.width == 0.0
    assert r.capacity.midpoint == pytest.approx(2 / 3, abs=1e-15)
    assert np.allclose(r.measure.M, [2 / 3, 1 / 3, 1 / 3])
    assert np.allclose(r.c_of_alpha, [2 / 3, 1.0, 1.0])
    assert r.upper_run is None


def test_finite_binary_against_series():
    for depth in (1, 2, 3, 5):
        cards = [2 ** k for k in range(depth + 1)]
        t = build_tree(SphericallySymmetric([2] * depth))
        for p in (1.5, 2.0, 3.0):
            r = capacity_recursive(t, p)
            assert r.capacity.midpoint == pytest.approx(
                series_capacity(cards, p), rel=1e-12)


def test_path_capacities():
    for k in (1, 2, 5, 9):
        t = build_tree(SphericallySymmetric([1] * (k - 1)))
        for p in (1.3, 2.0, 3.5):
            r = capacity_recursive(t, p)
            assert r.capacity.midpoint == pytest.approx(k ** (1 - p),
                                                        rel=1e-12)
            # the equilibrium spreads mass k^(1-p) over every edge
            assert np.allclose(r.measure.M, k ** (1 - p))


def test_homogeneous_closed_form():
    assert homogeneous_capacity(2, 2) == pytest.approx(0.5)
    for n, p in ((2, 1.5), (3, 2.0), (5, 2.5)):
        q = p / (p - 1.0)
        assert homogeneous_capacity(n, p) == pytest.approx(
            (1.0 - n ** (1.0 - q)) ** (p - 1.0))


def test_symmetric_capacity_matches_recursion():
    rng = np.random.default_rng(11)
    for _ in range(10):
        degs = [int(d) for d in rng.integers(1, 4, size=rng.integers(1, 6))]
        p = random_p(rng)
        t = build_tree(SphericallySymmetric(degs))
        iv = symmetric_capacity(degs, p)
        assert iv.width == 0.0
        r = capacity_recursive(t, p)
        assert iv.midpoint == pytest.approx(r.capacity.midpoint, rel=1e-12)
        cards = np.cumprod([1] + degs).tolist()
        assert iv.midpoint == pytest.approx(series_capacity(cards, p),
                                            rel=1e-12)


def test_symmetric_capacity_tail_bounds():
    iv = symmetric_capacity([], 2, tail_degree=2)
    assert iv.contains(0.5) and iv.width < 1e-12
    # a continuation that may stop branching diverges: capacity 0 exactly
    assert symmetric_capacity([3, 3], 2, tail_degree=1) == CapacityInterval(0, 0)
    # truncating the series keeps a certified bracket
    full = symmetric_capacity([2] * 40, 3, tail_degree=2)
    short = symmetric_capacity([2] * 40, 3, tail_degree=2, depth=12)
    assert short.lower <= full.midpoint <= short.upper
    assert short.width > full.width


def test_compact_layout_agrees_with_explicit():
    for p in (1.5, 2.0, 2.7):
        te = build_tree(Homogeneous(3), depth=5, layout="explicit")
        tc = build_tree(Homogeneous(3), depth=5, layout="compact")
        re = capacity_recursive(te, p)
        rc = capacity_recursive(tc, p)
        assert isinstance(rc, LevelEquilibriumResult)
        assert rc.capacity.lower == pytest.approx(re.capacity.lower, rel=1e-12)
        assert rc.capacity.upper == pytest.approx(re.capacity.upper, rel=1e-12)
        # per-level values match the explicit per-edge ones
        for lev in range(te.depth + 1):
            lo, hi = te.level_slice(lev)
            assert re.measure.M[lo] == pytest.approx(rc.m_levels[lev],
                                                     rel=1e-12)
            assert re.c_of_alpha[lo] == pytest.approx(rc.c_levels[lev],
                                                      rel=1e-12)


def test_tail_policies():
    t = build_tree(Homogeneous(2), depth=6, layout="explicit")
    pes = capacity_recursive(t, 2, tail_policy="pessimistic")
    opt = capacity_recursive(t, 2, tail_policy="optimistic")
    iv = capacity_recursive(t, 2, tail_policy="interval")
    # every boundary point hides behind a tail here, so the pessimistic
    # scenario (worthless tails) collapses to capacity zero
    assert pes.capacity.midpoint == pytest.approx(0.0, abs=1e-12)
    assert opt.capacity.midpoint >= iv.capacity.upper - 1e-12
    assert iv.capacity.lower > 0.0
    assert iv.capacity.contains(0.5)
    # a boundary with both a true leaf and a tail brackets between the
    # two scenarios
    from treecap import Tree
    mixed = Tree.from_adjacency({"r": ["a", "b"], "a": [], "b": []},
                                tails=["a"])
    lo = capacity_recursive(mixed, 2, tail_policy="pessimistic")
    hi = capacity_recursive(mixed, 2, tail_policy="optimistic")
    assert lo.capacity.midpoint == pytest.approx(0.5, abs=1e-12)
    assert hi.capacity.midpoint == pytest.approx(2 / 3, abs=1e-12)
    both = capacity_recursive(mixed, 2, tail_policy="interval")
    assert both.capacity.lower == pytest.approx(0.5, abs=1e-10)
    assert both.capacity.upper == pytest.approx(2 / 3, abs=1e-10)
    # seeding the exact continuation value reproduces the fixed point
    fixed = capacity_recursive(t, 2, tail_policy=0.5)
    assert fixed.capacity.midpoint == pytest.approx(0.5, abs=1e-12)
    assert fixed.capacity.width == 0.0
    per_tail = capacity_recursive(
        t, 2, tail_policy={z: 0.5 for z in t.tail_ids()})
    assert per_tail.capacity.midpoint == pytest.approx(0.5, abs=1e-12)


def test_certified_interval_shrinks_with_depth():
    widths = []
    for depth in (5, 10, 20, 30):
        t = build_tree(Homogeneous(2), depth=depth)
        r = capacity_recursive(t, 2)
        assert r.capacity.contains(0.5)
        widths.append(r.capacity.width)
    assert widths[0] > widths[1] > widths[2]
    assert widths[-1] < 1e-5


def test_capacity_monotone_in_the_set():
    rng = np.random.default_rng(12)
    for _ in range(10):
        tree = random_tree(rng, max_edges=80)
        p = random_p(rng)
        leaves = tree.true_leaves()
        full = capacity_recursive(tree, p).capacity.midpoint
        part = capacity_of_set(tree, leaves[: max(1, len(leaves) // 2)], p)
        assert part.capacity.midpoint <= full + 1e-12
        assert capacity_of_set(tree, leaves, p).capacity.midpoint == \
            pytest.approx(full, rel=1e-12)


def test_capacity_of_single_leaf_is_path():
    t = build_tree(SphericallySymmetric([2, 2, 2]))
    z = t.true_leaves()[0]
    for p in (1.5, 2.0, 3.0):
        r = capacity_of_set(t, [z], p)
        k = t.level_of(z) + 1
        assert r.capacity.midpoint == pytest.approx(k ** (1 - p), rel=1e-12)
        # measure lives on the path only
        assert r.measure.M[z] > 0
        assert r.measure.M[t.true_leaves()[1]] == 0.0


def test_equilibrium_measure_total_is_capacity():
    rng = np.random.default_rng(13)
    for _ in range(10):
        tree = random_tree(rng, max_edges=80)
        p = random_p(rng)
        r = capacity_recursive(tree, p)
        assert r.measure.total_mass == pytest.approx(r.capacity.midpoint,
                                                     rel=1e-12)
        assert isinstance(r, EquilibriumResult)
        assert np.all(r.measure.M >= 0)
        # potential of the equilibrium function reaches 1 at every leaf
        from treecap import potential_all
        V = potential_all(tree, r.equilibrium_function)
        for z in tree.true_leaves():
            if r.measure.M[z] > 1e-12:
                assert V.at_end(z) == pytest.approx(1.0, abs=1e-10)


def test_rescaling_fixture():
    t = build_tree(SphericallySymmetric([2, 2, 2]))
    r = capacity_recursive(t, 2)
    rs = rescaling_constant(t, r, 1)
    assert rs.k == pytest.approx(15 / 7, rel=1e-12)
    assert rs.capacity == pytest.approx(4 / 7, rel=1e-12)
    sub_eq = capacity_recursive(rs.tent, 2)
    assert np.allclose(rs.measure.M, sub_eq.measure.M, atol=1e-12)
    bogus = EquilibriumResult(
        tree=t, p=2.0, capacity=r.capacity, c_of_alpha=r.c_of_alpha,
        measure=r.measure, equilibrium_function=np.ones(t.n_edges))
    with pytest.raises(ValueError):
        rescaling_constant(t, bogus, 1)  # potential already 1 at b(alpha)


def test_resistance_series_and_parallel():
    # path of k edges: k-1 ohms below the root edge, capacity 1/k
    for k in (1, 2, 5):
        t = build_tree(SphericallySymmetric([1] * (k - 1)))
        res = total_resistance(t)
        assert res.lower == pytest.approx(k - 1.0)
        assert res.upper == res.lower
        assert res.capacity_interval().midpoint == pytest.approx(1.0 / k)
    t = build_tree(SphericallySymmetric([2]))
    res = total_resistance(t)
    assert res.lower == pytest.approx(0.5)
    assert res.capacity_interval().midpoint == pytest.approx(2 / 3)


def test_resistance_brackets_infinite_binary():
    t = build_tree(Homogeneous(2), depth=12, layout="explicit")
    res = total_resistance(t)
    assert res.lower <= 1.0 <= res.upper
    assert res.capacity_interval().contains(0.5)
    # pessimistic tails leave the branch open: infinite resistance there
    open_ended = total_resistance(t, tail_policy="pessimistic")
    assert open_ended.upper == math.inf
    assert open_ended.capacity_interval().lower == 0.0
    # compact layout agrees
    tc = build_tree(Homogeneous(2), depth=12, layout="compact")
    resc = total_resistance(tc)
    assert resc.lower == pytest.approx(res.lower, rel=1e-12)
    assert resc.upper == pytest.approx(res.upper, rel=1e-12)


def test_padding_only_on_truncations():
    finite = capacity_recursive(build_tree(SphericallySymmetric([2, 2])), 2)
    assert finite.capacity.width == 0.0
    trunc = capacity_recursive(build_tree(Homogeneous(2), depth=8), 2)
    assert trunc.capacity.width > 0.0


def test_capacity_rejects_bad_exponent():
    t = build_tree(SphericallySymmetric([2]))
    with pytest.raises(ValueError):
        capacity_recursive(t, 1.0)
    with pytest.raises(ValueError):
        symmetric_capacity([2], 0.5)
