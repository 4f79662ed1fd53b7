"""Boundary capacities on rooted trees via the branched continued
fraction recursion, with certified intervals under truncation.

The one-step map is c(a) = S / (1 + S^(p'-1))^(p-1) where S sums the
children's values; a true leaf carries the value 1 (the one-edge
variational problem).  The map is strictly increasing in S, so running
the recursion twice with lower and upper tail values brackets the true
capacity of a truncated tree.  The equilibrium co-potential is then
recovered top-down through

    M(a) = c(a) * prod over ancestors g of (1 - c(g)^(p'-1))^(p-1).

Spherically symmetric trees admit two independent evaluation routes:
the per-level scalar version of the same recursion, and the level
counting series  c = (sum_k card(k)^(1-p'))^(1-p)  used both for
symmetric_capacity and for certifying tail seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import as_exponent, signed_power, potential_all
from .trees import BoundaryMeasure, SymmetricTree, spanned_subtree, tent

ROUNDING_PAD = 1e-13


@dataclass(frozen=True)
class CapacityInterval:
    """Certified bracket of a capacity value, inside [0, 1]."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (-1e-15 <= self.lower <= self.upper <= 1.0 + 1e-15):
            raise ValueError(f"bad interval [{self.lower}, {self.upper}]")

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, v, slack=0.0):
        return self.lower - slack <= v <= self.upper + slack

    def to_json(self):
        return {"lower": self.lower, "upper": self.upper}


def _phi(S, p):
    pe = as_exponent(p)
    S = np.asarray(S, dtype=float)
    return S / (1.0 + S ** (pe.conjugate - 1.0)) ** (pe.p - 1.0)


def homogeneous_capacity(n, p):
    """Boundary capacity of the tree in which every edge has n children."""
    pe = as_exponent(p)
    return (1.0 - float(n) ** (1.0 - pe.conjugate)) ** (pe.p - 1.0)


def _pad_interval(lo, hi, pad=ROUNDING_PAD):
    lo = max(0.0, lo - pad * (1.0 + abs(lo)))
    hi = min(1.0, hi + pad * (1.0 + abs(hi)))
    return lo, hi


# ---------------------------------------------------------------------------
# the level counting series for spherically symmetric trees


def symmetric_capacity(degrees, p, depth=None, tail_degree=None):
    """Capacity interval of a spherically symmetric boundary from the
    level counting series sum_k card(k)^(1-p').

    degrees lists the forward degree per level; without tail_degree the
    tree ends after the last listed level (exact finite sum), otherwise
    it continues with constant degree tail_degree.  depth caps the
    number of series terms; the remainder is bounded by comparison with
    the worst (smallest) continuing degree, so a continuation that may
    stop branching (degree 1) only yields the trivial lower bound 0.
    """
    pe = as_exponent(p)
    degrees = [int(d) for d in degrees]
    if any(d < 1 for d in degrees):
        raise ValueError("forward degrees must be >= 1")
    if tail_degree is not None and tail_degree < 1:
        raise ValueError("tail degree must be >= 1")
    finite = tail_degree is None
    n_levels = len(degrees) + 1 if finite else None
    if not finite and tail_degree == 1:
        # the series grows by a constant term per level from some point
        # on, so it diverges and the boundary is capacity zero exactly
        return CapacityInterval(0.0, 0.0)

    auto = depth is None
    if auto:
        depth = n_levels if finite else max(len(degrees) + 64, 64)
    q = 1.0 - pe.conjugate  # negative

    def deg_at(k):
        return degrees[k] if k < len(degrees) else tail_degree

    partial = 0.0
    log_card = 0.0
    k = 0
    while True:
        term = math.exp(q * log_card)
        partial += term
        k += 1
        if finite and k >= n_levels:
            return CapacityInterval(partial ** (1.0 - pe.p),
                                    partial ** (1.0 - pe.p))
        if k >= depth:
            if auto and not finite and term > 1e-18 * partial and k < 200_000:
                depth += 64  # keep going while terms still matter
            else:
                break
        log_card += math.log(deg_at(k - 1))

    # bound the omitted levels k, k+1, ... by a geometric comparison
    remaining = degrees[k:] if k < len(degrees) else []
    d_min = min(remaining + ([tail_degree] if not finite else []),
                default=1)
    log_card += math.log(deg_at(k - 1))
    head = math.exp(q * log_card)
    if d_min >= 2:
        tail_ub = head / (1.0 - d_min ** q)
        upper_sum = partial + tail_ub
        lo = upper_sum ** (1.0 - pe.p)
    else:
        lo = 0.0
    hi = partial ** (1.0 - pe.p)
    lo, hi = _pad_interval(lo, hi)
    return CapacityInterval(lo, hi)


def _tail_seed(continuation, p):
    """Certified capacity interval of the tent below a truncation tail."""
    prefix, eventual = continuation
    iv = symmetric_capacity(list(prefix), p, tail_degree=eventual)
    return iv.lower, iv.upper


def _resolve_tail_bounds(tree, tail_policy, p):
    """Uniform (lo, hi) tail values, or per-tail arrays for mappings."""
    if tail_policy == "interval":
        cont = getattr(tree, "continuation", None)
        if cont is not None:
            return _tail_seed(cont, p)
        return 0.0, 1.0
    if tail_policy == "pessimistic":
        return 0.0, 0.0
    if tail_policy == "optimistic":
        return 1.0, 1.0
    if isinstance(tail_policy, (int, float)):
        t = float(tail_policy)
        if not 0.0 <= t <= 1.0:
            raise ValueError("tail value must lie in [0, 1]")
        return t, t
    if isinstance(tail_policy, dict):
        return tail_policy  # per tail id: value or (lo, hi)
    raise ValueError(f"unknown tail policy {tail_policy!r}")


def _tail_arrays(tree, tail_policy, p):
    bounds = _resolve_tail_bounds(tree, tail_policy, p)
    lo = np.zeros(tree.n_edges)
    hi = np.ones(tree.n_edges)
    if isinstance(bounds, dict):
        for i in tree.tail_ids():
            v = bounds.get(i, (0.0, 1.0))
            vlo, vhi = (v, v) if isinstance(v, (int, float)) else v
            lo[i], hi[i] = float(vlo), float(vhi)
    else:
        lo[:], hi[:] = bounds
    return lo, hi


# ---------------------------------------------------------------------------
# results


@dataclass
class EquilibriumResult:
    """Capacity bracket plus the witnessing equilibrium data.

    The edge functions (tent capacities c, co-potential M, equilibrium
    function M_p) come from the lower tail run; upper_run carries the
    optimistic counterparts when the bracket has positive width.  On a
    finite tree the two runs coincide and upper_run is None.
    """

    tree: object
    p: float
    capacity: CapacityInterval
    c_of_alpha: np.ndarray
    measure: BoundaryMeasure
    equilibrium_function: np.ndarray
    upper_run: tuple | None = None

    def to_json(self, keep_zero=False):
        from .trees import edge_function_to_mapping
        return {
            "capacity": self.capacity.to_json(),
            "M": edge_function_to_mapping(self.tree, self.measure.M,
                                          keep_zero=keep_zero),
            "c": edge_function_to_mapping(self.tree, self.c_of_alpha,
                                          keep_zero=keep_zero),
        }


@dataclass
class LevelEquilibriumResult:
    """Per-level recursion output for a compact symmetric truncation.

    Arrays are indexed by level 0..depth; every edge at a level shares
    the value, so c and M at an edge are c_levels[level] etc."""

    tree: SymmetricTree
    p: float
    capacity: CapacityInterval
    c_levels: np.ndarray
    m_levels: np.ndarray
    c_levels_upper: np.ndarray
    m_levels_upper: np.ndarray

    def to_json(self):
        return {
            "capacity": self.capacity.to_json(),
            "levels": {
                "c": self.c_levels.tolist(),
                "M": self.m_levels.tolist(),
                "c_upper": self.c_levels_upper.tolist(),
                "M_upper": self.m_levels_upper.tolist(),
            },
        }


# ---------------------------------------------------------------------------
# the recursion


def _run_explicit(tree, p, boundary_values):
    """One bottom-up/top-down sweep; boundary_values feed leaves+tails."""
    pe = as_exponent(p)
    n = tree.n_edges
    c = np.zeros(n)
    acc = np.zeros(n)
    has_kids = np.array([len(tree.children_of(i)) > 0 for i in range(n)])
    for k in range(tree.depth, -1, -1):
        a, b = tree.level_slice(k)
        ids = np.arange(a, b)
        vals = np.where(has_kids[a:b], _phi(acc[a:b], p), boundary_values[a:b])
        c[a:b] = vals
        if k > 0:
            np.add.at(acc, tree.parent[a:b], vals)
    # top-down measure
    factor = (1.0 - np.clip(c, 0.0, 1.0) ** (pe.conjugate - 1.0))
    factor = np.clip(factor, 0.0, None) ** (pe.p - 1.0)
    prod = np.ones(n)
    for k in range(1, tree.depth + 1):
        a, b = tree.level_slice(k)
        par = tree.parent[a:b]
        prod[a:b] = prod[par] * factor[par]
    M = c * prod
    return c, M


def capacity_recursive(tree, p, tail_policy="interval"):
    """Capacity of the whole stored boundary with equilibrium data.

    tail_policy: "interval" (certified bracket; level-regular trees
    seed their tails from the level counting series, others use [0,1]),
    "pessimistic" (0), "optimistic" (1), a number in [0,1], or a dict
    {tail id: value or (lo, hi)}.
    """
    pe = as_exponent(p)
    if isinstance(tree, SymmetricTree):
        return _capacity_symmetric(tree, pe, tail_policy)

    t_lo, t_hi = _tail_arrays(tree, tail_policy, pe)
    is_true_leaf = np.array([tree.is_true_leaf(i) for i in range(tree.n_edges)])
    b_lo = np.where(is_true_leaf, 1.0, t_lo)
    b_hi = np.where(is_true_leaf, 1.0, t_hi)

    c_lo, M_lo = _run_explicit(tree, pe, b_lo)
    truncated = bool(np.any(tree.tail))
    if truncated and np.any(t_lo[tree.tail] != t_hi[tree.tail]):
        c_hi, M_hi = _run_explicit(tree, pe, b_hi)
    else:
        c_hi, M_hi = c_lo, M_lo

    lo, hi = float(c_lo[0]), float(c_hi[0])
    if truncated and tail_policy == "interval":
        # certified seeds promise containment; absorb float rounding
        lo, hi = _pad_interval(lo, hi)
    upper_run = None
    if c_hi is not c_lo:
        upper_run = (c_hi, BoundaryMeasure(tree, M_hi, validate=False),
                     signed_power(M_hi, pe))
    return EquilibriumResult(
        tree=tree, p=pe.p,
        capacity=CapacityInterval(min(lo, hi), max(lo, hi)),
        c_of_alpha=c_lo,
        measure=BoundaryMeasure(tree, M_lo, validate=False),
        equilibrium_function=signed_power(M_lo, pe),
        upper_run=upper_run,
    )


def _level_run(degrees, pe, boundary_value):
    D = len(degrees)
    c = np.zeros(D + 1)
    c[D] = boundary_value
    for k in range(D - 1, -1, -1):
        c[k] = float(_phi(degrees[k] * c[k + 1], pe))
    factor = (1.0 - np.clip(c, 0.0, 1.0) ** (pe.conjugate - 1.0))
    factor = np.clip(factor, 0.0, None) ** (pe.p - 1.0)
    M = np.empty(D + 1)
    M[0] = c[0]
    prod = 1.0
    for k in range(1, D + 1):
        prod *= factor[k - 1]
        M[k] = c[k] * prod
    return c, M


def _capacity_symmetric(tree, pe, tail_policy):
    if tree.truncated:
        bounds = _resolve_tail_bounds(tree, tail_policy, pe)
        if isinstance(bounds, dict):
            raise ValueError("per-tail values need an explicit tree")
        b_lo, b_hi = bounds
    else:
        b_lo = b_hi = 1.0
    c_lo, M_lo = _level_run(tree.degrees, pe, b_lo)
    if b_hi != b_lo:
        c_hi, M_hi = _level_run(tree.degrees, pe, b_hi)
    else:
        c_hi, M_hi = c_lo, M_lo
    lo, hi = float(c_lo[0]), float(c_hi[0])
    if tree.truncated and tail_policy == "interval":
        lo, hi = _pad_interval(lo, hi)
    return LevelEquilibriumResult(
        tree=tree, p=pe.p,
        capacity=CapacityInterval(min(lo, hi), max(lo, hi)),
        c_levels=c_lo, m_levels=M_lo,
        c_levels_upper=c_hi, m_levels_upper=M_hi,
    )


def capacity_of_set(tree, boundary_set, p):
    """Capacity of a set of true leaves, with the equilibrium measure
    extended by zero to the host tree."""
    pe = as_exponent(p)
    sub = spanned_subtree(tree, boundary_set)  # validates the set
    res = capacity_recursive(sub, pe, tail_policy="pessimistic")
    n = tree.n_edges
    c = np.zeros(n)
    M = np.zeros(n)
    ids = np.asarray(sub.orig_ids)
    c[ids] = res.c_of_alpha
    M[ids] = res.measure.M
    return EquilibriumResult(
        tree=tree, p=pe.p, capacity=res.capacity,
        c_of_alpha=c,
        measure=BoundaryMeasure(tree, M, validate=False),
        equilibrium_function=signed_power(M, pe),
    )


def _leaf_indicator_capacity(tree, member, p):
    """Capacity of {true leaves with member flag} without building the
    spanned subtree: absent leaves carry 0, which the recursion
    propagates exactly as if their branches were pruned."""
    pe = as_exponent(p)
    member = np.asarray(member, dtype=float)
    n = tree.n_edges
    vals = np.zeros(n)
    acc = np.zeros(n)
    has_kids = np.array([len(tree.children_of(i)) > 0 for i in range(n)])
    for k in range(tree.depth, -1, -1):
        a, b = tree.level_slice(k)
        v = np.where(has_kids[a:b], _phi(acc[a:b], pe), member[a:b])
        vals[a:b] = v
        if k > 0:
            np.add.at(acc, tree.parent[a:b], v)
    return float(vals[0])


# ---------------------------------------------------------------------------
# rescaling onto tents


@dataclass
class RescalingResult:
    """Restriction of an equilibrium measure to a tent, renormalized to
    the tent's own equilibrium measure."""

    k: float
    alpha: int
    tent: object
    measure: BoundaryMeasure
    capacity: float


def rescaling_constant(tree, result, alpha, tol=1e-12):
    """k(a) = (1 - I M_p(b(a)))^(-p/p') and the rescaled tent measure.

    Degenerate (error) when the potential of the equilibrium function
    already reaches 1 at the begin vertex of alpha.
    """
    pe = as_exponent(result.p)
    pot = potential_all(tree, result.equilibrium_function)
    v = pot.at_begin(tree, alpha)
    if v >= 1.0 - tol:
        raise ValueError(
            f"potential {v} at the begin vertex of {alpha} leaves no mass "
            "to rescale")
    k = (1.0 - v) ** (-pe.p / pe.conjugate)
    sub = tent(tree, alpha)
    M = k * result.measure.M[np.asarray(sub.orig_ids)]
    return RescalingResult(
        k=k, alpha=alpha, tent=sub,
        measure=BoundaryMeasure(sub, M, validate=False),
        capacity=float(k * result.measure.M[alpha]),
    )


# ---------------------------------------------------------------------------
# series-parallel resistance (p = 2)


@dataclass
class ResistanceResult:
    """Resistance strictly below the end vertex of each edge.

    below[a] is the parallel combination over children b of
    1 + below[b]; a true leaf grounds at 0 and a tail seeds at
    (1 - t)/t for a tail capacity value t.  total is below[root], the
    resistance of the tree minus its root edge, so the p = 2 capacity
    of the stored boundary is 1/(1 + total).  per_level marks compact
    symmetric trees, whose arrays are indexed by level.
    """

    tree: object
    lower: float
    upper: float
    below_lower: np.ndarray
    below_upper: np.ndarray
    per_level: bool = False

    def capacity_interval(self):
        lo = 1.0 / (1.0 + self.upper) if np.isfinite(self.upper) else 0.0
        return CapacityInterval(max(0.0, lo),
                                min(1.0, 1.0 / (1.0 + self.lower)))


def _tail_resistance(t):
    if t <= 0.0:
        return math.inf
    return (1.0 - t) / t


def _resistance_explicit(tree, seeds):
    n = tree.n_edges
    R = np.zeros(n)
    g_acc = np.zeros(n)  # sum over children of 1/(1 + R(child))
    for k in range(tree.depth, -1, -1):
        a, b = tree.level_slice(k)
        for i in range(a, b):
            if tree.children_of(i):
                R[i] = math.inf if g_acc[i] == 0.0 else 1.0 / g_acc[i]
            elif tree.is_tail(i):
                R[i] = seeds[i]
            else:
                R[i] = 0.0
            if k > 0:
                g_acc[tree.parent_of(i)] += (
                    0.0 if math.isinf(R[i]) else 1.0 / (1.0 + R[i]))
    return R


def total_resistance(tree, tail_policy="interval"):
    """Series-parallel resistance of the tree below its root edge."""
    if isinstance(tree, SymmetricTree):
        return _resistance_symmetric(tree, tail_policy)
    bounds = _resolve_tail_bounds(tree, tail_policy, 2.0)
    t_lo = np.zeros(tree.n_edges)
    t_hi = np.ones(tree.n_edges)
    if isinstance(bounds, dict):
        for i in tree.tail_ids():
            v = bounds.get(i, (0.0, 1.0))
            vlo, vhi = (v, v) if isinstance(v, (int, float)) else v
            t_lo[i], t_hi[i] = vlo, vhi
    else:
        t_lo[:], t_hi[:] = bounds
    seeds_low = np.array([_tail_resistance(t) for t in t_hi])
    R_low = _resistance_explicit(tree, seeds_low)
    if np.any(tree.tail) and np.any(t_lo[tree.tail] != t_hi[tree.tail]):
        seeds_high = np.array([_tail_resistance(t) for t in t_lo])
        R_high = _resistance_explicit(tree, seeds_high)
    else:
        R_high = R_low
    return ResistanceResult(tree, float(R_low[0]), float(R_high[0]),
                            R_low, R_high)


def _resistance_symmetric(tree, tail_policy):
    if tree.truncated:
        bounds = _resolve_tail_bounds(tree, tail_policy, 2.0)
        if isinstance(bounds, dict):
            raise ValueError("per-tail values need an explicit tree")
        b_lo, b_hi = bounds
    else:
        b_lo = b_hi = 1.0

    def run(t):
        D = tree.depth
        R = np.zeros(D + 1)
        R[D] = _tail_resistance(t) if tree.truncated else 0.0
        for k in range(D - 1, -1, -1):
            R[k] = (1.0 + R[k + 1]) / tree.degrees[k]
        return R

    R_low = run(b_hi)
    R_high = run(b_lo) if b_lo != b_hi else R_low
    return ResistanceResult(tree, float(R_low[0]), float(R_high[0]),
                            R_low, R_high, per_level=True)
