"""Rooted trees of edges, boundaries and measures on them.

Conventions used throughout the package:

* A tree is a set of edges.  The root edge has id 0; every other edge
  hangs off the end vertex of its parent.  The level of an edge counts
  the edges strictly between it and the root edge, so the root edge has
  level 0.  The end vertex of an edge at level k has level k + 1.
* Edge ids are assigned breadth first, so ids are sorted by level and,
  within a level, by the order children were listed.  Bottom-up passes
  can therefore iterate ids in reverse.
* A leaf is an edge without children.  A leaf flagged as a *tail*
  stands for an unexplored infinite subtree below a truncation depth;
  a leaf that is not a tail is a genuine endpoint of the tree.  The
  boundary at this resolution is the set of true leaves.
* An edge function is a numpy array indexed by edge id (missing edges
  of a host tree read 0 when a mapping is converted).  A boundary
  measure is stored through its co-potential M, where M[a] is the mass
  of the boundary piece seen through edge a; forward additivity
  M[a] = sum of M over children of a is what makes M a measure.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

MAX_EXPLICIT_EDGES = 2_000_000

BoundarySet = frozenset
EdgeFunction = np.ndarray


class TreeStructureError(ValueError):
    """Malformed tree input: cycles, several roots, bad degrees."""


class TreeTooLargeError(ValueError):
    """Explicit arena would exceed the edge budget."""


# ---------------------------------------------------------------------------
# tree specifications


@dataclass(frozen=True)
class Explicit:
    """Adjacency given edge by edge: {edge: [children...]}."""

    adjacency: Mapping
    root: object = None


@dataclass(frozen=True)
class Homogeneous:
    """Every edge has exactly n children, indefinitely."""

    n: int


@dataclass(frozen=True)
class SphericallySymmetric:
    """Forward degree depends on the level only; the listed degrees are
    consumed one per level and the tree ends (true leaves) after the
    last one."""

    degrees: Sequence[int]


@dataclass(frozen=True)
class Subdyadic:
    """runs[j] unary edges followed by one binary branching, for each j;
    after the listed runs the tree continues branching at every level."""

    runs: Sequence[int]


TreeSpec = Union[Explicit, Homogeneous, SphericallySymmetric, Subdyadic]


def _spec_degree_sequence(spec, depth):
    """Per-level forward degrees for levels 0..depth-1, plus the
    continuation below the truncation: (prefix_after_depth, eventual).

    eventual is an int if the degree is eventually constant, or None if
    the tree genuinely ends after the prefix.
    """
    if isinstance(spec, Homogeneous):
        if spec.n < 2:
            raise TreeStructureError("homogeneous order must be >= 2")
        return [spec.n] * depth, (), spec.n
    if isinstance(spec, SphericallySymmetric):
        degs = list(spec.degrees)
        if any(d < 1 for d in degs):
            raise TreeStructureError("forward degrees must be >= 1")
        if depth > len(degs):
            raise TreeStructureError(
                f"depth {depth} exceeds the {len(degs)} listed degrees")
        return degs[:depth], tuple(degs[depth:]), None
    if isinstance(spec, Subdyadic):
        runs = list(spec.runs)
        if any(r < 0 for r in runs):
            raise TreeStructureError("run lengths must be >= 0")
        degs = []
        for r in runs:
            degs.extend([1] * r)
            degs.append(2)
        prefix = tuple(degs[depth:])
        if len(degs) < depth:
            degs.extend([2] * (depth - len(degs)))
        return degs[:depth], prefix, 2
    raise TypeError(f"not a tree spec: {spec!r}")


# ---------------------------------------------------------------------------
# explicit arena


class Tree:
    """Immutable arena of edges with BFS ids.

    parent[i] is -1 for the root edge.  children[i] preserves input
    order, which fixes sibling order everywhere downstream (tilings,
    digit maps).  orig_ids maps this tree's ids back to the tree it was
    cut from, when it was produced by tent() or spanned_subtree().
    """

    def __init__(self, parent, children, tail, labels=None,
                 level_degrees=None, continuation=None, orig_ids=None):
        self.parent = np.asarray(parent, dtype=np.int64)
        self.children = children
        n = len(parent)
        level = np.zeros(n, dtype=np.int64)
        for i in range(1, n):
            level[i] = level[self.parent[i]] + 1
        self.level = level
        self.tail = np.asarray(tail, dtype=bool)
        self.labels = labels
        self.level_degrees = level_degrees
        self.continuation = continuation
        self.orig_ids = orig_ids
        self.spec = None  # generating spec, when built from one
        if n == 0:
            raise TreeStructureError("empty tree")
        if not np.all(np.diff(level) >= 0):
            raise TreeStructureError("edge ids are not in BFS order")
        has_kids = np.array([len(c) > 0 for c in children])
        if np.any(self.tail & has_kids):
            raise TreeStructureError("tail edges must be leaves")
        self._level_starts = None

    # -- basic queries ------------------------------------------------

    @property
    def n_edges(self):
        return len(self.parent)

    @property
    def root(self):
        return 0

    @property
    def depth(self):
        return int(self.level[-1])

    def children_of(self, i):
        return self.children[i]

    def parent_of(self, i):
        p = int(self.parent[i])
        return None if p < 0 else p

    def level_of(self, i):
        return int(self.level[i])

    def is_leaf(self, i):
        return not self.children[i]

    def is_tail(self, i):
        return bool(self.tail[i])

    def is_true_leaf(self, i):
        return not self.children[i] and not self.tail[i]

    def true_leaves(self):
        return [i for i in range(self.n_edges)
                if not self.children[i] and not self.tail[i]]

    def tail_ids(self):
        return np.flatnonzero(self.tail).tolist()

    def level_slice(self, k):
        """Contiguous id range [start, stop) of level k."""
        if self._level_starts is None:
            bounds = np.searchsorted(self.level,
                                     np.arange(self.depth + 2))
            self._level_starts = bounds
        return int(self._level_starts[k]), int(self._level_starts[k + 1])

    def label_of(self, i):
        return self.labels[i] if self.labels is not None else i

    def id_of_label(self, label):
        if self.labels is None:
            return int(label)
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown edge label {label!r}") from None

    # -- construction ---------------------------------------------------

    @classmethod
    def from_adjacency(cls, adjacency, root=None, tails=()):
        """BFS over an adjacency mapping {edge: [children]}."""
        adjacency = dict(adjacency)
        mentioned = set(adjacency)
        as_child = set()
        for kids in adjacency.values():
            if len(set(kids)) != len(kids):
                raise TreeStructureError("duplicate child in adjacency")
            for c in kids:
                if c in as_child:
                    raise TreeStructureError(f"edge {c!r} has two parents")
                as_child.add(c)
                mentioned.add(c)
        roots = [e for e in mentioned if e not in as_child]
        if root is not None:
            if root in as_child:
                raise TreeStructureError(f"declared root {root!r} has a parent")
            roots = [root]
        if len(roots) != 1:
            raise TreeStructureError(
                f"need exactly one root edge, found {sorted(map(repr, roots))}")
        tails = set(tails)
        order = [roots[0]]
        parent = [-1]
        children: list = [[]]
        index = {roots[0]: 0}
        head = 0
        while head < len(order):
            e = order[head]
            for c in adjacency.get(e, ()):
                if c in index:
                    raise TreeStructureError("cycle in adjacency")
                index[c] = len(order)
                parent.append(index[e])
                children[index[e]].append(index[c])
                children.append([])
                order.append(c)
            head += 1
        if len(order) != len(mentioned):
            raise TreeStructureError("adjacency is not connected to the root")
        tail_flags = [lab in tails for lab in order]
        for lab in tails:
            if lab not in index:
                raise TreeStructureError(f"tail {lab!r} is not an edge")
        return cls(parent, children, tail_flags, labels=order)


class SymmetricTree:
    """Compact spherically symmetric truncation: only per-level data.

    Edge ids are still the BFS ids of the explicit arena (they may be
    astronomically large), defined arithmetically: level k occupies
    ids [offset(k), offset(k+1)) in child-after-child order.
    """

    def __init__(self, degrees, truncated, continuation=None):
        self.degrees = tuple(int(d) for d in degrees)
        if any(d < 1 for d in self.degrees):
            raise TreeStructureError("forward degrees must be >= 1")
        self.truncated = bool(truncated)
        self.continuation = continuation
        self.spec = None
        offs = [0, 1]
        card = 1
        for d in self.degrees:
            card *= d
            offs.append(offs[-1] + card)
        self._offsets = offs  # offsets[k] = first id of level k

    @property
    def depth(self):
        return len(self.degrees)

    @property
    def n_edges(self):
        return self._offsets[-1]

    @property
    def root(self):
        return 0

    def level_card(self, k):
        return self._offsets[k + 1] - self._offsets[k]

    def degree_at(self, k):
        return self.degrees[k] if k < len(self.degrees) else 0

    def level_of(self, i):
        if not 0 <= i < self.n_edges:
            raise KeyError(f"edge id {i} out of range")
        return bisect_right(self._offsets, i) - 1

    def parent_of(self, i):
        k = self.level_of(i)
        if k == 0:
            return None
        j = i - self._offsets[k]
        return self._offsets[k - 1] + j // self.degrees[k - 1]

    def children_of(self, i):
        k = self.level_of(i)
        if k >= self.depth:
            return []
        j = i - self._offsets[k]
        base = self._offsets[k + 1] + j * self.degrees[k]
        return list(range(base, base + self.degrees[k]))

    def is_tail(self, i):
        return self.truncated and self.level_of(i) == self.depth

    def is_true_leaf(self, i):
        return not self.truncated and self.level_of(i) == self.depth

    def true_leaves(self):
        # lazy: the deepest level may hold astronomically many ids
        if self.truncated:
            return range(0)
        return range(self._offsets[self.depth], self._offsets[self.depth + 1])

    def tail_ids(self):
        if not self.truncated:
            return range(0)
        return range(self._offsets[self.depth], self._offsets[self.depth + 1])

    def tent_profile(self, k):
        """Degree data of any tent rooted at level k, as a SymmetricTree."""
        return SymmetricTree(self.degrees[k:], self.truncated,
                             continuation=self.continuation)


def build_tree(spec, depth=None, layout="auto", max_edges=None):
    """Realize a tree specification.

    Infinite specs (Homogeneous, Subdyadic, and SphericallySymmetric
    with depth < len(degrees)) require a truncation depth and get tail
    leaves at that level.  SphericallySymmetric without depth builds the
    finite tree, whose deepest edges are true leaves.

    layout: "explicit" forces an arena (raising TreeTooLargeError over
    the budget), "compact" returns a SymmetricTree, "auto" picks
    compact only when the arena would not fit.
    """
    cap = MAX_EXPLICIT_EDGES if max_edges is None else max_edges
    if isinstance(spec, Explicit):
        tree = Tree.from_adjacency(spec.adjacency, root=spec.root)
        tree.spec = spec
        return tree

    if isinstance(spec, SphericallySymmetric) and depth is None:
        degs, prefix, eventual = _spec_degree_sequence(spec, len(spec.degrees))
        truncated = False
        continuation = None
    else:
        if depth is None or depth < 1:
            raise TreeStructureError("infinite specs need depth >= 1")
        degs, prefix, eventual = _spec_degree_sequence(spec, depth)
        truncated = len(prefix) > 0 or eventual is not None
        continuation = (prefix, eventual) if truncated else None

    n_total = 1
    card = 1
    for d in degs:
        card *= d
        n_total += card
        if layout != "compact" and n_total > cap:
            break

    if layout == "compact" or (layout == "auto" and n_total > cap):
        out = SymmetricTree(degs, truncated, continuation=continuation)
        out.spec = spec
        return out
    if n_total > cap:
        raise TreeTooLargeError(
            f"{n_total}+ edges exceed the explicit budget {cap}")

    parent = [-1]
    children: list = [[]]
    frontier = [0]
    for d in degs:
        nxt = []
        for e in frontier:
            for _ in range(d):
                i = len(parent)
                parent.append(e)
                children[e].append(i)
                children.append([])
                nxt.append(i)
        frontier = nxt
    tail = [False] * len(parent)
    if truncated:
        for e in frontier:
            tail[e] = True
    tree = Tree(parent, children, tail,
                level_degrees=degs, continuation=continuation)
    tree.spec = spec
    return tree


# ---------------------------------------------------------------------------
# structural operations


def predecessor_path(tree, x):
    """Edges from the root edge down to x, inclusive."""
    out = []
    i = x
    while i is not None:
        out.append(i)
        i = tree.parent_of(i)
    return out[::-1]


def tent(tree, alpha):
    """The subtree of edges at or below alpha, re-rooted at alpha.

    Levels restart at 0; orig_ids maps back to the host tree.
    """
    if isinstance(tree, SymmetricTree):
        return tree.tent_profile(tree.level_of(alpha))
    order = [alpha]
    parent = [-1]
    children: list = [[]]
    index = {alpha: 0}
    head = 0
    while head < len(order):
        e = order[head]
        for c in tree.children_of(e):
            index[c] = len(order)
            parent.append(index[e])
            children[index[e]].append(index[c])
            children.append([])
            order.append(c)
        head += 1
    tail = [tree.is_tail(e) for e in order]
    labels = None
    if tree.labels is not None:
        labels = [tree.labels[e] for e in order]
    return Tree(parent, children, tail, labels=labels, orig_ids=order)


def spanned_subtree(tree, boundary_set):
    """Union of the predecessor paths of the given true leaves.

    The result is a finite tree (no tails can occur on the paths);
    orig_ids maps back to the host tree.  Sibling order is inherited.
    """
    E = sorted(set(boundary_set))
    if not E:
        raise ValueError("empty boundary set spans nothing")
    keep = set()
    for z in E:
        if not tree.is_true_leaf(z):
            raise ValueError(f"edge {z} is not a true leaf")
        keep.update(predecessor_path(tree, z))
    order = [0]
    parent = [-1]
    children: list = [[]]
    index = {0: 0}
    head = 0
    while head < len(order):
        e = order[head]
        for c in tree.children_of(e):
            if c in keep:
                index[c] = len(order)
                parent.append(index[e])
                children[index[e]].append(index[c])
                children.append([])
                order.append(c)
        head += 1
    tail = [False] * len(order)
    labels = None
    if tree.labels is not None:
        labels = [tree.labels[e] for e in order]
    return Tree(parent, children, tail, labels=labels, orig_ids=order)


def confluent(tree, zeta, eta):
    """Deepest common edge of two edges (or boundary points, read as
    their leaf edges).  Returns (edge id, level of its end vertex)."""
    pa = predecessor_path(tree, zeta)
    pb = predecessor_path(tree, eta)
    meet = 0
    for a, b in zip(pa, pb):
        if a != b:
            break
        meet = a
    return meet, tree.level_of(meet) + 1


@dataclass
class AdditivityReport:
    ok: bool
    max_violation: float
    worst_edge: int | None


def is_forward_additive(tree, f, tol=1e-12):
    """Check f(alpha) = sum of f over children at every non-leaf edge."""
    f = np.asarray(f, dtype=float)
    worst = 0.0
    worst_edge = None
    for i in range(tree.n_edges):
        kids = tree.children_of(i)
        if not kids:
            continue
        r = abs(f[i] - sum(f[k] for k in kids))
        if r > worst:
            worst, worst_edge = r, i
    return AdditivityReport(worst <= tol, worst, worst_edge)


# ---------------------------------------------------------------------------
# boundary measures


class BoundaryMeasure:
    """Finite measure on the boundary, stored as its co-potential M."""

    def __init__(self, tree, co_potential, validate=True, tol=1e-9):
        self.tree = tree
        self.M = np.asarray(co_potential, dtype=float)
        if validate:
            if self.M.shape != (tree.n_edges,):
                raise ValueError("co-potential must cover every edge")
            if np.any(self.M < -tol):
                raise ValueError("negative mass")
            scale = max(float(self.M[0]), 1.0)
            rep = is_forward_additive(tree, self.M, tol * scale)
            if not rep.ok:
                raise ValueError(
                    f"not forward additive: violation {rep.max_violation:.3e}"
                    f" at edge {rep.worst_edge}")

    @classmethod
    def from_leaf_masses(cls, tree, masses):
        """Additivize leaf masses upward into a co-potential."""
        M = np.zeros(tree.n_edges)
        for leaf, m in masses.items():
            if tree.children_of(leaf):
                raise ValueError(f"edge {leaf} is not a leaf")
            if m < 0:
                raise ValueError("negative mass")
            M[leaf] = m
        for i in range(tree.n_edges - 1, 0, -1):
            M[tree.parent_of(i)] += M[i]
        return cls(tree, M, validate=False)

    @property
    def total_mass(self):
        return float(self.M[0])

    def leaf_masses(self):
        return {i: float(self.M[i]) for i in range(self.tree.n_edges)
                if not self.tree.children_of(i) and self.M[i] != 0.0}

    def support_leaves(self, tol=0.0):
        return frozenset(i for i in range(self.tree.n_edges)
                         if not self.tree.children_of(i)
                         and self.M[i] > tol)


# ---------------------------------------------------------------------------
# JSON interchange


def spec_to_json(spec):
    if isinstance(spec, Homogeneous):
        return {"variant": "homogeneous", "n": spec.n}
    if isinstance(spec, SphericallySymmetric):
        return {"variant": "symmetric", "degrees": list(spec.degrees)}
    if isinstance(spec, Subdyadic):
        return {"variant": "subdyadic", "runs": list(spec.runs)}
    raise TypeError(f"cannot serialize {spec!r}")


def spec_from_json(obj):
    v = obj.get("variant")
    if v == "homogeneous":
        return Homogeneous(int(obj["n"]))
    if v == "symmetric":
        return SphericallySymmetric([int(d) for d in obj["degrees"]])
    if v == "subdyadic":
        return Subdyadic([int(r) for r in obj["runs"]])
    raise ValueError(f"unknown spec variant {v!r}")


def tree_to_json(tree):
    # spec-built trees round-trip through their generating spec so the
    # continuation behind a truncation survives serialization
    spec = getattr(tree, "spec", None)
    if spec is not None and not isinstance(spec, Explicit):
        out = {"spec": spec_to_json(spec)}
        truncated = (tree.truncated if isinstance(tree, SymmetricTree)
                     else tree.continuation is not None)
        if truncated:
            out["depth"] = tree.depth
        return out
    if isinstance(tree, SymmetricTree):
        return {"spec": {"variant": "symmetric",
                         "degrees": list(tree.degrees)}}
    edges = []
    for i in range(tree.n_edges):
        rec = {"id": tree.label_of(i),
               "children": [tree.label_of(c) for c in tree.children_of(i)]}
        if tree.is_tail(i):
            rec["tail"] = True
        edges.append(rec)
    return {"root": tree.label_of(0), "edges": edges}


def tree_from_json(obj, depth=None, layout="auto"):
    if "spec" in obj:
        return build_tree(spec_from_json(obj["spec"]),
                          depth=depth if depth is not None else obj.get("depth"),
                          layout=layout)
    adjacency = {rec["id"]: rec.get("children", []) for rec in obj["edges"]}
    tails = [rec["id"] for rec in obj["edges"] if rec.get("tail")]
    tree = Tree.from_adjacency(adjacency, root=obj.get("root"))
    if tails:
        tree = Tree(tree.parent, tree.children,
                    [lab in set(tails) for lab in tree.labels],
                    labels=tree.labels)
    return tree


def load_tree(path, depth=None):
    with open(path) as fh:
        return tree_from_json(json.load(fh), depth=depth)


def edge_function_from_mapping(tree, mapping):
    """Mapping {edge label: value} to an array; absent edges read 0."""
    f = np.zeros(tree.n_edges)
    for lab, v in mapping.items():
        f[tree.id_of_label(lab)] = float(v)
    return f


def edge_function_to_mapping(tree, f, keep_zero=False):
    out = {}
    for i in range(tree.n_edges):
        v = float(f[i])
        if v != 0.0 or keep_zero:
            out[str(tree.label_of(i))] = v
    return out
