"""Seeded random instances shared by the test modules."""

import numpy as np

from treecap import BoundaryMeasure, Tree


def random_tree(rng, max_edges=100, leaf_chance=0.3, max_kids=3,
                branching_only=False):
    """Level-by-level random tree; ids come out in BFS order.

    branching_only forces every internal edge to have >= 2 children."""
    parent = [-1]
    children = [[]]
    frontier = [0]
    while frontier:
        nxt = []
        for e in frontier:
            room = max_edges - len(parent)
            if room <= 0:
                break
            if branching_only:
                k = int(rng.integers(2, max_kids + 1))
                if k > room:
                    k = 0
            else:
                if len(parent) > 1 and rng.random() < leaf_chance:
                    k = 0
                else:
                    k = min(int(rng.integers(1, max_kids + 1)), room)
            for _ in range(k):
                i = len(parent)
                parent.append(e)
                children[e].append(i)
                children.append([])
                nxt.append(i)
        frontier = nxt
    if len(parent) == 1:  # keep at least one boundary point below the root
        parent.append(0)
        children[0].append(1)
        children.append([])
    return Tree(parent, children, [False] * len(parent))


def random_leaf_measure(rng, tree, lo=0.1, hi=1.0):
    masses = {z: float(rng.uniform(lo, hi)) for z in tree.true_leaves()}
    return BoundaryMeasure.from_leaf_masses(tree, masses)


def random_p(rng, lo=1.2, hi=4.0):
    return float(rng.uniform(lo, hi))
