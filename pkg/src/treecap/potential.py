"""Potentials, energies and the p-Laplacian on a rooted tree.

Vertices are addressed through edges: the vertex written x(alpha) here
is always the end vertex of edge alpha, and the root vertex (begin of
the root edge) is addressed separately.  A vertex function therefore
stores one value per edge plus the value at the root vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PExponent:
    """An exponent p in (1, oo) together with its conjugate p'."""

    p: float

    def __post_init__(self):
        if not (self.p > 1.0 and np.isfinite(self.p)):
            raise ValueError(f"p must lie in (1, oo), got {self.p}")

    @property
    def conjugate(self):
        return self.p / (self.p - 1.0)


def as_exponent(p):
    return p if isinstance(p, PExponent) else PExponent(float(p))


def signed_power(f, p):
    """The signed power f_p(a) = sgn(f(a)) |f(a)|^(p'-1).

    For p = 2 this is the identity; applying the conjugate exponent
    inverts it: (f_p)_{p'} = f.
    """
    q = as_exponent(p).conjugate - 1.0
    f = np.asarray(f, dtype=float)
    return np.sign(f) * np.abs(f) ** q


@dataclass
class VertexFunction:
    """Values at the end vertex of every edge, plus the root vertex."""

    end_values: np.ndarray
    at_root: float = 0.0

    def at_end(self, alpha):
        return float(self.end_values[alpha])

    def at_begin(self, tree, alpha):
        p = tree.parent_of(alpha)
        return self.at_root if p is None else float(self.end_values[p])


def potential_all(tree, f):
    """The potential If as a VertexFunction: If(x) sums f over the
    predecessor edges of x, and If(root vertex) = 0."""
    f = np.asarray(f, dtype=float)
    out = f.copy()
    for i in range(1, tree.n_edges):
        out[i] += out[tree.parent_of(i)]
    return VertexFunction(out, 0.0)


def potential(tree, f, x=None):
    """If at the end vertex of edge x; x=None addresses the root vertex."""
    if x is None:
        return 0.0
    f = np.asarray(f, dtype=float)
    total = 0.0
    i = x
    while i is not None:
        total += float(f[i])
        i = tree.parent_of(i)
    return total


def energy_all(tree, M, p):
    """Tent energies: at each edge a, the sum of M(b)^(p') over b >= a."""
    pc = as_exponent(p).conjugate
    M = np.asarray(M, dtype=float)
    e = np.abs(M) ** pc
    for i in range(tree.n_edges - 1, 0, -1):
        e[tree.parent_of(i)] += e[i]
    return e


def energy(tree, mu, p, alpha=None):
    """p-energy of a measure over the tent at alpha (whole tree if None)."""
    M = mu.M if hasattr(mu, "M") else mu
    e = energy_all(tree, M, p)
    return float(e[0 if alpha is None else alpha])


def p_laplacian(tree, g, x, p):
    """sum over neighbors y of x of sgn(g(y)-g(x)) |g(y)-g(x)|^(p-1),
    evaluated at the end vertex of edge x.

    The root vertex is excluded by construction (pass an edge id).  The
    end vertex of a tail edge has unexplored neighbors, so it is an
    error; every other vertex has all neighbor values stored.
    """
    if tree.is_tail(x):
        raise ValueError(f"edge {x} is a tail: the neighborhood of its "
                         "end vertex is not stored")
    pe = as_exponent(p)
    gx = g.at_end(x)
    diffs = [g.at_begin(tree, x) - gx]
    diffs.extend(g.at_end(c) - gx for c in tree.children_of(x))
    d = np.asarray(diffs)
    return float(np.sum(np.sign(d) * np.abs(d) ** (pe.p - 1.0)))


@dataclass
class HarmonicityReport:
    ok: bool
    max_abs: float
    worst_edge: int | None
    violations: dict


def is_p_harmonic(tree, g, p, tol=1e-9):
    """Check that the p-Laplacian vanishes at the end vertex of every
    non-leaf, non-tail edge.  Leaf end vertices are boundary points and
    are not constrained."""
    worst = 0.0
    worst_edge = None
    violations = {}
    for i in range(tree.n_edges):
        if not tree.children_of(i) or tree.is_tail(i):
            continue
        v = p_laplacian(tree, g, i, p)
        if abs(v) > tol:
            violations[i] = v
        if abs(v) > worst:
            worst, worst_edge = abs(v), i
    return HarmonicityReport(worst <= tol, worst, worst_edge, violations)
