"""Independent variational solver for boundary capacities.

Solves the defining minimization directly:

    minimize  sum_a f(a)^p   over f >= 0
    subject to  sum over the predecessor path of each chosen leaf >= 1

and certifies the value from both sides: any feasible f gives an upper
bound, and any nonnegative leaf weighting w gives the lower bound
(sum w)^p / energy(w)^(p/p'), tight exactly at the equilibrium weights.
This module deliberately shares no computation with the recursion in
capacity.py; agreement between the two is a real consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potential import as_exponent
from .trees import predecessor_path


class OracleConvergenceError(RuntimeError):
    def __init__(self, message, best=None, lower_bound=None):
        super().__init__(message)
        self.best = best
        self.lower_bound = lower_bound


@dataclass
class OracleResult:
    value: float            # feasible objective, an upper bound
    lower_bound: float      # dual certificate from the candidate measure
    f: np.ndarray           # the admissible function attaining value
    iterations: int
    converged: bool
    method: str

    @property
    def gap(self):
        return self.value - self.lower_bound


def _constraint_matrix(tree, boundary_set):
    if len(boundary_set) > 200_000:
        raise ValueError("too many boundary points for the dense oracle")
    E = sorted(set(boundary_set))
    if not E:
        raise ValueError("empty boundary set")
    paths = []
    for z in E:
        if not tree.is_true_leaf(z):
            raise ValueError(f"edge {z} is not a true leaf")
        paths.append(predecessor_path(tree, z))
    n = tree.n_edges
    if len(paths) * n > 50_000_000:
        raise ValueError("problem too large for the dense oracle")
    A = np.zeros((len(paths), n))
    for r, pth in enumerate(paths):
        A[r, pth] = 1.0
    return E, paths, A


def _feasible_correction(f, A, paths):
    """Clip to f >= 0 and push each unmet path constraint up by an equal
    share along its path.  Corrections only add mass, so earlier
    constraints stay satisfied and the output is always admissible."""
    f = np.maximum(f, 0.0)
    slack = A @ f - 1.0
    for r in np.argsort(slack):
        pth = paths[r]
        d = 1.0 - f[pth].sum()
        if d > 0.0:
            f[pth] += d / len(pth)
    return f


def _warm_start(n, paths):
    f = np.zeros(n)
    for pth in paths:
        np.maximum.at(f, pth, 1.0 / len(pth))
    return f


def _dual_bound(f, A, paths, leaf_rows, p):
    """Lower bound from the candidate measure with leaf weights
    f(leaf edge)^(p-1); exact at the optimum."""
    pe = as_exponent(p)
    w = np.abs(f[leaf_rows]) ** (pe.p - 1.0)
    total = w.sum()
    if total <= 0.0:
        return 0.0
    M = A.T @ w
    en = float(np.sum(M ** pe.conjugate))
    if en <= 0.0:
        return 0.0
    return float((total / en ** (1.0 / pe.conjugate)) ** pe.p)


def _solve_kkt_p2(A):
    """p = 2: the optimum solves the linear system G lam = 1 on the
    active leaf constraints, with f = A^T lam.  All constraints are
    active for leaf sets (each equilibrium mass is positive), but drop
    any constraint whose multiplier goes negative, for safety."""
    active = list(range(A.shape[0]))
    for _ in range(A.shape[0] + 1):
        Aa = A[active]
        G = Aa @ Aa.T
        try:
            lam = np.linalg.solve(G, np.ones(len(active)))
        except np.linalg.LinAlgError:
            lam, *_ = np.linalg.lstsq(G, np.ones(len(active)), rcond=None)
        if np.all(lam >= -1e-12):
            f = Aa.T @ np.maximum(lam, 0.0)
            return f
        worst = int(np.argmin(lam))
        del active[worst]
        if not active:
            break
    raise OracleConvergenceError("active-set elimination emptied the system")


def _solve_slsqp(A, paths, p, tol):
    from scipy.optimize import minimize

    n = A.shape[1]
    f0 = _feasible_correction(_warm_start(n, paths), A, paths)

    def fun(x):
        return float(np.sum(np.abs(x) ** p))

    def jac(x):
        return p * np.sign(x) * np.abs(x) ** (p - 1.0)

    res = minimize(
        fun, f0, jac=jac,
        bounds=[(0.0, None)] * n,
        constraints=[{"type": "ineq",
                      "fun": lambda x: A @ x - 1.0,
                      "jac": lambda x: A}],
        method="SLSQP",
        options={"maxiter": 500, "ftol": min(tol, 1e-10)},
    )
    return res.x, int(res.nit), bool(res.success)


def _solve_subgradient(A, paths, p, tol, max_iter, eta0, leaf_rows):
    """Projected subgradient with step eta0/sqrt(t) and per-leaf path
    correction; stops when the best value stalls or the certified gap
    closes."""
    n = A.shape[1]
    f = _feasible_correction(_warm_start(n, paths), A, paths)
    best = float(np.sum(f ** p))
    best_f = f.copy()
    lower = _dual_bound(f, A, paths, leaf_rows, p)
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        grad = p * f ** (p - 1.0)
        f = _feasible_correction(f - (eta0 / np.sqrt(it)) * grad, A, paths)
        val = float(np.sum(f ** p))
        if val < best - tol * max(best, 1e-12):
            stall = 0
        else:
            stall += 1
        if val < best:
            best, best_f = val, f.copy()
        if it % 20 == 0:
            lower = max(lower, _dual_bound(best_f, A, paths, leaf_rows, p))
            if best - lower <= tol * max(lower, 1e-12):
                return best_f, it, True
        if stall >= 200:
            return best_f, it, True
    return best_f, it, False


def oracle_capacity(tree, boundary_set, p, tol=1e-6, max_iter=50_000,
                    method="auto", eta0=0.1):
    """Capacity of a set of true leaves by direct convex minimization.

    method: "auto" solves the p = 2 case exactly through its KKT
    system and other exponents with a constrained quasi-Newton solve;
    "subgradient" forces the first-order scheme.  The returned value is
    the objective of an admissible f (so a true upper bound) and
    lower_bound is the dual certificate from the candidate measure.
    """
    pe = as_exponent(p)
    E, paths, A = _constraint_matrix(tree, boundary_set)
    leaf_rows = np.array([pth[-1] for pth in paths])

    if method == "auto" and pe.p == 2.0:
        f = _solve_kkt_p2(A)
        it, ok = 0, True
        used = "kkt"
    elif method == "auto":
        f, it, ok = _solve_slsqp(A, paths, pe.p, tol)
        used = "slsqp"
    elif method == "subgradient":
        f, it, ok = _solve_subgradient(A, paths, pe.p, tol, max_iter,
                                       eta0, leaf_rows)
        used = "subgradient"
    else:
        raise ValueError(f"unknown method {method!r}")

    f = _feasible_correction(f, A, paths)
    value = float(np.sum(f ** pe.p))
    lower = _dual_bound(f, A, paths, leaf_rows, pe.p)
    gap_ok = value - lower <= max(tol, 1e-6) * max(lower, 1e-12)
    if not ok and not gap_ok:
        raise OracleConvergenceError(
            f"no convergence within {max_iter} iterations "
            f"(best {value}, certified lower bound {lower})",
            best=value, lower_bound=lower)
    return OracleResult(value=value, lower_bound=lower, f=f,
                        iterations=it, converged=ok or gap_ok, method=used)
