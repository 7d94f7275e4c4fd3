"""Exact reference optimum for diagonal instances, which are linear programs.

The dual LP ``min b.y s.t. D y >= c, y >= 0`` (``D[k, j] = (A_j)_kk``) is
solved by enumerating basic solutions when the number of candidate bases is
small, and by the HiGHS simplex otherwise.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import PreconditionError

ENUMERATION_LIMIT = 50_000
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class ReferenceSolution:
    status: str                 # "optimal", "unbounded" or "infeasible"
    opt: float
    y: np.ndarray
    method: str

    @property
    def norm1(self):
        return float(np.sum(self.y)) if self.y is not None else math.nan


def lp_data(instance):
    if not instance.is_diagonal:
        raise PreconditionError("reference solver needs a diagonal instance")
    return instance.diag_A.T.copy(), instance.diag_C.copy(), np.asarray(instance.b, dtype=float)


def enumerate_vertices(D, c, b):
    """Minimize ``b.y`` over ``{D y >= c, y >= 0}`` by visiting every basis.

    Returns ``(opt, y)`` or ``(inf, None)`` when no basic feasible point exists.
    Only valid when the LP is bounded below.
    """
    n, m = D.shape
    G = np.vstack([D, np.eye(m)])
    h = np.concatenate([c, np.zeros(m)])
    best, best_y = math.inf, None
    for rows in itertools.combinations(range(n + m), m):
        Gs = G[list(rows)]
        if abs(np.linalg.det(Gs)) < 1e-12:
            continue
        y = np.linalg.solve(Gs, h[list(rows)])
        if np.all(G @ y >= h - FEAS_TOL):
            val = float(b @ y)
            if val < best - 1e-12:
                best, best_y = val, y
    return best, best_y


def _highs(D, c, b):
    res = linprog(b, A_ub=-D, b_ub=-c, bounds=[(0, None)] * b.size, method="highs")
    if res.status == 3:
        return "unbounded", -math.inf, None
    if res.status == 2:
        return "infeasible", math.inf, None
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return "optimal", float(res.fun), np.maximum(res.x, 0.0)


def reference_solve_diagonal(instance, delta=None, *, method="auto"):
    """Optimal dual value and vector of a diagonal instance.

    ``delta`` is accepted for interface symmetry; the answer is exact up to
    floating point. ``method`` is ``"enumerate"``, ``"highs"`` or ``"auto"``.
    """
    D, c, b = lp_data(instance)
    n, m = D.shape
    bases = math.comb(n + m, m)
    if method == "auto":
        method = "enumerate" if bases <= ENUMERATION_LIMIT else "highs"
    if method == "enumerate" and np.any(b < 0):
        # basic solutions cannot see an unbounded direction, so rule it out first
        status, _, _ = _highs(D, c, b)
        if status == "unbounded":
            return ReferenceSolution("unbounded", -math.inf, None, method)
    if method == "enumerate":
        opt, y = enumerate_vertices(D, c, b)
        if y is None:
            return ReferenceSolution("infeasible", math.inf, None, method)
        return ReferenceSolution("optimal", opt, np.maximum(y, 0.0), method)
    if method == "highs":
        status, opt, y = _highs(D, c, b)
        return ReferenceSolution(status, opt, y, method)
    raise ValueError(f"unknown method {method!r}")
