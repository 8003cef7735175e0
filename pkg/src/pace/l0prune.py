"""Minimum-cardinality reweighting via branch-and-bound on LP feasibility.

Nodes partition the candidate learners into forced-in / forced-out / free
sets and solve the l1 LP over the non-excluded columns; infeasibility
prunes the subtree, and |forced_in| lower-bounds every support below the
node. No big-M constants are involved, so the scale invariance of the
weight vector never threatens soundness.
"""

from __future__ import annotations

import numpy as np

from .errors import InternalConsistencyError
from .master import InfeasibleError, _simplex_dual_form

SUPPORT_TOL = 1e-8


def _solve_subset(A: np.ndarray, cols: list[int]):
    """l1-minimal nonnegative w over the given columns, or None if infeasible."""
    if A.shape[0] == 0:
        return np.zeros(len(cols)), 0.0
    if not cols:
        return None
    try:
        _, w, obj = _simplex_dual_form(A[:, cols].T)
    except InfeasibleError:
        return None
    return w, obj


def solve_l0(A: np.ndarray, tol: float = SUPPORT_TOL
             ) -> tuple[list[int], np.ndarray]:
    """Smallest support S with A[:, S] w >= 1 feasible, plus l1-minimal
    weights on S (full-length vector, zero off the support)."""
    n_rows, n_cols = A.shape
    full = np.zeros(n_cols)
    if n_rows == 0:
        return [], full
    root = _solve_subset(A, list(range(n_cols)))
    if root is None:
        raise InternalConsistencyError(
            "l0 root infeasible: the driver must guarantee a feasible row system"
        )
    w_l1, _ = root
    incumbent = [i for i in range(n_cols) if w_l1[i] > tol]
    incumbent_w = w_l1.copy()

    def descend(forced_in: list[int], forced_out: set[int]):
        nonlocal incumbent, incumbent_w
        if len(forced_in) >= len(incumbent):
            return
        allowed = [i for i in range(n_cols) if i not in forced_out]
        solved = _solve_subset(A, allowed)
        if solved is None:
            return
        w_sub, _ = solved
        w = np.zeros(n_cols)
        w[allowed] = w_sub
        support = [i for i in allowed if w[i] > tol]
        if len(support) < len(incumbent):
            incumbent = support
            incumbent_w = w
        free = [i for i in allowed if i not in forced_in]
        candidates = [i for i in free if w[i] > tol]
        if not candidates:
            # LP support fits inside forced_in: subtree optimum already found
            return
        branch = max(candidates, key=lambda i: w[i])
        descend(forced_in + [branch], forced_out)
        descend(forced_in, forced_out | {branch})

    descend([], set())

    final = _solve_subset(A, incumbent)
    weights = np.zeros(n_cols)
    if final is not None and incumbent:
        weights[incumbent] = final[0]
    elif incumbent:
        raise InternalConsistencyError("incumbent support became infeasible")
    return sorted(incumbent), weights


def verify_support(support: list[int], weights: np.ndarray, A: np.ndarray,
                   tol: float = SUPPORT_TOL) -> bool:
    """Post-hoc certificate: every row satisfied using support weights only."""
    if A.shape[0] == 0:
        return True
    masked = np.zeros(A.shape[1])
    for i in support:
        masked[i] = weights[i]
    return bool(np.all(A @ masked >= 1.0 - tol))
