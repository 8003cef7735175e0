"""The l1 master linear program over (sample, rival-label) rows.

    min sum(w)  s.t.  A w >= 1,  w >= 0

with A[(x, y), t] = scores_t(x)[y_orig] - scores_t(x)[y]. The solver runs
the textbook primal simplex on the dual

    max sum(mu)  s.t.  A^T mu <= 1,  mu >= 0

which is always feasible at mu = 0, so no phase-one is needed. Primal
weights are recovered from the optimal tableau; an unbounded dual means
the primal row system is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import Sample, Tree, tree_scores
from .errors import InternalConsistencyError, SolverLimitError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
DUALITY_TOL = 1e-7
MAX_PIVOTS = 20000
DEGENERACY_STREAK = 25

# one record per solve across the process: (primal_obj, dual_obj, max_row_violation)
SOLVE_LOG: list[tuple[float, float, float]] = []


class InfeasibleError(InternalConsistencyError):
    """The master row system has no nonnegative solution."""


def _simplex_dual_form(G: np.ndarray, max_pivots: int = MAX_PIVOTS):
    """max 1'mu s.t. G mu <= 1, mu >= 0; G is (k constraints) x (m vars).

    Returns (mu, constraint_duals, objective). Raises InfeasibleError when
    the problem is unbounded (i.e. the primal master is infeasible).
    """
    k, m = G.shape
    if m == 0:
        return np.zeros(0), np.zeros(k), 0.0
    if k == 0:
        raise InfeasibleError("no columns: dual is unbounded, master infeasible")
    # tableau rows: k constraints; columns: m vars + k slacks + rhs
    T = np.zeros((k + 1, m + k + 1))
    T[:k, :m] = G
    T[:k, m:m + k] = np.eye(k)
    T[:k, -1] = 1.0
    T[-1, :m] = -1.0  # maximize sum(mu): reduced costs start at -1
    basis = list(range(m, m + k))

    use_bland = False
    degenerate_streak = 0
    last_obj = 0.0
    for pivot in range(max_pivots):
        z = T[-1, :-1]
        if use_bland:
            candidates = np.flatnonzero(z < -PIVOT_TOL)
            if len(candidates) == 0:
                break
            enter = int(candidates[0])
        else:
            enter = int(np.argmin(z))
            if z[enter] >= -PIVOT_TOL:
                break
        col = T[:k, enter]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if len(rows) == 0:
            raise InfeasibleError(
                "dual objective unbounded: master row system infeasible"
            )
        ratios = T[rows, -1] / col[rows]
        best = np.min(ratios)
        tied = rows[np.flatnonzero(ratios <= best + PIVOT_TOL)]
        # lowest basis index on ties supports Bland's anti-cycling rule
        leave = int(tied[np.argmin([basis[r] for r in tied])])
        piv = T[leave, enter]
        T[leave] /= piv
        for r in range(k + 1):
            if r != leave and abs(T[r, enter]) > 0:
                T[r] -= T[r, enter] * T[leave]
        basis[leave] = enter
        obj = T[-1, -1]
        if obj <= last_obj + PIVOT_TOL:
            degenerate_streak += 1
            if degenerate_streak >= DEGENERACY_STREAK:
                use_bland = True
        else:
            degenerate_streak = 0
        last_obj = obj
    else:
        raise SolverLimitError(f"simplex exceeded {max_pivots} pivots")

    mu = np.zeros(m)
    for r, b in enumerate(basis):
        if b < m:
            mu[b] = T[r, -1]
    duals = T[-1, m:m + k].copy()  # primal weights of the master
    return np.maximum(mu, 0.0), np.maximum(duals, 0.0), float(T[-1, -1])


@dataclass
class MasterState:
    samples: list[Sample] = field(default_factory=list)
    y_orig: list[int] = field(default_factory=list)
    rows: list[tuple[int, int]] = field(default_factory=list)  # (sample_idx, rival)
    columns: list[Tree] = field(default_factory=list)
    column_generated: list[bool] = field(default_factory=list)
    label_count: int = 2
    A: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = 0.0
    degenerate: bool = False
    solve_count: int = 0

    def n_rows(self) -> int:
        return len(self.rows)

    def n_cols(self) -> int:
        return len(self.columns)

    def _entry(self, row: tuple[int, int], tree: Tree) -> float:
        sample_idx, rival = row
        scores = tree_scores(tree, self.samples[sample_idx])
        return float(scores[self.y_orig[sample_idx]] - scores[rival])

    def add_column(self, tree: Tree, generated: bool = True) -> None:
        new_col = np.array([[self._entry(r, tree)] for r in self.rows])
        if self.A.size == 0:
            self.A = new_col.reshape(len(self.rows), 1) if self.rows else \
                np.zeros((0, self.n_cols() + 1))
        else:
            self.A = np.hstack([self.A, new_col])
        self.columns.append(tree)
        self.column_generated.append(generated)

    def add_sample(self, sample: Sample, y_o: int) -> None:
        """Register a sample and one row per rival label."""
        self.samples.append(sample)
        self.y_orig.append(y_o)
        idx = len(self.samples) - 1
        for rival in range(self.label_count):
            if rival != y_o:
                self.add_row(idx, rival)

    def add_row(self, sample_idx: int, rival: int) -> None:
        if rival == self.y_orig[sample_idx]:
            raise ValueError("rival label must differ from the original vote")
        row = (sample_idx, rival)
        entries = np.array([self._entry(row, t) for t in self.columns])
        self.rows.append(row)
        if self.A.size == 0:
            self.A = entries.reshape(1, -1)
        else:
            self.A = np.vstack([self.A, entries])

    def solve(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Optimal (w, mu, objective); raises InfeasibleError when no w exists."""
        self.solve_count += 1
        if not self.rows:
            self.weights = np.zeros(self.n_cols())
            self.mu = np.zeros(0)
            self.objective = 0.0
            self.degenerate = True
            SOLVE_LOG.append((0.0, 0.0, 0.0))
            return self.weights, self.mu, self.objective
        mu, w, dual_obj = _simplex_dual_form(self.A.T)
        primal_obj = float(np.sum(w))
        residual = float(np.max(1.0 - self.A @ w)) if len(w) else 1.0
        SOLVE_LOG.append((primal_obj, dual_obj, max(0.0, residual)))
        if abs(primal_obj - dual_obj) > DUALITY_TOL * (1.0 + abs(primal_obj)):
            raise InternalConsistencyError(
                f"strong duality violated: primal {primal_obj} vs dual {dual_obj}"
            )
        if residual > FEAS_TOL:
            raise InternalConsistencyError(
                f"returned weights violate a row by {residual}"
            )
        self.weights = w
        self.mu = mu
        self.objective = primal_obj
        self.degenerate = False
        return w, mu, primal_obj

    def feasible(self) -> bool:
        """Whether the current row system admits any nonnegative solution."""
        try:
            self.solve()
            return True
        except InfeasibleError:
            return False

    def duals_by_row(self) -> dict[tuple[int, int], float]:
        return {row: float(self.mu[i]) for i, row in enumerate(self.rows)}

    def support(self, tol: float = FEAS_TOL) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w > tol]

    def dump_lp(self) -> str:
        """Industry-standard LP text format of the current master (debug aid)."""
        lines = ["Minimize", " obj: " + " + ".join(f"w{i}" for i in range(self.n_cols())),
                 "Subject To"]
        for r, (s, y) in enumerate(self.rows):
            terms = " + ".join(
                f"{self.A[r, c]:+.12g} w{c}" for c in range(self.n_cols())
            )
            lines.append(f" r{r}_s{s}_y{y}: {terms} >= 1")
        lines.append("End")
        return "\n".join(lines)


def build(candidates: list[Tree], samples: list[Sample], y_orig: list[int],
          label_count: int, generated: list[bool] | None = None) -> MasterState:
    """One row per (sample, rival label), one column per candidate learner."""
    state = MasterState()
    state.label_count = label_count
    state.samples = list(samples)
    state.y_orig = list(y_orig)
    state.columns = list(candidates)
    state.column_generated = list(generated) if generated is not None \
        else [False] * len(candidates)
    rows = []
    for idx, y_o in enumerate(state.y_orig):
        for rival in range(label_count):
            if rival != y_o:
                rows.append((idx, rival))
    state.rows = rows
    if rows and candidates:
        state.A = np.array([[state._entry(r, t) for t in candidates] for r in rows])
    else:
        state.A = np.zeros((len(rows), len(candidates)))
    return state
