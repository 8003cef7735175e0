import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from pace.errors import InternalConsistencyError
from pace.l0prune import solve_l0, verify_support
from pace.master import _simplex_dual_form


def subset_feasible(A, cols):
    """Independent feasibility check for {A[:, cols] w >= 1, w >= 0}."""
    if A.shape[0] == 0:
        return True
    if not cols:
        return False
    res = linprog(np.zeros(len(cols)), A_ub=-A[:, cols],
                  b_ub=-np.ones(A.shape[0]), method="highs")
    return res.status == 0


def brute_min_support(A):
    n = A.shape[1]
    for size in range(n + 1):
        for cols in itertools.combinations(range(n), size):
            if subset_feasible(A, list(cols)):
                return size
    return None


class TestSolveL0:
    def test_identical_columns_support_one(self):
        A = np.array([[2.0, 2.0, 2.0], [1.5, 1.5, 1.5]])
        support, weights = solve_l0(A)
        assert len(support) == 1
        assert verify_support(support, weights, A)

    def test_pair_needed(self):
        # no single column covers both rows, the first two together do
        A = np.array([[2.0, -1.0, 1.0], [-1.0, 2.0, -1.0]])
        support, weights = solve_l0(A)
        assert len(support) == 2
        assert brute_min_support(A) == 2
        assert verify_support(support, weights, A)

    def test_empty_rows(self):
        A = np.zeros((0, 4))
        support, weights = solve_l0(A)
        assert support == []
        assert np.all(weights == 0)

    def test_infeasible_root_raises(self):
        A = np.array([[-1.0, -2.0]])
        with pytest.raises(InternalConsistencyError):
            solve_l0(A)


class TestVerifySupport:
    def test_solver_output_verifies(self):
        A = np.array([[1.0, 0.2], [0.3, 1.0]])
        support, weights = solve_l0(A)
        assert verify_support(support, weights, A)

    def test_dropping_a_needed_column_fails(self):
        A = np.array([[2.0, -1.0], [-1.0, 2.0]])
        support, weights = solve_l0(A)
        assert len(support) == 2
        assert not verify_support(support[:1], weights, A)

    def test_empty_rows_vacuous(self):
        assert verify_support([0], np.array([1.0, 0.0]), np.zeros((0, 2)))


class TestProperties:
    def _random_instance(self, rng, max_cols=8):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(2, max_cols + 1))
        A = rng.uniform(-1, 2, size=(m, n))
        A[:, 0] = rng.uniform(0.3, 2, size=m)  # guarantee feasibility
        return A

    def test_matches_brute_force(self, rng):
        for _ in range(40):
            A = self._random_instance(rng)
            support, weights = solve_l0(A)
            assert len(support) == brute_min_support(A)
            assert verify_support(support, weights, A)

    def test_upper_bounded_by_l1_support(self, rng):
        for _ in range(30):
            A = self._random_instance(rng)
            _, w_l1, _ = _simplex_dual_form(A.T)
            l1_size = int(np.sum(w_l1 > 1e-8))
            support, _ = solve_l0(A)
            assert len(support) <= l1_size

    def test_row_removal_never_grows_support(self, rng):
        for _ in range(20):
            A = self._random_instance(rng)
            if A.shape[0] < 2:
                continue
            full_size = len(solve_l0(A)[0])
            drop = int(rng.integers(A.shape[0]))
            reduced = np.delete(A, drop, axis=0)
            assert len(solve_l0(reduced)[0]) <= full_size
