from itertools import permutations

import numpy as np
import pytest

from bivert import (Assignment, CostMatrix, EmbeddingTable, SchemaError,
                    ZeroVector, build_cost_matrix, cosine_similarity, solve_lsap)


def brute_force_min(cost: np.ndarray) -> float:
    """Independent oracle: exhaustive enumeration over injective maps.

    Sums each candidate in ascending row order, the same canonical order used
    for assignment totals, so exact float comparison is well-defined.
    """
    rows, cols = cost.shape
    best = float("inf")
    if rows <= cols:
        candidates = ([(r, chosen[r]) for r in range(rows)]
                      for chosen in permutations(range(cols), rows))
    else:
        candidates = (sorted((chosen[c], c) for c in range(cols))
                      for chosen in permutations(range(rows), cols))
    for pairs in candidates:
        total = sum(float(cost[r, c]) for r, c in pairs)
        best = min(best, total)
    return best


def assignment_total(cost: np.ndarray, assignment: Assignment) -> float:
    return sum(float(cost[r, c]) for r, c in assignment.matches)


class TestCosine:
    def test_identical_unit_vectors(self):
        assert cosine_similarity((1.0, 0.0), (1.0, 0.0)) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity((1.0, 0.0), (0.0, 1.0)) == 0.0

    def test_hand_computed(self):
        # (1,2)@(2,1) = 4, norms sqrt(5) each -> 4/5
        assert cosine_similarity((1.0, 2.0), (2.0, 1.0)) == pytest.approx(0.8, abs=1e-12)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine_similarity((0.0, 0.0), (1.0, 0.0))

    def test_dim_mismatch(self):
        with pytest.raises(SchemaError):
            cosine_similarity((1.0, 0.0), (1.0, 0.0, 0.0))

    def test_clamped_to_unit_interval(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            u = rng.normal(size=5)
            v = rng.normal(size=5)
            assert -1.0 <= cosine_similarity(u, v) <= 1.0


class TestCostMatrix:
    def test_identical_single_token_tables(self):
        table = EmbeddingTable([[3.0, 4.0]])
        matrix = build_cost_matrix(table, table)
        assert matrix.entries[0, 0] == 0.0

    def test_orthogonal(self):
        a = EmbeddingTable([[1.0, 0.0]])
        b = EmbeddingTable([[0.0, 1.0]])
        assert build_cost_matrix(a, b).entries[0, 0] == 1.0

    def test_hand_computed(self):
        a = EmbeddingTable([[1.0, 2.0]])
        b = EmbeddingTable([[2.0, 1.0]])
        assert build_cost_matrix(a, b).entries[0, 0] == pytest.approx(0.2, abs=1e-12)

    def test_zero_vector_absorbed_as_cost_one(self):
        a = EmbeddingTable([[0.0, 0.0]])
        b = EmbeddingTable([[1.0, 0.0]])
        assert build_cost_matrix(a, b).entries[0, 0] == 1.0

    def test_dim_mismatch(self):
        a = EmbeddingTable([[1.0, 0.0]])
        b = EmbeddingTable([[1.0, 0.0, 0.0]])
        with pytest.raises(SchemaError):
            build_cost_matrix(a, b)

    def test_range_validated(self):
        with pytest.raises(ValueError):
            CostMatrix(np.array([[2.5]]))
        with pytest.raises(ValueError):
            CostMatrix(np.array([[float("nan")]]))


class TestSolveLsap:
    def test_zero_diagonal(self):
        result = solve_lsap(CostMatrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert result.matches == ((0, 0), (1, 1))
        assert result.unmatched_rows == () and result.unmatched_cols == ()

    def test_two_by_two_enumerated(self):
        cost = np.array([[1.0, 2.0], [2.0, 1.0]])
        result = solve_lsap(CostMatrix(cost))
        assert result.matches == ((0, 0), (1, 1))
        assert assignment_total(cost, result) == brute_force_min(cost) == 2.0

    def test_rectangular_three_by_two(self):
        cost = np.array([[0.1, 0.9], [0.2, 0.1], [0.9, 0.9]])
        result = solve_lsap(CostMatrix(cost))
        assert result.matches == ((0, 0), (1, 1))
        assert result.unmatched_rows == (2,)
        assert result.unmatched_cols == ()
        assert assignment_total(cost, result) == brute_force_min(cost)

    @pytest.mark.parametrize("seed", range(40))
    def test_optimality_oracle(self, seed):
        rng = np.random.default_rng(seed)
        rows = int(rng.integers(1, 7))
        cols = int(rng.integers(1, 7))
        cost = rng.uniform(0.0, 1.0, size=(rows, cols))
        result = solve_lsap(CostMatrix(cost))
        assert len(result.matches) == min(rows, cols)
        assert assignment_total(cost, result) == brute_force_min(cost)

    @pytest.mark.parametrize("seed", range(15))
    def test_rectangular_symmetry(self, seed):
        rng = np.random.default_rng(100 + seed)
        cost = rng.uniform(0.0, 1.0, size=(int(rng.integers(1, 6)), int(rng.integers(1, 6))))
        direct = solve_lsap(CostMatrix(cost))
        transposed = solve_lsap(CostMatrix(cost.T))
        assert set(direct.matches) == {(c, r) for r, c in transposed.matches}
        assert assignment_total(cost, direct) == assignment_total(cost.T, transposed)

    @pytest.mark.parametrize("seed", range(15))
    def test_constant_shift_invariance(self, seed):
        rng = np.random.default_rng(200 + seed)
        rows = int(rng.integers(1, 6))
        cols = int(rng.integers(1, 6))
        cost = rng.uniform(0.0, 0.9, size=(rows, cols))
        shift = float(rng.uniform(0.0, 1.0))
        base = solve_lsap(CostMatrix(cost))
        shifted = solve_lsap(CostMatrix(cost + shift))
        assert base.matches == shifted.matches
        assert assignment_total(cost + shift, shifted) == pytest.approx(
            assignment_total(cost, base) + shift * min(rows, cols), abs=1e-9)

    def test_tie_break_all_equal(self):
        result = solve_lsap(CostMatrix(np.ones((2, 2))))
        assert result.matches == ((0, 0), (1, 1))

    def test_tie_break_rectangular(self):
        wide = solve_lsap(CostMatrix(np.ones((2, 3))))
        assert wide.matches == ((0, 0), (1, 1))
        assert wide.unmatched_cols == (2,)
        tall = solve_lsap(CostMatrix(np.ones((3, 2))))
        assert tall.matches == ((0, 0), (1, 1))
        assert tall.unmatched_rows == (2,)

    def test_tie_break_block(self):
        cost = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        result = solve_lsap(CostMatrix(cost))
        assert result.matches == ((0, 0), (1, 1), (2, 2))

    def test_tie_break_prefers_low_col_for_low_row(self):
        # two optima: {(0,0),(1,1)} and {(0,1),(1,0)}; lexicographic pick
        cost = np.array([[0.5, 0.5], [0.5, 0.5]])
        assert solve_lsap(CostMatrix(cost)).matches == ((0, 0), (1, 1))
