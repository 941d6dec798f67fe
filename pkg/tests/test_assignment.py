import itertools

import numpy as np
import pytest

from plantdoctor.tracking.assignment import solve_assignment


def permutation_minimum(cost):
    """Exhaustive minimum cost over complete matchings (no forbidden pairs)."""
    m, n = cost.shape
    if m > n:
        return permutation_minimum(cost.T)
    rows = np.arange(m)
    return min(
        float(cost[rows, list(perm)].sum())
        for perm in itertools.permutations(range(n), m)
    )


def enumerate_optima(cost, forbidden):
    """All optimal matchings under the max-cardinality-then-min-cost rule.

    Plain recursion with a skip branch; only used on tiny matrices.
    """
    m, n = cost.shape
    allowed = np.isfinite(cost) & ~forbidden
    solutions = []

    def recurse(row, used, pairs, total):
        if row == m:
            solutions.append((len(pairs), total, sorted(pairs)))
            return
        recurse(row + 1, used, pairs, total)  # leave this row unmatched
        for col in range(n):
            if allowed[row, col] and col not in used:
                recurse(row + 1, used | {col}, pairs + [(row, col)], total + cost[row, col])

    recurse(0, frozenset(), [], 0.0)
    best_size = max(s for s, _, _ in solutions)
    sized = [(c, p) for s, c, p in solutions if s == best_size]
    best_cost = min(c for c, _ in sized)
    return best_size, best_cost, [p for c, p in sized if c <= best_cost + 1e-9]


class TestKnownAnswers:
    def test_identity_cost_matrix(self):
        cost = 1.0 - np.eye(3)
        assert solve_assignment(cost) == [(0, 0), (1, 1), (2, 2)]

    def test_small_frozen_matrix(self):
        cost = np.array([[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]])
        pairs = solve_assignment(cost)
        assert pairs == [(0, 1), (1, 0), (2, 2)]
        assert sum(cost[r, c] for r, c in pairs) == 5.0

    def test_single_cell(self):
        assert solve_assignment(np.array([[7.0]])) == [(0, 0)]

    def test_empty_dimensions(self):
        assert solve_assignment(np.zeros((0, 3))) == []
        assert solve_assignment(np.zeros((3, 0))) == []

    def test_all_forbidden_returns_empty(self):
        cost = np.ones((3, 3))
        forbidden = np.ones((3, 3), bool)
        assert solve_assignment(cost, forbidden) == []

    def test_nonfinite_cost_is_forbidden(self):
        cost = np.array([[np.inf, 1.0], [2.0, np.inf]])
        assert solve_assignment(cost) == [(0, 1), (1, 0)]

    def test_one_dim_input_raises(self):
        with pytest.raises(ValueError):
            solve_assignment(np.zeros(4))


class TestCardinalityFirst:
    def test_larger_matching_beats_cheaper_smaller_one(self):
        # matching both rows costs 14; matching only (0, 0) would cost 0,
        # but a maximum-cardinality matching is required
        cost = np.array([[0.0, 9.0], [5.0, 1.0]])
        forbidden = np.zeros((2, 2), bool)
        forbidden[1, 1] = True
        pairs = solve_assignment(cost, forbidden)
        assert pairs == [(0, 1), (1, 0)]

    def test_forbidden_row_left_unmatched(self):
        cost = np.array([[1.0, 2.0], [3.0, 4.0], [0.0, 0.0]])
        forbidden = np.zeros((3, 2), bool)
        forbidden[2, :] = True
        pairs = solve_assignment(cost, forbidden)
        assert all(r != 2 for r, _ in pairs)
        assert len(pairs) == 2


class TestTieBreaking:
    def test_all_zero_square(self):
        assert solve_assignment(np.zeros((3, 3))) == [(0, 0), (1, 1), (2, 2)]

    def test_all_zero_wide(self):
        assert solve_assignment(np.zeros((2, 4))) == [(0, 0), (1, 1)]

    def test_uniform_costs(self):
        assert solve_assignment(np.full((2, 2), 3.5)) == [(0, 0), (1, 1)]

    def test_lexicographic_among_enumerated_optima(self):
        rng = np.random.RandomState(77)
        for _ in range(60):
            m = rng.randint(2, 5)
            n = rng.randint(2, 5)
            cost = rng.randint(0, 4, size=(m, n)).astype(float)
            forbidden = rng.rand(m, n) < 0.2
            if not (np.isfinite(cost) & ~forbidden).any():
                continue
            size, best_cost, optima = enumerate_optima(cost, forbidden)
            pairs = solve_assignment(cost, forbidden)
            assert len(pairs) == size
            total = sum(cost[r, c] for r, c in pairs)
            assert total == pytest.approx(best_cost, abs=1e-9)
            assert sorted(pairs) == min(optima)


class TestAgainstBruteForce:
    def test_random_matrices_match_permutation_search(self):
        rng = np.random.RandomState(2024)
        for _ in range(60):
            m = rng.randint(1, 7)
            n = rng.randint(1, 7)
            cost = rng.uniform(0.0, 100.0, size=(m, n))
            pairs = solve_assignment(cost)
            assert len(pairs) == min(m, n)
            total = sum(cost[r, c] for r, c in pairs)
            assert total == pytest.approx(permutation_minimum(cost), abs=1e-9)

    def test_random_matrices_with_forbidden_match_enumeration(self):
        rng = np.random.RandomState(555)
        for _ in range(40):
            m = rng.randint(1, 5)
            n = rng.randint(1, 5)
            cost = rng.uniform(0.0, 50.0, size=(m, n))
            forbidden = rng.rand(m, n) < 0.25
            pairs = solve_assignment(cost, forbidden)
            if not (np.isfinite(cost) & ~forbidden).any():
                assert pairs == []
                continue
            size, best_cost, _ = enumerate_optima(cost, forbidden)
            assert len(pairs) == size
            total = sum(cost[r, c] for r, c in pairs)
            assert total == pytest.approx(best_cost, abs=1e-9)
            assert not any(forbidden[r, c] for r, c in pairs)

    def test_rows_and_columns_used_at_most_once(self):
        rng = np.random.RandomState(13)
        cost = rng.uniform(0, 10, (6, 4))
        pairs = solve_assignment(cost)
        rows = [r for r, _ in pairs]
        cols = [c for _, c in pairs]
        assert len(set(rows)) == len(rows)
        assert len(set(cols)) == len(cols)
