"""Min-cost bipartite assignment with forbidden pairs.

Thin deterministic layer over scipy's rectangular assignment solver.
The solver maximizes matching cardinality over allowed pairs first,
then minimizes total cost, and among equal-cost optima returns the
matching whose sorted (row, col) pair list is lexicographically
smallest. The tie rule makes every downstream consumer byte-stable.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def _completion_value(cost: np.ndarray, allowed: np.ndarray, rows: list[int],
                      cols: list[int], penalty: float) -> float:
    """Best achievable (total cost - penalty * size) on a sub-board."""
    if not rows or not cols:
        return 0.0
    sub = np.full((len(rows), len(cols)), penalty, dtype=np.float64)
    sub_allowed = allowed[np.ix_(rows, cols)]
    sub[sub_allowed] = cost[np.ix_(rows, cols)][sub_allowed]
    ri, ci = linear_sum_assignment(sub)
    return float(sub[ri, ci].sum()) - penalty * min(len(rows), len(cols))


def solve_assignment(cost: np.ndarray, forbidden: np.ndarray | None = None) -> list[tuple[int, int]]:
    """Solve min-cost rectangular assignment over the allowed pairs.

    Args:
        cost: m x n matrix; entries must be finite on allowed pairs.
        forbidden: optional boolean mask of pairs that must never match.
            Non-finite cost entries are treated as forbidden as well.

    Returns:
        Matched (row, col) pairs sorted by row. The matching has size
        min(m, n) whenever the allowed pairs admit one; otherwise it is
        a maximum allowed matching of minimum total cost. Cost ties are
        broken toward the lexicographically smallest pair list.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost must be a 2-D matrix")
    m, n = cost.shape
    allowed = np.isfinite(cost)
    if forbidden is not None:
        allowed &= ~np.asarray(forbidden, dtype=bool)
    if m == 0 or n == 0 or not allowed.any():
        return []

    allowed_costs = np.abs(cost[allowed])
    penalty = float(allowed_costs.sum()) + 1.0
    eps = 1e-9 * max(1.0, float(allowed_costs.max()))

    matches: list[tuple[int, int]] = []
    open_cols = list(range(n))
    for r in range(m):
        rest_rows = list(range(r + 1, m))
        candidates = []
        for c in open_cols:
            if not allowed[r, c]:
                continue
            rest_cols = [x for x in open_cols if x != c]
            value = (cost[r, c] - penalty) + _completion_value(cost, allowed, rest_rows, rest_cols, penalty)
            candidates.append((c, value))
        skip_value = _completion_value(cost, allowed, rest_rows, open_cols, penalty)

        best = min([v for _, v in candidates] + [skip_value])
        chosen = None
        for c, value in candidates:  # ascending c; skipping the row loses ties
            if value <= best + eps:
                chosen = c
                break
        if chosen is not None:
            matches.append((r, chosen))
            open_cols.remove(chosen)
        if not open_cols:
            break
    return matches
