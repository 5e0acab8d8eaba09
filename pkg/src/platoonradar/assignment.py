"""Exact linear assignment: minimize sum_p cost[p][perm[p]] over permutations.

Hungarian method in the shortest-augmenting-path form with row/column
potentials, worst-case O(L^3).  Ties are broken deterministically:
rows are inserted in increasing order and the augmenting search always
extends to the lowest-index column among equal candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import SelectionMatrix


@dataclass(frozen=True, eq=False)
class Assignment:
    """permutation[p] = n means row p is assigned column n (J[p, n] = 1)."""

    permutation: np.ndarray
    objective_value: float


def hungarian_min(cost) -> Assignment:
    """Solve the square assignment problem to global optimality.

    Entries may be negative; rows with negative entries are shifted to
    nonnegativity before the reduction, which preserves the argmin.
    The reported value is re-evaluated on the original matrix.
    """
    original = np.asarray(cost, dtype=float)
    if original.ndim != 2 or original.shape[0] != original.shape[1] or original.size == 0:
        raise ValueError("cost matrix must be square and nonempty")
    if not np.all(np.isfinite(original)):
        raise ValueError("cost matrix entries must be finite")
    n = original.shape[0]
    reduced = original - np.minimum(original.min(axis=1), 0.0)[:, None]

    # index 0 is a virtual column; rows are 1-based inside the potentials
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    matched_row = np.zeros(n + 1, dtype=np.int64)  # column -> matched row, 0 = free
    way = np.zeros(n + 1, dtype=np.int64)          # column -> predecessor column

    for row in range(1, n + 1):
        matched_row[0] = row
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = matched_row[j0]
            slack = reduced[i0 - 1, :] - u[i0] - v[1:]
            free = ~used[1:]
            better = free & (slack < minv[1:])
            if better.any():
                cols = np.flatnonzero(better)
                minv[cols + 1] = slack[cols]
                way[cols + 1] = j0
            candidates = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(candidates)) + 1
            delta = candidates[j1 - 1]
            used_cols = np.flatnonzero(used)
            u[matched_row[used_cols]] += delta
            v[used_cols] -= delta
            open_cols = np.flatnonzero(~used[1:]) + 1
            minv[open_cols] -= delta
            j0 = j1
            if matched_row[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            matched_row[j0] = matched_row[j1]
            j0 = j1

    permutation = np.empty(n, dtype=np.int64)
    permutation[matched_row[1:] - 1] = np.arange(n)
    permutation.setflags(write=False)
    value = float(original[np.arange(n), permutation].sum())
    return Assignment(permutation=permutation, objective_value=value)


def assignment_to_matrix(assignment: Assignment, size: int) -> SelectionMatrix:
    """Binary matrix with ones at (p, permutation[p]); passes validate_selection."""
    perm = np.asarray(assignment.permutation, dtype=np.int64)
    if perm.shape != (size,) or not np.array_equal(np.sort(perm), np.arange(size)):
        raise ValueError(f"permutation must be a bijection on 0..{size - 1}")
    return SelectionMatrix.from_permutation(perm)
