"""Cosine cost matrices and an exact rectangular minimum-cost assignment solver.

The solver is a shortest-augmenting-path implementation of the
Jonker-Volgenant algorithm on a square-padded matrix, followed by a
canonicalization pass that resolves exact cost ties in favor of the
lexicographically smallest match set (lowest row index, then lowest column
index), so the alignment is a deterministic function of its input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import EmbeddingTable
from .errors import SchemaError, ZeroVector

# Tolerance used to recognize tight (zero reduced cost) edges in the dual
# solution; genuine ties in float data sit at 0, everything else is far above.
_TIGHT_TOL = 1e-11


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two equal-length vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or u.shape != v.shape:
        raise SchemaError(f"vectors have shapes {u.shape} and {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def similarity_matrix(a: EmbeddingTable, b: EmbeddingTable) -> np.ndarray:
    """Pairwise cosine similarities between two embedding tables.

    Zero vectors are absorbed as similarity 0 against everything rather than
    erroring mid-pipeline.
    """
    if a.dim != b.dim:
        raise SchemaError(f"embedding dims differ: {a.dim} vs {b.dim}")
    av = a.vectors
    bv = b.vectors
    na = np.linalg.norm(av, axis=1)
    nb = np.linalg.norm(bv, axis=1)
    an = np.divide(av, na[:, None], out=np.zeros_like(av), where=na[:, None] > 0.0)
    bn = np.divide(bv, nb[:, None], out=np.zeros_like(bv), where=nb[:, None] > 0.0)
    return np.clip(an @ bn.T, -1.0, 1.0)


@dataclass(frozen=True)
class CostMatrix:
    """Dense rectangular cost matrix with entries in [0, 2]."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.entries, dtype=np.float64))
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"cost matrix must be 2-D and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("cost matrix contains non-finite entries")
        if arr.min() < 0.0 or arr.max() > 2.0:
            raise ValueError("cost matrix entries must lie in [0, 2]")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def build_cost_matrix(a: EmbeddingTable, b: EmbeddingTable) -> CostMatrix:
    """Cost matrix with entry (i, j) = 1 - cosine(a[i], b[j])."""
    return CostMatrix(np.clip(1.0 - similarity_matrix(a, b), 0.0, 2.0))


@dataclass(frozen=True)
class Assignment:
    """Injective row-to-column matching of size min(rows, cols)."""

    matches: tuple[tuple[int, int], ...]
    unmatched_rows: tuple[int, ...]
    unmatched_cols: tuple[int, ...]


def _jv_square(cost: np.ndarray):
    """Solve a square LSAP; returns (row_to_col, row duals, column duals)."""
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j] = 1-based row matched to col j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            reduced = cost[i0 - 1, :] - u[i0] - v[1:]
            mseg = minv[1:]
            wseg = way[1:]
            free = ~used[1:]
            better = free & (reduced < mseg)
            mseg[better] = reduced[better]
            wseg[better] = j0
            candidates = np.where(free, mseg, np.inf)
            j1 = int(np.argmin(candidates)) + 1
            delta = float(candidates[j1 - 1])
            used_cols = np.flatnonzero(used)
            u[p[used_cols]] += delta
            v[used_cols] -= delta
            mseg[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = int(way[j0])
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.full(n, -1, dtype=np.int64)
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col, u[1:].copy(), v[1:].copy()


def _kuhn_feasible(neighbors, rows, banned_cols, need: int) -> bool:
    """True when `rows` admit a matching of size `need` into non-banned columns."""
    owner: dict[int, int] = {}

    def try_row(r, seen) -> bool:
        for c in neighbors[r]:
            if c in banned_cols or c in seen:
                continue
            seen.add(c)
            if c not in owner or try_row(owner[c], seen):
                owner[c] = r
                return True
        return False

    matched = 0
    for r in rows:
        if try_row(r, set()):
            matched += 1
            if matched >= need:
                return True
    return matched >= need


def _lex_min_matching(tight: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    """Lexicographically smallest perfect matching within the tight edge set."""
    n = tight.shape[0]
    degrees = tight.sum(axis=1)
    if degrees.max() == 1:
        return fallback  # unique tight neighbor per row: nothing to canonicalize
    neighbors = [np.flatnonzero(tight[r]).tolist() for r in range(n)]
    result = np.full(n, -1, dtype=np.int64)
    banned: set[int] = set()
    for r in range(n):
        placed = False
        for c in neighbors[r]:
            if c in banned:
                continue
            banned.add(c)
            if _kuhn_feasible(neighbors, range(r + 1, n), banned, n - r - 1):
                result[r] = c
                placed = True
                break
            banned.discard(c)
        if not placed:
            return fallback  # tight graph inconsistent; keep the solver's answer
    return result


def solve_lsap(m: CostMatrix) -> Assignment:
    """Minimum-total-cost injective matching of size min(rows, cols).

    Exact cost ties are broken toward the lexicographically smallest match
    set; near-ties caused by floating-point noise are left to the solver so
    the returned total is always the true optimum.
    """
    cost = m.entries
    rows, cols = cost.shape
    n = max(rows, cols)
    if rows == cols:
        square = np.array(cost)
    else:
        # Pad to square with a constant above every real entry; pad cells then
        # absorb exactly the |rows-cols| unmatched slots.
        square = np.full((n, n), float(cost.max()) + 1.0)
        square[:rows, :cols] = cost
    row_to_col, u, v = _jv_square(square)

    reduced = square - u[:, None] - v[None, :]
    tau = _TIGHT_TOL * max(1.0, float(np.abs(square).max()))
    tight = reduced <= tau
    tight[np.arange(n), row_to_col] = True
    canonical = _lex_min_matching(tight, row_to_col)
    if canonical is not row_to_col:
        idx = np.arange(n)
        if float(square[idx, canonical].sum()) == float(square[idx, row_to_col].sum()):
            row_to_col = canonical

    matches = tuple(
        (r, int(row_to_col[r])) for r in range(rows) if row_to_col[r] < cols
    )
    matched_rows = {r for r, _ in matches}
    matched_cols = {c for _, c in matches}
    return Assignment(
        matches=matches,
        unmatched_rows=tuple(r for r in range(rows) if r not in matched_rows),
        unmatched_cols=tuple(c for c in range(cols) if c not in matched_cols),
    )
