"""Algebraic sufficient conditions for uniqueness and stable recovery.

``check_independence`` tests whether some square minor of the activation
matrix has a nonzero determinant whose transversals all share one parity
(``perm == |det|``); then the evaluation rows are independent whatever the
actual inner products are.  ``check_full_rank`` stacks evaluations and
tangent derivatives and checks rank ``N*d``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import TooLarge
from .geometry import ProblemInstance, flat_from_normals
from .operators import derivative_matrix, evaluation_matrix

MAX_PERMANENT = 14
MAX_MINOR_SEARCH_N = 20
SVD_RTOL = 1e-10


def permanent(M) -> int:
    """Exact permanent of a square 0-1 (or integer) matrix by Ryser's formula.

    Uses a Gray-code walk over column subsets so each step updates the row
    sums by a single column.
    """
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("permanent needs a square matrix")
    n = A.shape[0]
    if n > MAX_PERMANENT:
        raise TooLarge(f"permanent limited to N <= {MAX_PERMANENT}, got {n}")
    if n == 0:
        return 1
    cols = [[int(v) for v in A[:, j]] for j in range(n)]
    row_sums = [0] * n
    total = 0
    gray_prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        j = (gray ^ gray_prev).bit_length() - 1
        sign = 1 if gray & (1 << j) else -1
        col = cols[j]
        for i in range(n):
            row_sums[i] += sign * col[i]
        gray_prev = gray
        prod = 1
        for s in row_sums:
            prod *= s
            if prod == 0:
                break
        if prod:
            size = bin(gray).count("1")
            total += prod if (n - size) % 2 == 0 else -prod
    return total


def int_det(M) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss elimination)."""
    A = [[int(v) for v in row] for row in np.asarray(M)]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if A[r][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def svd_rank(M, rtol: float = SVD_RTOL):
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, s
    return int(np.sum(s > rtol * s[0])), s


@dataclass
class IndependenceReport:
    independent: bool
    rank_K: int
    rank_full: bool
    witness_minor: Optional[tuple] = None
    minor: Optional[list] = None
    perm_value: int = 0
    det_value: int = 0
    reason: str = ""
    singular_values: list = field(default_factory=list)
    pattern: Optional[list] = None

    def to_dict(self) -> dict:
        return {
            "independent": self.independent,
            "rank_K": self.rank_K,
            "rank_full": self.rank_full,
            "witness_minor": None if self.witness_minor is None else [int(c) for c in self.witness_minor],
            "minor": self.minor,
            "perm_value": self.perm_value,
            "det_value": self.det_value,
            "reason": self.reason,
            "singular_values": [float(s) for s in self.singular_values],
            "pattern": self.pattern,
        }


def check_independence(locations, instance: ProblemInstance) -> IndependenceReport:
    """Sufficient condition for independence of ``{K delta_{w_i}}`` plus the SVD ground truth.

    Column subsets are scanned in lexicographic order; the first one whose
    minor satisfies ``perm == |det| > 0`` is reported.  Atoms on a hyperplane
    make the activation pattern convention-dependent, so the sufficient test
    is skipped for them and only the rank is reported.
    """
    W = np.atleast_2d(np.asarray(locations, dtype=float)).reshape(-1, instance.d)
    N, n = W.shape[0], instance.n
    ev = evaluation_matrix(W, instance)
    rank, s = svd_rank(ev.entries) if N else (0, np.zeros(0))
    rep = IndependenceReport(False, rank, rank == N, singular_values=list(s),
                             pattern=ev.pattern.tolist())
    if N == 0:
        rep.independent = True
        rep.reason = "no atoms"
        return rep
    if N > n:
        rep.reason = "more atoms than measurements"
        return rep
    if ev.has_boundary_atoms:
        rep.reason = "atom on a hyperplane: sufficient condition not applicable"
        return rep
    if n > MAX_MINOR_SEARCH_N:
        raise TooLarge(f"minor search limited to n <= {MAX_MINOR_SEARCH_N}")
    Pi = ev.pattern
    for cols in itertools.combinations(range(n), N):
        sub = Pi[:, cols]
        det = int_det(sub)
        if det == 0:
            continue
        perm = permanent(sub)
        if perm == abs(det):
            rep.independent = True
            rep.witness_minor = tuple(cols)
            rep.minor = sub.tolist()
            rep.perm_value = perm
            rep.det_value = det
            rep.reason = "minor with perm == |det| > 0"
            return rep
    rep.reason = "no minor with perm == |det| > 0"
    return rep


def tangent_basis(w) -> np.ndarray:
    """Orthonormal basis of the tangent space at ``w``, as rows."""
    w = np.asarray(w, dtype=float)
    return flat_from_normals([w], w.shape[0]).basis


@dataclass
class FullRankReport:
    full_rank: bool
    rank: int
    target: int
    singular_values: list
    matrix: Optional[np.ndarray] = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "full_rank": self.full_rank,
            "rank": self.rank,
            "target": self.target,
            "singular_values": [float(s) for s in self.singular_values],
            "reason": self.reason,
        }


def stacked_matrix(locations, instance: ProblemInstance, tangent_bases=None) -> np.ndarray:
    """Evaluation rows on top of tangent-coordinate derivative rows, ``(N*d, n)``."""
    W = np.atleast_2d(np.asarray(locations, dtype=float)).reshape(-1, instance.d)
    D = derivative_matrix(W, instance)
    if tangent_bases is None:
        tangent_bases = [tangent_basis(w) for w in W]
    K = evaluation_matrix(W, instance).entries
    return np.vstack([K, D.tangent_coordinates(tangent_bases)])


def check_full_rank(locations, instance: ProblemInstance, tangent_bases=None) -> FullRankReport:
    """Rank test of the stacked evaluation/derivative matrix against ``N*d``.

    Raises
    ------
    StratumBoundary
        If an atom is not interior to its region.
    """
    W = np.atleast_2d(np.asarray(locations, dtype=float)).reshape(-1, instance.d)
    N, d, n = W.shape[0], instance.d, instance.n
    A = stacked_matrix(W, instance, tangent_bases)
    rank, s = svd_rank(A)
    target = N * d
    if target > n:
        return FullRankReport(False, rank, target, list(s), A,
                              f"N*d = {target} exceeds n = {n}")
    full = rank == target
    return FullRankReport(full, rank, target, list(s), A,
                          "full rank" if full else "rank deficient")
