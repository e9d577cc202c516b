"""Dual regions and their lower-dimensional strata on the sphere.

A stratum is described by a set ``J`` of indices whose activations have a
strict sign and the complementary set whose activations vanish.  Nonemptiness
of ``{w in L : s_j <w, x_j> > 0, j in J}`` is decided by the distance from the
origin to the convex hull of the signed, projected data points: the set is
nonempty exactly when that distance is positive, and the nearest hull point
then points into the set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyFlat, Inconclusive
from .geometry import RANK_TOL, Flat, ProblemInstance, flat_from_normals

HULL_TOL = 1e-9
HULL_ZERO = 1e-12
CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class HullDistance:
    point: np.ndarray
    distance: float
    iterations: int
    converged: bool


def _affine_min_norm(S: np.ndarray):
    """Min-norm point of the affine hull of the rows of S, as barycentric weights."""
    k = S.shape[0]
    if k == 1:
        return np.ones(1)
    G = S @ S.T
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = G
    A[:k, k] = 1.0
    A[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return sol[:k]


def min_norm_in_hull(P: np.ndarray, max_iter: Optional[int] = None,
                     separation: Optional[float] = None) -> HullDistance:
    """Nearest point to the origin in ``conv(P)``.

    Gilbert's iteration (move toward the support point minimizing ``<v, p>``)
    with Wolfe's affine correction on the active corral, which makes the
    method terminate finitely instead of zig-zagging when the origin lies
    inside or on the hull.

    With ``separation`` set, stop as soon as ``min_j <v, p_j> > separation * |v|``:
    then ``v`` already certifies a positive distance, reported as the lower
    bound ``min_j <v, p_j> / |v|``.
    """
    P = np.asarray(P, dtype=float)
    m, d = P.shape
    if max_iter is None:
        max_iter = max(10 * m * d, 50)
    j0 = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    active = [j0]
    lam = np.ones(1)
    v = P[j0].copy()
    scale = max(1.0, float(np.max(np.abs(P))))
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        vv = float(v @ v)
        if math.sqrt(vv) <= HULL_ZERO * scale:
            converged = True
            break
        dots = P @ v
        j = int(np.argmin(dots))
        if separation is not None and dots[j] > separation * math.sqrt(vv):
            return HullDistance(v, float(dots[j] / math.sqrt(vv)), it, True)
        # Frank-Wolfe gap: ||v||^2 - min <v, p> >= ||v||^2 - ||v*||^2 >= 0
        if vv - dots[j] <= 1e-14 * scale * scale or j in active:
            converged = True
            break
        active.append(j)
        lam = np.append(lam, 0.0)
        while True:
            S = P[active]
            alpha = _affine_min_norm(S)
            if np.all(alpha > 1e-14):
                lam = alpha
                v = alpha @ S
                break
            # Step from lam toward alpha until a weight hits zero, drop it.
            mask = alpha <= 1e-14
            theta = np.min(lam[mask] / (lam[mask] - alpha[mask] + 1e-300))
            theta = min(max(theta, 0.0), 1.0)
            lam = lam + theta * (alpha - lam)
            keep = lam > 1e-14
            if not np.any(keep):
                keep[int(np.argmax(lam))] = True
            active = [a for a, k in zip(active, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
            v = lam @ P[active]
            if len(active) == 1:
                break
    return HullDistance(v, float(np.linalg.norm(v)), it, converged)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    witness: Optional[np.ndarray]
    distance: float
    margin: float


def pattern_feasible(points, signs, flat: Flat, indices: Optional[Sequence[int]] = None,
                     component: int = 0) -> Feasibility:
    """Decide whether ``{w in flat, |w|=1 : signs_j <w, x_j> > 0}`` is nonempty.

    ``points`` are the data vectors whose signs are prescribed (one per sign).
    ``component`` is used only for one-dimensional flats without sign
    constraints: +1/-1 picks one of the two antipodal points.

    Raises
    ------
    Inconclusive
        If the hull iteration hits its cap with distance in (1e-12, 1e-9].
    """
    pts = np.asarray(points, dtype=float).reshape(-1, flat.parent_dim)
    signs = np.asarray(signs, dtype=float).reshape(-1)
    B = flat.basis
    if pts.shape[0] == 0:
        if component:
            w = component * B[0]
            return Feasibility(True, w, 1.0, np.inf)
        return Feasibility(True, B[0].copy(), 1.0, np.inf)
    coords = (signs[:, None] * pts) @ B.T  # signed points in flat coordinates
    lengths = np.linalg.norm(coords, axis=1)
    scale = float(np.max(np.linalg.norm(pts, axis=1)))
    if np.any(lengths <= RANK_TOL * max(scale, 1.0)):
        return Feasibility(False, None, 0.0, -np.inf)
    unit = coords / lengths[:, None]
    if component and B.shape[0] == 1:
        unit = np.vstack([unit, [[float(component)]]])
    cap = 10 * unit.shape[0] * max(B.shape[0], 1) + 50
    res = min_norm_in_hull(unit, max_iter=cap, separation=HULL_TOL)
    if res.distance > HULL_TOL:
        w = B.T @ (res.point / np.linalg.norm(res.point))
        if float(np.min(signs * (pts @ w))) <= HULL_TOL:
            # Early witness too thin in the original scaling; get the best one.
            res = min_norm_in_hull(unit, max_iter=cap)
    if res.distance > HULL_TOL:
        w_flat = res.point / np.linalg.norm(res.point)
        margins = unit @ w_flat
        w = B.T @ w_flat
        w /= np.linalg.norm(w)
        true_margin = float(np.min(signs * (pts @ w)))
        if float(margins.min()) > 0 and true_margin > 0:
            return Feasibility(True, w, res.distance, true_margin)
        if res.converged:
            return Feasibility(False, None, res.distance, true_margin)
    if not res.converged and HULL_ZERO < res.distance <= HULL_TOL:
        raise Inconclusive(
            f"hull distance {res.distance:.3e} undecided after {res.iterations} iterations",
            indices=indices, signs=tuple(int(s) for s in signs),
        )
    if not res.converged and res.distance > HULL_TOL:
        raise Inconclusive(
            f"hull iteration capped at distance {res.distance:.3e} without a valid witness",
            indices=indices, signs=tuple(int(s) for s in signs),
        )
    return Feasibility(False, None, res.distance, -np.inf)


@dataclass(frozen=True)
class Stratum:
    """A nonempty cell ``{w : sign<w,x_j> = s_j (j in J), <w,x_z> = 0 (z not in J)}``.

    ``signs`` holds +1/-1 for the indices in ``strict`` (in the same order).
    ``component`` is nonzero only for a one-dimensional flat with no strict
    indices, whose trace on the sphere is two antipodal points.
    """

    strict: tuple
    signs: tuple
    flat: Flat
    witness: np.ndarray
    n: int
    component: int = 0

    @property
    def codim_label(self) -> int:
        return self.n - len(self.strict)

    @property
    def is_region(self) -> bool:
        return len(self.strict) == self.n

    @property
    def zero_indices(self) -> tuple:
        s = set(self.strict)
        return tuple(z for z in range(self.n) if z not in s)

    def ternary(self) -> tuple:
        """Sign vector over all indices with 0 on the vanishing ones."""
        t = [0] * self.n
        for j, s in zip(self.strict, self.signs):
            t[j] = int(s)
        return tuple(t)

    def binary_pattern(self) -> dict:
        """The 0/1 activation pattern restricted to the strict indices."""
        return {j: int(s > 0) for j, s in zip(self.strict, self.signs)}

    def contains_closure(self, w, points, tol: float = CLOSURE_TOL, eq_tol: float = RANK_TOL) -> bool:
        """Membership of ``w`` in the closure of the stratum (relative to its flat)."""
        X = np.asarray(points)
        s = X @ w
        scale = max(1.0, float(np.max(np.linalg.norm(X, axis=1))))
        for z in self.zero_indices:
            if abs(s[z]) > eq_tol * scale:
                return False
        for j, sg in zip(self.strict, self.signs):
            if sg * s[j] < -tol:
                return False
        if self.component and self.flat.dim == 1:
            if self.component * float(self.flat.basis[0] @ w) < -tol:
                return False
        return True

    def contains(self, w, points, tol: float = CLOSURE_TOL, eq_tol: float = RANK_TOL) -> bool:
        """Membership of ``w`` in the open stratum, with strict margin ``tol``."""
        X = np.asarray(points)
        s = X @ w
        scale = max(1.0, float(np.max(np.linalg.norm(X, axis=1))))
        for z in self.zero_indices:
            if abs(s[z]) > eq_tol * scale:
                return False
        for j, sg in zip(self.strict, self.signs):
            if sg * s[j] <= tol:
                return False
        if self.component and self.flat.dim == 1:
            return self.component * float(self.flat.basis[0] @ w) > tol
        return True


def _sort_key(st: Stratum):
    return (-len(st.strict), st.strict, tuple(-s for s in st.signs), -st.component)


def _dedup_key(st: Stratum, X: np.ndarray):
    P = np.round(st.flat.projector, 9) + 0.0
    cons = []
    for s, j in zip(st.signs, st.strict):
        px = st.flat.project(X[j])
        cons.append(tuple(np.round(s * px / np.linalg.norm(px), 9) + 0.0))
    return (P.tobytes(), tuple(sorted(cons)), st.component)


def enumerate_strata(points, workers: int = 1) -> list:
    """All nonempty strata of the central arrangement defined by ``points``.

    Subsets of vanishing indices whose normals span R^d are skipped; sign
    patterns are grown one index at a time and a branch is cut as soon as its
    partial pattern is infeasible on the flat.

    Raises
    ------
    Inconclusive
        From the feasibility oracle, with the offending indices and signs.
    """
    X = np.asarray(points.points if isinstance(points, ProblemInstance) else points, dtype=float)
    n, d = X.shape
    if np.any(np.linalg.norm(X, axis=1) <= 1e-14):
        raise ValueError("all data points must be nonzero")
    subsets = [J for k in range(n, -1, -1) for J in itertools.combinations(range(n), k)]
    if workers > 1 and len(subsets) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_strata_for_subset, [(X, J) for J in subsets],
                                   chunksize=max(1, len(subsets) // (4 * workers))))
    else:
        chunks = [_strata_for_subset((X, J)) for J in subsets]
    out = []
    seen = set()
    for found in chunks:
        for st in found:
            key = _dedup_key(st, X)
            if key in seen:
                continue
            seen.add(key)
            out.append(st)
    out.sort(key=_sort_key)
    return out


def _strata_for_subset(args) -> list:
    X, J = args
    n, d = X.shape
    Z = [z for z in range(n) if z not in J]
    try:
        flat = flat_from_normals(X[Z], d)
    except EmptyFlat:
        return []
    return list(_patterns_on_flat(X, J, flat, n))


def _patterns_on_flat(X, J, flat: Flat, n: int):
    if not J:
        if flat.dim == 1:
            for comp in (1, -1):
                yield Stratum((), (), flat, comp * flat.basis[0].copy(), n, comp)
        else:
            yield Stratum((), (), flat, flat.basis[0].copy(), n, 0)
        return
    # Depth-first over indices of J; an infeasible prefix kills its subtree.
    stack = [()]
    while stack:
        prefix = stack.pop()
        depth = len(prefix)
        for s in (-1, 1):
            signs = prefix + (s,)
            idx = J[: depth + 1]
            feas = pattern_feasible(X[list(idx)], signs, flat, indices=idx)
            if not feas.feasible:
                continue
            if depth + 1 == len(J):
                yield Stratum(tuple(J), signs, flat, feas.witness, n, 0)
            else:
                stack.append(signs)


def full_regions(strata) -> list:
    return [s for s in strata if s.is_region]


def strata_by_codim(strata) -> dict:
    counts: dict = {}
    for s in strata:
        counts[s.codim_label] = counts.get(s.codim_label, 0) + 1
    return dict(sorted(counts.items()))


def cover_count(n: int, d: int) -> int:
    """Number of regions cut out by ``n`` central hyperplanes in general position in R^d."""
    if d < 0:
        return 0
    if n == 0:
        return 1
    if d == 0:
        return 0
    return 2 * sum(math.comb(n - 1, k) for k in range(d))


def sparsity_bound(n: int, d: int) -> int:
    """Upper bound on the support size of any minimizer."""
    return max(math.comb(n, k) * cover_count(n - k, d - k) for k in range(n + 1))
