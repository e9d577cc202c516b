"""Sphere points, problem data and linear subspaces cut out by data hyperplanes.

All vectors are dense float64 arrays. Objects are frozen and the arrays they
hold are marked read-only, so instances can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyFlat, ZeroVector

ZERO_NORM = 1e-14
RANK_TOL = 1e-10


def _frozen(a, ndim=None) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if ndim is not None and arr.ndim != ndim:
        if arr.size == 0 and ndim == 2:
            arr = arr.reshape(0, 0)
        else:
            raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def normalize(v) -> np.ndarray:
    """Return ``v / ||v||`` as a read-only unit vector.

    Raises
    ------
    ZeroVector
        If ``||v|| <= 1e-14``.
    """
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if not nrm > ZERO_NORM:
        raise ZeroVector(f"cannot normalize vector of norm {nrm:.3g}")
    return _frozen(v / nrm)


def angular_distance(u, v) -> float:
    """Geodesic distance between two unit vectors."""
    c = float(np.clip(np.dot(u, v), -1.0, 1.0))
    # arccos loses accuracy near 0; use the chord for tiny angles
    chord = float(np.linalg.norm(np.asarray(u) - np.asarray(v)))
    if chord < 1e-4:
        return 2.0 * np.arcsin(chord / 2.0)
    return float(np.arccos(c))


@dataclass(frozen=True)
class ProblemInstance:
    """Training data for the measure problem.

    ``lam`` is the weight of the total-variation term in the objective
    ``0.5 * ||K mu - y||^2 + lam * ||mu||_TV``; ``lam == 0`` denotes the
    interpolation problem. ``noise`` (if given) has already been added to
    ``labels``; it is kept only for reporting.
    """

    points: np.ndarray
    labels: np.ndarray
    lam: float = 0.0
    noise: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("points must be a non-empty (n, d) array")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms <= ZERO_NORM):
            bad = int(np.argmin(norms))
            raise ValueError(f"data point {bad} is zero")
        y = np.array(self.labels, dtype=float).reshape(-1)
        if y.shape[0] != pts.shape[0]:
            raise ValueError(
                f"labels length {y.shape[0]} does not match {pts.shape[0]} points"
            )
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "lam", float(self.lam))
        if self.noise is not None:
            z = np.array(self.noise, dtype=float).reshape(-1)
            if z.shape[0] != pts.shape[0]:
                raise ValueError("noise length does not match number of points")
            object.__setattr__(self, "noise", _frozen(z))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def with_lambda(self, lam: float) -> "ProblemInstance":
        return ProblemInstance(self.points, self.labels, lam, self.noise)

    def with_noise(self, zeta) -> "ProblemInstance":
        """Return the instance with labels ``y + zeta`` (relative to the clean labels)."""
        clean = self.labels if self.noise is None else self.labels - self.noise
        zeta = np.asarray(zeta, dtype=float)
        return ProblemInstance(self.points, clean + zeta, self.lam, zeta)


@dataclass(frozen=True)
class SparseMeasure:
    """A finite signed combination of Dirac masses on the sphere."""

    coefficients: np.ndarray
    locations: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        w = np.array(self.locations, dtype=float)
        if w.size == 0:
            w = w.reshape(0, w.shape[-1] if w.ndim == 2 else 0)
        if w.ndim != 2 or w.shape[0] != c.shape[0]:
            raise ValueError("locations must be (N, d) with N == len(coefficients)")
        if w.shape[0]:
            norms = np.linalg.norm(w, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-12 * np.maximum(1.0, norms)):
                raise ValueError("atom locations must be unit vectors")
        object.__setattr__(self, "coefficients", _frozen(c))
        object.__setattr__(self, "locations", _frozen(w))

    @classmethod
    def empty(cls, d: int) -> "SparseMeasure":
        return cls(np.zeros(0), np.zeros((0, d)))

    @classmethod
    def from_atoms(cls, coefficients, directions) -> "SparseMeasure":
        """Build a measure, normalizing the given (nonzero) directions."""
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        locs = np.array([normalize(v) for v in dirs]) if len(dirs) else dirs
        return cls(coefficients, locs)

    def __len__(self) -> int:
        return self.coefficients.shape[0]

    @property
    def tv_norm(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    def min_separation(self) -> float:
        """Smallest pairwise angular distance between atoms (inf for < 2 atoms)."""
        best = np.inf
        for i in range(len(self)):
            for k in range(i + 1, len(self)):
                best = min(best, angular_distance(self.locations[i], self.locations[k]))
        return best


@dataclass(frozen=True)
class Flat:
    """The subspace orthogonal to a set of equality normals."""

    parent_dim: int
    equality_normals: np.ndarray
    basis: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def project(self, v) -> np.ndarray:
        return project_onto_flat(v, self)


def _mgs_rank(vectors: np.ndarray, scale: float) -> np.ndarray:
    """Orthonormal basis of span(vectors) by modified Gram-Schmidt, two passes."""
    basis: list[np.ndarray] = []
    for v in vectors:
        q = np.array(v, dtype=float)
        for _ in range(2):
            for b in basis:
                q -= np.dot(b, q) * b
        nrm = np.linalg.norm(q)
        if nrm > RANK_TOL * scale:
            basis.append(q / nrm)
    return np.array(basis).reshape(len(basis), vectors.shape[1])


def numerical_rank(vectors, d: Optional[int] = None) -> int:
    vecs = np.asarray(vectors, dtype=float)
    if vecs.size == 0:
        return 0
    vecs = vecs.reshape(-1, d if d is not None else vecs.shape[-1])
    scale = float(np.max(np.linalg.norm(vecs, axis=1)))
    return _mgs_rank(vecs, scale).shape[0]


def flat_from_normals(normals: Sequence, d: int) -> Flat:
    """Orthonormal basis of the orthogonal complement of ``span(normals)``.

    Raises
    ------
    EmptyFlat
        If the normals span all of R^d.
    """
    nrm = np.asarray(normals, dtype=float).reshape(-1, d)
    if nrm.shape[0]:
        lengths = np.linalg.norm(nrm, axis=1)
        if np.any(lengths <= ZERO_NORM):
            raise ValueError("equality normals must be nonzero")
        scale = float(lengths.max())
        row_basis = _mgs_rank(nrm, scale)
    else:
        row_basis = np.zeros((0, d))
    k = d - row_basis.shape[0]
    if k == 0:
        raise EmptyFlat(f"{nrm.shape[0]} normals span R^{d}")
    # Complete with standard basis vectors, always taking the one with the
    # largest residual (its residual norm is >= sqrt(k'/d), so no cancellation).
    ortho = list(row_basis)
    comp = []
    resid = np.eye(d)
    for b in ortho:
        resid -= np.outer(resid @ b, b)
    for _ in range(k):
        i = int(np.argmax(np.linalg.norm(resid, axis=1)))
        q = resid[i].copy()
        for _ in range(2):
            for b in ortho:
                q -= np.dot(b, q) * b
        q /= np.linalg.norm(q)
        ortho.append(q)
        comp.append(q)
        resid -= np.outer(resid @ q, q)
    return Flat(d, _frozen(nrm, 2), _frozen(np.array(comp), 2))


def project_onto_flat(v, flat: Flat) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the flat."""
    v = np.asarray(v, dtype=float)
    return flat.basis.T @ (flat.basis @ v)
