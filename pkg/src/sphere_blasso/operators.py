"""The measurement operator ``K``, its adjoint and the sphere derivative of the adjoint.

``(K mu)_j = sum_i c_i relu(<w_i, x_j>)`` and ``(K_* p)(w) = sum_j p_j relu(<w, x_j>)``.
The ReLU derivative at 0 is taken as 0, matching the activation indicator
``1{<w, x_j> > 0}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Nondifferentiable, StratumBoundary
from .geometry import ProblemInstance, SparseMeasure

ACTIVE_TOL = 1e-10
INTERIOR_MARGIN = 1e-8


def relu(t):
    return np.maximum(t, 0.0)


def forward(measure: SparseMeasure, instance: ProblemInstance) -> np.ndarray:
    """Network outputs at the data points, ``K mu``."""
    if len(measure) == 0:
        return np.zeros(instance.n)
    act = relu(measure.locations @ instance.points.T)  # (N, n)
    # Explicit loop keeps the summation order identical to adjoint_pairing.
    out = np.zeros(instance.n)
    for c, row in zip(measure.coefficients, act):
        out = out + c * row
    return out


def adjoint_eval(p, w, instance: ProblemInstance) -> float:
    """Certificate value ``eta(w) = sum_j p_j relu(<w, x_j>)``."""
    return float(np.dot(np.asarray(p, dtype=float), relu(instance.points @ w)))


def adjoint_eval_many(p, ws, instance: ProblemInstance) -> np.ndarray:
    """Vectorized :func:`adjoint_eval` over the rows of ``ws``."""
    ws = np.atleast_2d(ws)
    return relu(ws @ instance.points.T) @ np.asarray(p, dtype=float)


def adjoint_grad(p, w, instance: ProblemInstance) -> np.ndarray:
    """Riemannian gradient of the certificate on the sphere.

    Raises
    ------
    Nondifferentiable
        If ``w`` lies within 1e-10 of a hyperplane ``<w, x_j> = 0`` with ``p_j != 0``.
    """
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    s = instance.points @ w
    kink = (np.abs(s) <= ACTIVE_TOL) & (p != 0)
    if np.any(kink):
        j = int(np.flatnonzero(kink)[0])
        raise Nondifferentiable(f"w lies on hyperplane {j} where p_{j} != 0")
    active = s > 0
    g = (p * active) @ instance.points
    return g - np.dot(g, w) * w


@dataclass(frozen=True)
class EvaluationMatrix:
    """``entries[i, j] = relu(<w_i, x_j>)`` with activation pattern ``pattern``.

    ``flagged`` marks entries with ``|<w_i, x_j>| <= 1e-10``, treated as inactive.
    """

    entries: np.ndarray
    pattern: np.ndarray
    inner: np.ndarray
    flagged: np.ndarray

    @property
    def has_boundary_atoms(self) -> bool:
        return bool(self.flagged.any())


def evaluation_matrix(locations, instance: ProblemInstance) -> EvaluationMatrix:
    W = np.atleast_2d(np.asarray(locations, dtype=float)).reshape(-1, instance.d)
    inner = W @ instance.points.T
    pattern = (inner > ACTIVE_TOL).astype(int)
    entries = pattern * inner
    flagged = np.abs(inner) <= ACTIVE_TOL
    return EvaluationMatrix(entries, pattern, inner, flagged)


@dataclass(frozen=True)
class DerivativeMatrix:
    """``blocks[i, j]`` is the sphere gradient at ``w_i`` of ``relu(<., x_j>)``."""

    blocks: np.ndarray  # (N, n, d)
    locations: np.ndarray

    def tangent_coordinates(self, tangent_bases) -> np.ndarray:
        """Stack ``<t, block>`` over each atom's tangent basis: an (N*(d-1), n) matrix."""
        rows = []
        for i, T in enumerate(tangent_bases):
            rows.append(np.asarray(T) @ self.blocks[i].T)
        if not rows:
            return np.zeros((0, self.blocks.shape[1]))
        return np.vstack(rows)


def derivative_matrix(locations, instance: ProblemInstance) -> DerivativeMatrix:
    """Sphere derivatives of every ``relu(<w_i, x_j>)``.

    Raises
    ------
    StratumBoundary
        If some atom is within 1e-8 of a data hyperplane.
    """
    W = np.atleast_2d(np.asarray(locations, dtype=float)).reshape(-1, instance.d)
    X = instance.points
    inner = W @ X.T
    close = np.abs(inner) <= INTERIOR_MARGIN
    if np.any(close):
        i, j = map(int, np.argwhere(close)[0])
        raise StratumBoundary(
            f"atom {i} lies on the hyperplane of data point {j} "
            f"(<w,x> = {inner[i, j]:.2e})",
            atom=i,
            hyperplane=j,
        )
    active = inner > 0
    # block(i, j) = 1{active} (x_j - <w_i, x_j> w_i)
    blocks = active[:, :, None] * (X[None, :, :] - inner[:, :, None] * W[:, None, :])
    return DerivativeMatrix(blocks, W)
