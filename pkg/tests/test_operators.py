import numpy as np
import pytest

from sphere_blasso.errors import Nondifferentiable, StratumBoundary
from sphere_blasso.geometry import ProblemInstance, SparseMeasure, normalize
from sphere_blasso.operators import (adjoint_eval, adjoint_eval_many, adjoint_grad,
                                     derivative_matrix, evaluation_matrix, forward)


def random_instance(rng, n, d):
    return ProblemInstance(rng.normal(size=(n, d)), rng.normal(size=n), 0.1)


def random_measure(rng, N, d):
    W = rng.normal(size=(N, d))
    return SparseMeasure.from_atoms(rng.normal(size=N), W)


def test_forward_single_atom():
    inst = ProblemInstance([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]], [0, 0, 0])
    m = SparseMeasure.from_atoms([2.0], [[1.0, 1.0]])
    np.testing.assert_allclose(forward(m, inst), [np.sqrt(2), np.sqrt(2), 0.0])
    assert np.all(forward(SparseMeasure.empty(2), inst) == 0)


def test_adjointness_identity():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n, d, N = rng.integers(1, 9), rng.integers(2, 5), rng.integers(0, 6)
        inst = random_instance(rng, n, d)
        mu = random_measure(rng, N, d)
        p = rng.normal(size=n)
        lhs = float(forward(mu, inst) @ p)
        rhs = sum(c * adjoint_eval(p, w, inst) for c, w in zip(mu.coefficients, mu.locations))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_eta_positively_homogeneous():
    rng = np.random.default_rng(1)
    inst = random_instance(rng, 5, 3)
    p = rng.normal(size=5)
    w = rng.normal(size=3)
    assert abs(adjoint_eval(p, 3.7 * w, inst) - 3.7 * adjoint_eval(p, w, inst)) < 1e-12
    ws = rng.normal(size=(10, 3))
    np.testing.assert_allclose(adjoint_eval_many(p, ws, inst),
                               [adjoint_eval(p, w, inst) for w in ws], atol=1e-13)


def _tangent_fd(p, w, t, inst, h=1e-6):
    fp = adjoint_eval(p, normalize(w + h * t), inst)
    fm = adjoint_eval(p, normalize(w - h * t), inst)
    return (fp - fm) / (2 * h)


def test_adjoint_grad_matches_finite_differences():
    rng = np.random.default_rng(2)
    done = 0
    while done < 100:
        n, d = rng.integers(1, 8), rng.integers(2, 5)
        inst = random_instance(rng, n, d)
        p = rng.normal(size=n)
        w = np.array(normalize(rng.normal(size=d)))
        if np.min(np.abs(inst.points @ w)) < 1e-4:
            continue
        g = adjoint_grad(p, w, inst)
        assert abs(g @ w) < 1e-12
        for t in np.eye(d):
            t = t - (t @ w) * w
            fd = _tangent_fd(p, w, t, inst)
            assert abs(fd - g @ t) <= 1e-5 * max(1.0, abs(fd))
        done += 1


def test_adjoint_grad_raises_on_kink():
    inst = ProblemInstance([[1.0, 0.0], [0.0, 1.0]], [0, 0])
    with pytest.raises(Nondifferentiable):
        adjoint_grad([1.0, 1.0], np.array([0.0, 1.0]), inst)
    # a kink with zero weight is harmless
    adjoint_grad([0.0, 1.0], np.array([0.0, 1.0]), inst)


def test_evaluation_matrix_flags_boundary():
    inst = ProblemInstance([[1.0, 0.0], [0.0, 1.0]], [0, 0])
    ev = evaluation_matrix([[1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)]], inst)
    assert ev.pattern.tolist() == [[1, 0], [1, 1]]
    assert ev.has_boundary_atoms
    assert ev.flagged[0, 1] and not ev.flagged[1].any()


def test_derivative_matrix_blocks():
    rng = np.random.default_rng(3)
    inst = random_instance(rng, 4, 3)
    W = np.array([normalize(rng.normal(size=3)) for _ in range(2)])
    D = derivative_matrix(W, inst)
    for i, w in enumerate(W):
        for j, x in enumerate(inst.points):
            expect = (x - (x @ w) * w) if x @ w > 0 else np.zeros(3)
            np.testing.assert_allclose(D.blocks[i, j], expect, atol=1e-14)
            assert abs(D.blocks[i, j] @ w) < 1e-13


def test_derivative_matrix_rejects_boundary_atom():
    inst = ProblemInstance([[1.0, 0.0], [0.0, 1.0]], [0, 0])
    with pytest.raises(StratumBoundary) as exc:
        derivative_matrix([[1.0, 0.0]], inst)
    assert exc.value.atom == 0 and exc.value.hyperplane == 1
