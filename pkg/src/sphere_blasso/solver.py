"""Particle solver for the TV-regularized measure problem.

The measure is represented by ``m`` weighted particles ``c_i delta_{u_i/|u_i|}``
and the finite objective ``0.5 |K mu - y|^2 + lam sum |c_i|`` is minimized by
ADAM over ``(c, u)``.  Small coefficients are pruned periodically.  After the
main loop nearby atoms are merged and a short ADAM polish is run.

A final refinement fixes the activation cone of every surviving atom.  With
the cones fixed, ``relu(<w, x_j>)`` is linear in ``v = |c| w`` so the problem
becomes a small convex program (a cone-constrained group lasso), which is
solved to high accuracy.  Atoms may move onto cone faces, which is how
minimizers that sit on a data hyperplane are reached.  When an atom rests on
a face the neighbouring cone is tried as well.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .arrangement import enumerate_strata, sparsity_bound
from .certificate import DualCertificate, dual_from_primal, sup_abs
from .errors import AtomCountChanged, ZeroVector
from .geometry import ZERO_NORM, ProblemInstance, SparseMeasure, angular_distance

THREADS_ENV = "SPHERE_BLASSO_THREADS"


@dataclass(frozen=True)
class SolverConfig:
    particles: int = 2000
    step_size: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    max_iters: int = 20000
    prune_every: int = 200
    prune_threshold: float = 1e-2
    merge_radius: float = 1e-3
    seed: int = 0
    cert_tolerance: float = 1e-2
    polish_iters: int = 500
    aggregate_cones: bool = True
    refine: bool = True
    restarts: int = 3

    def __post_init__(self):
        for name in ("particles", "step_size", "adam_eps", "max_iters", "prune_every",
                     "prune_threshold", "merge_radius", "cert_tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.adam_beta1 < 1 or not 0 < self.adam_beta2 < 1:
            raise ValueError("ADAM betas must lie in (0, 1)")
        if self.prune_every > self.max_iters:
            raise ValueError("prune_every must not exceed max_iters")
        if self.seed < 0 or self.polish_iters < 0 or self.restarts < 0:
            raise ValueError("seed, polish_iters and restarts must be nonnegative")


# ---------------------------------------------------------------------------
# finite objective


def _directions(u: np.ndarray):
    u = np.atleast_2d(np.asarray(u, dtype=float))
    norms = np.linalg.norm(u, axis=1)
    if np.any(norms <= ZERO_NORM):
        raise ZeroVector("particle direction with zero norm")
    return u / norms[:, None], norms


def residual(c, u, instance: ProblemInstance) -> np.ndarray:
    W, _ = _directions(u) if len(c) else (np.zeros((0, instance.d)), None)
    act = np.maximum(W @ instance.points.T, 0.0)
    return np.asarray(c, dtype=float) @ act - instance.labels


def objective(c, u, instance: ProblemInstance) -> float:
    """``0.5 sum_j (sum_i c_i relu<u_i/|u_i|, x_j> - y_j)^2 + lam sum_i |c_i|``."""
    c = np.asarray(c, dtype=float)
    r = residual(c, u, instance)
    return 0.5 * float(r @ r) + instance.lam * float(np.abs(c).sum())


def measure_objective(measure: SparseMeasure, instance: ProblemInstance) -> float:
    if len(measure) == 0:
        return 0.5 * float(instance.labels @ instance.labels)
    return objective(measure.coefficients, measure.locations, instance)


def gradient(c, u, instance: ProblemInstance):
    """Gradient in ``(c, u)``; ``relu'(0) = 0`` and ``sign(0) = 0``."""
    c = np.asarray(c, dtype=float)
    W, norms = _directions(u)
    X = instance.points
    inner = W @ X.T
    act = np.maximum(inner, 0.0)
    r = c @ act - instance.labels
    grad_c = act @ r + instance.lam * np.sign(c)
    g = ((inner > 0) * r) @ X  # (N, d)
    g = g - np.sum(g * W, axis=1)[:, None] * W
    grad_u = (c / norms)[:, None] * g
    return grad_c, grad_u


# ---------------------------------------------------------------------------
# reports


@dataclass
class PruneEvent:
    iteration: int
    removed: int
    objective_before: float
    objective_after: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.objective_after - self.objective_before <= self.bound + 1e-12


@dataclass
class SolveReport:
    measure: SparseMeasure
    objective: float
    dual: DualCertificate
    sup_abs_eta: float
    saturation_errors: np.ndarray
    certified: bool
    iterations_run: int
    atom_count_history: list = field(default_factory=list)
    prune_events: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)
    initial_objective: float = float("nan")
    refined: bool = False

    def to_dict(self) -> dict:
        inst = self.dual.instance
        return {
            "lambda": inst.lam,
            "noise": None if inst.noise is None else [float(z) for z in inst.noise],
            "atoms": [
                {"c": float(c), "w": [float(v) for v in w]}
                for c, w in zip(self.measure.coefficients, self.measure.locations)
            ],
            "objective": float(self.objective),
            "dual_p": [float(v) for v in self.dual.p],
            "sup_abs_eta": float(self.sup_abs_eta),
            "certified": bool(self.certified),
        }


# ---------------------------------------------------------------------------
# ADAM loop


def _adam_run(c, u, instance, cfg: SolverConfig, iters: int, prune: bool,
              step_decay: bool = False, history=None, events=None, trace=None, offset=0):
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    mc, vc = np.zeros_like(c), np.zeros_like(c)
    mu_, vu = np.zeros_like(u), np.zeros_like(u)
    t = 0
    for it in range(1, iters + 1):
        if len(c) == 0:
            break
        gc, gu = gradient(c, u, instance)
        t += 1
        mc = b1 * mc + (1 - b1) * gc
        vc = b2 * vc + (1 - b2) * gc * gc
        mu_ = b1 * mu_ + (1 - b1) * gu
        vu = b2 * vu + (1 - b2) * gu * gu
        lr = cfg.step_size * (1.0 - (it - 1) / iters) if step_decay else cfg.step_size
        ac = lr * np.sqrt(1 - b2 ** t) / (1 - b1 ** t)
        c = c - ac * mc / (np.sqrt(vc) + eps)
        u = u - ac * mu_ / (np.sqrt(vu) + eps)
        # keep |u| = 1: the objective is invariant and this avoids drift of the scale
        u = u / np.linalg.norm(u, axis=1)[:, None]
        if trace is not None and (it % 100 == 0 or it == iters):
            trace.append((offset + it, objective(c, u, instance)))
        if prune and it % cfg.prune_every == 0:
            if cfg.aggregate_cones:
                c, u, (mc, vc, mu_, vu) = aggregate_particles(c, u, instance.points,
                                                              (mc, vc, mu_, vu))
            keep = np.abs(c) >= cfg.prune_threshold
            if not keep.all():
                before = objective(c, u, instance)
                r = residual(c, u, instance)
                k = int((~keep).sum())
                xmax = float(np.max(np.linalg.norm(instance.points, axis=1)))
                mass = float(np.abs(c[~keep]).sum())
                bound = mass * xmax * float(np.abs(r).sum()) + 0.5 * instance.n * (mass * xmax) ** 2
                c, u = c[keep], u[keep]
                mc, vc, mu_, vu = mc[keep], vc[keep], mu_[keep], vu[keep]
                if events is not None:
                    events.append(PruneEvent(offset + it, k, before,
                                             objective(c, u, instance), bound))
            if history is not None:
                history.append((offset + it, len(c)))
    return c, u, offset + iters


def aggregate_particles(c, u, X, moments=()):
    """Replace particles sharing a coefficient sign and activation pattern by one.

    The replacement is ``v = sum |c_i| w_i`` (``c = +-|v|``, ``w = v/|v|``).  It lies
    in the same closed cone, gives the same network output and has total
    variation ``|v| <= sum |c_i|``, so the objective cannot increase.  The
    optimizer state of the heaviest member is kept.
    """
    groups: dict = {}
    for i in range(len(c)):
        if c[i] == 0:
            continue
        groups.setdefault(_cone_key(u[i], c[i], X, 0.0), []).append(i)
    order = sorted(groups.values(), key=lambda g: g[0])
    new_c, new_u, rep = [], [], []
    for g in order:
        v = (np.abs(c[g])[:, None] * u[g]).sum(axis=0)
        nv = np.linalg.norm(v)
        if nv <= ZERO_NORM:
            continue
        new_c.append(np.sign(c[g[0]]) * nv)
        new_u.append(v / nv)
        rep.append(g[int(np.argmax(np.abs(c[g])))])
    d = u.shape[1]
    new_c = np.array(new_c)
    new_u = np.array(new_u).reshape(len(new_c), d)
    return new_c, new_u, tuple(m[rep] for m in moments)


def merge_atoms(c, W, radius: float):
    """Greedily merge atoms closer than ``radius`` (angular), summing coefficients.

    The merged direction is the |c|-weighted mean of the group.
    """
    c = np.asarray(c, dtype=float)
    W = np.asarray(W, dtype=float)
    order = np.argsort(-np.abs(c), kind="stable")
    used = np.zeros(len(c), dtype=bool)
    out_c, out_w = [], []
    for i in order:
        if used[i]:
            continue
        group = [k for k in order if not used[k] and angular_distance(W[i], W[k]) <= radius]
        for k in group:
            used[k] = True
        wts = np.abs(c[group])
        v = (wts[:, None] * W[group]).sum(axis=0)
        nv = np.linalg.norm(v)
        out_w.append(v / nv if nv > ZERO_NORM else W[i])
        out_c.append(float(c[group].sum()))
    return np.array(out_c), np.array(out_w).reshape(len(out_c), W.shape[1])


# ---------------------------------------------------------------------------
# cone-restricted refinement


def _cone_key(w, s, X, tol):
    inner = X @ w
    return (int(np.sign(s)),) + tuple(int(v > tol) for v in inner)


def _aggregate_by_cone(c, W, X, tol=1e-9):
    """Sum ``|c| w`` over atoms sharing a coefficient sign and activation pattern.

    Within one closed cone the network output only depends on that sum, and
    its norm is at most the summed mass, so this never increases the objective.
    """
    groups: dict = {}
    for ci, wi in zip(c, W):
        if ci == 0:
            continue
        key = _cone_key(wi, ci, X, tol)
        groups.setdefault(key, np.zeros(X.shape[1]))
        groups[key] = groups[key] + abs(ci) * wi
    keys = [k for k in groups if np.linalg.norm(groups[k]) > ZERO_NORM]
    sig = np.array([k[0] for k in keys], dtype=float)
    pats = np.array([k[1:] for k in keys], dtype=int).reshape(len(keys), X.shape[0])
    V = np.array([groups[k] for k in keys]).reshape(len(keys), X.shape[1])
    return sig, pats, V


def _cone_objective(V, sig, pats, instance, smooth=1e-30):
    X, y, lam = instance.points, instance.labels, instance.lam
    N, d = pats.shape[0], X.shape[1]
    V = V.reshape(N, d)
    pred = np.zeros(instance.n)
    for i in range(N):
        pred += sig[i] * pats[i] * (X @ V[i])
    r = pred - y
    norms = np.sqrt(np.sum(V * V, axis=1) + smooth)
    f = 0.5 * r @ r + lam * norms.sum()
    G = np.empty((N, d))
    for i in range(N):
        G[i] = sig[i] * ((pats[i] * r) @ X) + lam * V[i] / norms[i]
    return f, G.ravel()


def _solve_cones(sig, pats, V0, instance):
    """Minimize the fixed-pattern objective over the closed cones."""
    X = instance.points
    N, d = pats.shape[0], X.shape[1]
    if N == 0:
        return V0.reshape(0, d), 0.5 * float(instance.labels @ instance.labels)
    rows = []
    for i in range(N):
        for j in range(instance.n):
            s = 1.0 if pats[i, j] else -1.0
            a = np.zeros(N * d)
            a[i * d:(i + 1) * d] = s * X[j]
            rows.append(a)
    A = np.array(rows)
    cons = {"type": "ineq", "fun": lambda v: A @ v, "jac": lambda v: A}
    # start strictly feasible where possible: clip the initial guess into the cone
    res = minimize(_cone_objective, V0.ravel(), args=(sig, pats, instance), jac=True,
                   method="SLSQP", constraints=[cons],
                   options={"maxiter": 1000, "ftol": 1e-16})
    V = res.x.reshape(N, d)
    # SLSQP may end marginally outside a cone; project each atom back onto it
    V = np.array([_project_cone(V[i], pats[i], X) for i in range(N)]).reshape(N, d)
    return V, _cone_objective(V.ravel(), sig, pats, instance)[0]


def _project_cone(v, pat, X):
    """Euclidean projection onto ``{v : <v,x_j> >= 0 (pat_j = 1), <= 0 (pat_j = 0)}``."""
    from scipy.optimize import nnls

    G = np.where(pat[:, None] == 1, -X, X)  # cone is {G v <= 0}
    if np.all(G @ v <= 0):
        return v
    lam_, _ = nnls(G.T, v, maxiter=50 * G.shape[0])
    w = v - G.T @ lam_
    return w


def _drop_small(sig, pats, V, tol):
    keep = np.linalg.norm(V, axis=1) > tol
    return sig[keep], pats[keep], V[keep]


def _measure_from_cones(sig, V, d):
    if len(V) == 0:
        return SparseMeasure.empty(d)
    norms = np.linalg.norm(V, axis=1)
    return SparseMeasure(sig * norms, V / norms[:, None])


def refine_on_cones(measure: SparseMeasure, instance: ProblemInstance,
                    max_rounds: int = 20, face_tol: float = 1e-7) -> SparseMeasure:
    """Fixed-pattern convex refinement with a local search over neighbouring cones."""
    X = instance.points
    d = instance.d
    if len(measure) == 0:
        return measure
    sig, pats, V = _aggregate_by_cone(measure.coefficients, measure.locations, X)
    scale = max(1.0, float(np.abs(instance.labels).max()))
    V, f = _solve_cones(sig, pats, V, instance)
    sig, pats, V = _drop_small(sig, pats, V, 1e-9 * scale)
    for _ in range(max_rounds):
        improved = False
        for i in range(len(V)):
            vi = V[i]
            nv = np.linalg.norm(vi)
            inner = X @ vi / max(nv, ZERO_NORM)
            for j in np.flatnonzero(np.abs(inner) <= face_tol):
                trial = pats.copy()
                trial[i, j] = 1 - trial[i, j]
                Vt, ft = _solve_cones(sig, trial, V, instance)
                if ft < f - 1e-13 * max(1.0, abs(f)):
                    sig, pats, V = _drop_small(sig, trial, Vt, 1e-9 * scale)
                    f = ft
                    improved = True
                    break
            if improved:
                break
        if not improved:
            break
    # identical cones may have been produced by flips; merge them
    if len(V):
        m2 = _measure_from_cones(sig, V, d)
        sig, pats, V = _aggregate_by_cone(m2.coefficients, m2.locations, X)
        V, f = _solve_cones(sig, pats, V, instance)
        sig, pats, V = _drop_small(sig, pats, V, 1e-9 * scale)
    return _measure_from_cones(sig, V, d)


# ---------------------------------------------------------------------------
# driver


def certify(measure: SparseMeasure, instance: ProblemInstance, tol: float, strata=None):
    """Dual vector, exact ``sup|eta|``, per-atom saturation errors and the verdict."""
    dual = dual_from_primal(measure, instance)
    sup, _ = sup_abs(dual, strata if strata is not None else enumerate_strata(instance))
    errs = np.array([abs(dual.eta(w) - np.sign(c))
                     for c, w in zip(measure.coefficients, measure.locations)])
    ok = sup <= 1.0 + tol and bool(np.all(errs <= tol))
    return dual, sup, errs, ok


def _init_particles(m, d, seed, index=0, restart=0):
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(index), int(restart)]))
    u = rng.normal(size=(m, d))
    u /= np.linalg.norm(u, axis=1)[:, None]
    c = rng.uniform(-0.1, 0.1, size=m)
    return c, u


def _top_up(measure: SparseMeasure, m: int, d: int, seed, index, restart):
    """Atoms of ``measure`` followed by fresh zero-coefficient particles, ``m`` in total."""
    _, u = _init_particles(m, d, seed, index, restart)
    k = min(len(measure), m)
    c = np.concatenate([measure.coefficients[:k], np.zeros(m - k)])
    u = np.vstack([measure.locations[:k], u[: m - k]])
    return c, u


def solve(instance: ProblemInstance, config: Optional[SolverConfig] = None,
          warm_start: Optional[SparseMeasure] = None, strata=None,
          init=None, seed_index: int = 0) -> SolveReport:
    """Particle ADAM with pruning, merging, polish and certification.

    ``warm_start`` atoms are kept and topped up with fresh particles (zero
    coefficient) up to ``config.particles``.  ``init`` overrides the initial
    ``(c, u)`` entirely.  If the result is not certified, the surviving atoms
    are topped up with fresh particles and the pipeline is rerun with
    ``max_iters // 4`` iterations, at most ``config.restarts`` times.
    """
    cfg = config or SolverConfig()
    if not instance.lam > 0:
        raise ValueError("solve needs lambda > 0")
    d = instance.d
    if init is not None:
        c, u = (np.array(a, dtype=float) for a in init)
        u = u / np.linalg.norm(u, axis=1)[:, None]
    elif warm_start is not None and len(warm_start):
        c, u = _top_up(warm_start, cfg.particles, d, cfg.seed, seed_index, 0)
    else:
        c, u = _init_particles(cfg.particles, d, cfg.seed, seed_index)
    if strata is None:
        strata = enumerate_strata(instance)
    initial = objective(c, u, instance)
    history = [(0, len(c))]
    events: list = []
    trace = [(0, initial)]
    it = 0
    iters = cfg.max_iters
    best = None
    for restart in range(cfg.restarts + 1):
        if restart:
            c, u = _top_up(best[0], cfg.particles, d, cfg.seed, seed_index, restart)
            iters = max(cfg.prune_every, cfg.max_iters // 4)
        c, u, it = _adam_run(c, u, instance, cfg, iters, prune=True, history=history,
                             events=events, trace=trace, offset=it)
        keep = np.abs(c) >= cfg.prune_threshold
        c, u = c[keep], u[keep]
        if len(c):
            c, u = merge_atoms(c, u, cfg.merge_radius)
            c, u, it = _adam_run(c, u, instance, cfg, cfg.polish_iters, prune=False,
                                 step_decay=True, trace=trace, offset=it)
            keep = np.abs(c) >= cfg.prune_threshold
            c, u = c[keep], u[keep]
        history.append((it, len(c)))
        measure = SparseMeasure(c, u) if len(c) else SparseMeasure.empty(d)
        refined = False
        if cfg.refine and len(measure):
            cand = refine_on_cones(measure, instance)
            if measure_objective(cand, instance) <= measure_objective(measure, instance) + 1e-12:
                measure, refined = cand, True
                history.append((it, len(measure)))
        obj = measure_objective(measure, instance)
        dual, sup, errs, ok = certify(measure, instance, cfg.cert_tolerance, strata)
        if best is None or obj < best[1]:
            best = (measure, obj, dual, sup, errs, ok, refined)
        if ok:
            break
    measure, obj, dual, sup, errs, ok, refined = best
    return SolveReport(measure, obj, dual, sup, errs, ok, it, history, events, trace,
                       initial, refined)


# ---------------------------------------------------------------------------
# sweeps


def default_lambda_grid(lam_max: float = 1.0, lam_min: float = 5e-7, count: int = 11) -> np.ndarray:
    return np.geomspace(lam_max, lam_min, count)


def lambda_max(instance: ProblemInstance, strata=None) -> float:
    """``sup_w |K_* y|(w)``: for ``lam`` at or above it the zero measure is optimal."""
    cert = DualCertificate(instance.labels, instance)
    return sup_abs(cert, strata if strata is not None else enumerate_strata(instance))[0]


@dataclass
class SweepRow:
    lam: float
    atom_count: int
    objective: float
    certified: bool
    sup_abs_eta: float
    within_bound: bool
    report: Optional[SolveReport] = field(default=None, repr=False)


@dataclass
class LambdaSweep:
    rows: list
    bound: int
    lambda_max: float

    @property
    def inversions(self) -> list:
        """Indices ``k`` where the count drops from row ``k`` to row ``k+1`` (lambda decreasing)."""
        rows = sorted(self.rows, key=lambda r: -r.lam)
        return [k for k in range(len(rows) - 1) if rows[k + 1].atom_count < rows[k].atom_count]

    @property
    def monotone_up_to_one(self) -> bool:
        rows = sorted(self.rows, key=lambda r: -r.lam)
        inv = self.inversions
        return len(inv) == 0 or (
            len(inv) == 1 and rows[inv[0]].atom_count - rows[inv[0] + 1].atom_count == 1)


def sweep_lambda(instance: ProblemInstance, lambdas: Optional[Sequence[float]] = None,
                 config: Optional[SolverConfig] = None) -> LambdaSweep:
    """Solve along a decreasing lambda grid, warm-starting each solve from the previous.

    Because of the warm starts the solves run one after another.
    """
    cfg = config or SolverConfig()
    lams = sorted((float(l) for l in (default_lambda_grid() if lambdas is None else lambdas)),
                  reverse=True)
    if any(l <= 0 for l in lams):
        raise ValueError("lambda values must be positive")
    strata = enumerate_strata(instance)
    bound = sparsity_bound(instance.n, instance.d)
    rows = []
    warm = None
    for k, lam in enumerate(lams):
        rep = solve(instance.with_lambda(lam), cfg, warm_start=warm, strata=strata, seed_index=k)
        warm = rep.measure
        rows.append(SweepRow(lam, len(rep.measure), rep.objective, rep.certified,
                             rep.sup_abs_eta, len(rep.measure) <= bound, rep))
    return LambdaSweep(rows, bound, lambda_max(instance, strata))


def _thread_cap() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _solve_job(args):
    instance, cfg, index = args
    return solve(instance, cfg, seed_index=index)


def run_parallel(jobs: Sequence, workers: Optional[int] = None) -> list:
    """Run ``solve`` over ``(instance, config, seed_index)`` triples, results in job order."""
    workers = min(workers or _thread_cap(), len(jobs)) if jobs else 1
    if workers <= 1:
        return [_solve_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_solve_job, jobs))


def linear_fit(x, y):
    """Ordinary least squares ``y ~ a x + b``; returns ``(slope, intercept, r2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.column_stack([x, np.ones_like(x)])
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    ss_res = float(np.sum((y - (a * x + b)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return float(a), float(b), r2


def match_atoms(reference: np.ndarray, candidates: np.ndarray) -> list:
    """Greedy nearest-neighbour matching by angular distance; ``result[i]`` indexes ``candidates``."""
    pairs = sorted(
        (angular_distance(reference[i], candidates[k]), i, k)
        for i in range(len(reference)) for k in range(len(candidates))
    )
    out = [None] * len(reference)
    used = set()
    for _, i, k in pairs:
        if out[i] is None and k not in used:
            out[i] = k
            used.add(k)
    return out


def default_noise_levels(count: int = 8) -> np.ndarray:
    return np.linspace(5e-4, 2.4e-3, count)


@dataclass
class StabilityResult:
    noise_norms: np.ndarray
    L_c: np.ndarray  # (levels, N)
    L_w: np.ndarray
    baseline: SolveReport
    reports: list
    direction: np.ndarray
    fits_c: list  # per atom (slope, intercept, r2)
    fits_w: list

    @property
    def min_r2(self) -> float:
        return min(f[2] for f in self.fits_c + self.fits_w)


def noise_direction(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5EED]))
    z = rng.normal(size=n)
    return z / np.linalg.norm(z)


def stability_sweep(instance: ProblemInstance, noise_levels: Optional[Sequence[float]] = None,
                    directions_seed: int = 0, config: Optional[SolverConfig] = None,
                    workers: Optional[int] = None) -> StabilityResult:
    """Perturb the labels along one seeded unit direction and track the atoms.

    Raises
    ------
    SolverFailed
        If the baseline solve is not certified.
    AtomCountChanged
        If a perturbed solve has a different number of atoms than the baseline.
    """
    from .errors import SolverFailed

    cfg = config or SolverConfig()
    levels = np.asarray(default_noise_levels() if noise_levels is None else noise_levels, dtype=float)
    base = solve(instance, cfg)
    if not base.certified:
        raise SolverFailed("baseline solve not certified")
    zhat = noise_direction(instance.n, directions_seed)
    jobs = [(instance.with_noise(s * zhat), cfg, k + 1) for k, s in enumerate(levels)]
    reports = run_parallel(jobs, workers)
    N = len(base.measure)
    Lc = np.zeros((len(levels), N))
    Lw = np.zeros((len(levels), N))
    table = []
    for k, rep in enumerate(reports):
        table.append((float(levels[k]), len(rep.measure)))
        if len(rep.measure) != N:
            raise AtomCountChanged(
                f"noise level {levels[k]:.3g}: {len(rep.measure)} atoms, baseline has {N}",
                table=table)
        idx = match_atoms(base.measure.locations, rep.measure.locations)
        for i, j in enumerate(idx):
            Lc[k, i] = abs(rep.measure.coefficients[j] - base.measure.coefficients[i])
            Lw[k, i] = float(np.linalg.norm(rep.measure.locations[j] - base.measure.locations[i]))
    fits_c = [linear_fit(levels, Lc[:, i]) for i in range(N)]
    fits_w = [linear_fit(levels, Lw[:, i]) for i in range(N)]
    return StabilityResult(levels, Lc, Lw, base, reports, zhat, fits_c, fits_w)
