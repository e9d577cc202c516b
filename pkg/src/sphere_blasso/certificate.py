"""Dual certificates and their exact global extrema on the sphere.

On each stratum the certificate is the linear function ``w -> <z~, w>``
where ``z~`` is the projection onto the stratum's flat of the gated sum
``sum_{j active} p_j x_j``.  Its extremes over the (closed) stratum are
therefore ``+-z~/||z~||`` when these lie in the closure, or otherwise sit
on a lower-dimensional face that is enumerated separately.  Scanning every
stratum gives ``sup |eta|`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .arrangement import CLOSURE_TOL, Stratum, enumerate_strata
from .errors import EmptyFamily, SolverFailed
from .geometry import RANK_TOL, ProblemInstance, SparseMeasure, angular_distance
from .operators import adjoint_eval, adjoint_eval_many, forward

GATE_ZERO = 1e-12
TOL_SAT = 1e-2
MATCH_RADIUS = 5e-2


@dataclass(frozen=True)
class DualCertificate:
    """Dual vector ``p`` together with the data it acts on."""

    p: np.ndarray
    instance: ProblemInstance

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(-1)
        if p.shape[0] != self.instance.n:
            raise ValueError(f"dual vector has length {p.shape[0]}, expected {self.instance.n}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def eta(self, w) -> float:
        return adjoint_eval(self.p, np.asarray(w, dtype=float), self.instance)

    def eta_many(self, ws) -> np.ndarray:
        return adjoint_eval_many(self.p, ws, self.instance)


def dual_from_primal(measure: SparseMeasure, instance: ProblemInstance) -> DualCertificate:
    """Dual vector ``p = -(K mu - y) / lam`` of a primal candidate."""
    if not instance.lam > 0:
        raise ValueError("dual_from_primal needs lambda > 0")
    r = forward(measure, instance) - instance.labels
    return DualCertificate(-r / instance.lam, instance)


@dataclass(frozen=True)
class CandidatePoint:
    stratum: Stratum
    z_tilde: np.ndarray
    location: np.ndarray
    value: float
    in_closure: bool


def gated_vector(p, stratum: Stratum, points) -> np.ndarray:
    """Projected gated sum ``P_L sum_{j in J, s_j = +1} p_j x_j`` of a stratum."""
    X = np.asarray(points)
    z = np.zeros(X.shape[1])
    for j, s in zip(stratum.strict, stratum.signs):
        if s > 0:
            z = z + p[j] * X[j]
    return stratum.flat.project(z)


def candidates(cert: DualCertificate, strata: Sequence[Stratum]) -> list:
    """Both orientations ``+-z~/||z~||`` of every stratum with a nonzero gated vector.

    Raises ``AssertionError`` if a stratum's closure contained both
    orientations with a nonzero value, which the cone geometry rules out.
    """
    X = cert.instance.points
    out = []
    for st in strata:
        zt = gated_vector(cert.p, st, X)
        nrm = float(np.linalg.norm(zt))
        if not nrm > GATE_ZERO:
            continue
        u = zt / nrm
        inside = []
        for loc in (u, -u):
            val = cert.eta(loc)
            member = st.contains_closure(loc, X)
            inside.append(member and abs(val) > CLOSURE_TOL)
            out.append(CandidatePoint(st, zt, loc, val, member))
        assert not all(inside), "antipodal candidates in one closed stratum"
    return out


def closure_candidates(cert: DualCertificate, strata: Sequence[Stratum],
                       dedup_radius: float = 1e-9) -> list:
    """In-closure candidates, each location kept once for the first (lowest codim) stratum.

    ``strata`` must be in the order produced by ``enumerate_strata``.
    """
    kept: list = []
    for cand in candidates(cert, strata):
        if not cand.in_closure:
            continue
        if any(np.linalg.norm(cand.location - k.location) <= dedup_radius for k in kept):
            continue
        kept.append(cand)
    return kept


def sup_abs(cert: DualCertificate, strata: Optional[Sequence[Stratum]] = None):
    """Exact ``sup_{|w|=1} |eta(w)|`` and the candidate attaining it.

    Returns ``(0.0, None)`` when the certificate vanishes identically.
    """
    if strata is None:
        strata = enumerate_strata(cert.instance)
    best, arg = 0.0, None
    for cand in candidates(cert, strata):
        if cand.in_closure and abs(cand.value) > best:
            best, arg = abs(cand.value), cand
    return best, arg


@dataclass
class ExtendedSupport:
    """Candidates where ``|eta| = 1`` up to ``tol_sat``, with their signs."""

    points: list
    tol_sat: float

    @property
    def locations(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 0))
        return np.array([c.location for c, _ in self.points])


def extended_support(cert: DualCertificate, strata: Sequence[Stratum],
                     tol_sat: float = TOL_SAT) -> ExtendedSupport:
    pts = []
    for cand in closure_candidates(cert, strata):
        if abs(abs(cand.value) - 1.0) <= tol_sat:
            pts.append((cand, 1 if cand.value > 0 else -1))
    return ExtendedSupport(pts, tol_sat)


@dataclass
class LCReport:
    holds: bool
    sup_abs_eta: float
    saturating: list
    strict_count: int
    unmatched_candidates: list
    unmatched_atoms: list
    tol_sat: float
    match_radius: float

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "sup_abs_eta": self.sup_abs_eta,
            "saturating": [
                {"w": [float(v) for v in c.location], "value": float(c.value),
                 "codim": c.stratum.codim_label}
                for c in self.saturating
            ],
            "strict_count": self.strict_count,
            "unmatched_candidates": [[float(v) for v in c.location] for c in self.unmatched_candidates],
            "unmatched_atoms": list(self.unmatched_atoms),
            "tol_sat": self.tol_sat,
            "match_radius": self.match_radius,
        }


def check_LC(cert: DualCertificate, measure: SparseMeasure, strata: Sequence[Stratum],
             tol_sat: float = TOL_SAT, match_radius: float = MATCH_RADIUS) -> LCReport:
    """Localization test: ``|eta| = 1`` exactly at the atoms, ``< 1`` elsewhere.

    A saturating candidate matches an atom when it is within ``match_radius``
    (angular) and ``sign(eta)`` equals the sign of the coefficient.
    """
    cands = closure_candidates(cert, strata)
    sup = max((abs(c.value) for c in cands), default=0.0)
    sat = [c for c in cands if abs(c.value) >= 1.0 - tol_sat]
    signs = np.sign(measure.coefficients)

    def matches(c, i):
        return (angular_distance(c.location, measure.locations[i]) <= match_radius
                and np.sign(c.value) == signs[i])

    unmatched_c = [c for c in sat if not any(matches(c, i) for i in range(len(measure)))]
    unmatched_a = [i for i in range(len(measure)) if not any(matches(c, i) for c in sat)]
    holds = not unmatched_c and not unmatched_a and sup <= 1.0 + tol_sat
    return LCReport(holds, sup, sat, len(cands) - len(sat), unmatched_c, unmatched_a,
                    tol_sat, match_radius)


@dataclass
class NDReport:
    holds: bool
    min_gap: float
    family_size: int
    nonzero_members: int
    stratum: Stratum
    vacuous: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "min_gap": None if not np.isfinite(self.min_gap) else float(self.min_gap),
            "family_size": self.family_size,
            "nonzero_members": self.nonzero_members,
            "stratum": list(self.stratum.ternary()),
            "vacuous": self.vacuous,
            "tol": self.tol,
        }


def locate(w, strata: Sequence[Stratum], points, eq_tol: float = 1e-6) -> Optional[Stratum]:
    """The stratum whose sign vector matches ``w`` (inner products within ``eq_tol`` count as 0)."""
    X = np.asarray(points)
    s = X @ np.asarray(w, dtype=float)
    tern = tuple(0 if abs(v) <= eq_tol else (1 if v > 0 else -1) for v in s)
    for st in strata:
        if st.ternary() != tern:
            continue
        if st.component and st.flat.dim == 1 and st.component * float(st.flat.basis[0] @ w) < 0:
            continue
        return st
    return None


def compatible_family(stratum: Stratum, strata: Sequence[Stratum]) -> list:
    """Strata whose strict set contains ``stratum.strict`` with the same signs there."""
    own = dict(zip(stratum.strict, stratum.signs))
    fam = []
    for st in strata:
        sig = dict(zip(st.strict, st.signs))
        if all(j in sig and sig[j] == s for j, s in own.items()):
            fam.append(st)
    return fam


def check_ND(cert: DualCertificate, atom, strata: Sequence[Stratum], tol: float = 1e-6,
             eq_tol: float = 1e-6) -> NDReport:
    """Pairwise distinctness of normalized gated vectors around an atom.

    Raises
    ------
    EmptyFamily
        If no enumerated stratum matches the atom's sign vector.
    """
    X = cert.instance.points
    st = locate(atom, strata, X, eq_tol)
    if st is None:
        raise EmptyFamily("atom does not lie on any enumerated stratum")
    fam = compatible_family(st, strata)
    if not fam:
        raise EmptyFamily("compatible family is empty")
    dirs = []
    for member in fam:
        z = gated_vector(cert.p, member, X)
        nrm = np.linalg.norm(z)
        if nrm > GATE_ZERO:
            dirs.append(z / nrm)
    gap = np.inf
    for a in range(len(dirs)):
        for b in range(a + 1, len(dirs)):
            gap = min(gap, float(np.linalg.norm(dirs[a] - dirs[b])))
    vacuous = len(dirs) < 2
    return NDReport(vacuous or gap > tol, gap, len(fam), len(dirs), st, vacuous, tol)


@dataclass
class MinNormApprox:
    certificate: DualCertificate
    lambdas: list
    certificates: list
    cauchy_gaps: list = field(default_factory=list)
    reports: list = field(default_factory=list)


def min_norm_certificate_approx(instance: ProblemInstance,
                                lambdas: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5),
                                config=None, strata=None) -> MinNormApprox:
    """Approximate the minimal-norm interpolation certificate by lambda-continuation.

    Each solve is warm-started from the previous one.  ``cauchy_gaps[k]`` is
    ``sup |eta_k - eta_{k+1}|`` computed exactly over the arrangement.

    Raises
    ------
    SolverFailed
        If an inner solve is not certified.
    """
    from .solver import SolverConfig, solve  # solver depends on this module

    lambdas = [float(l) for l in lambdas]
    if any(l <= 0 for l in lambdas) or any(a <= b for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambdas must be positive and strictly decreasing")
    if config is None:
        config = SolverConfig()
    if strata is None:
        strata = enumerate_strata(instance)
    certs, reports = [], []
    warm = None
    for lam in lambdas:
        rep = solve(instance.with_lambda(lam), config, warm_start=warm, strata=strata)
        if not rep.certified:
            raise SolverFailed(f"solve at lambda={lam:g} not certified "
                               f"(sup|eta| = {rep.sup_abs_eta:.4g})")
        certs.append(rep.dual)
        reports.append(rep)
        warm = rep.measure
    gaps = []
    for a, b in zip(certs, certs[1:]):
        diff = DualCertificate(a.p - b.p, instance)
        gaps.append(sup_abs(diff, strata)[0])
    return MinNormApprox(certs[-1], lambdas, certs, gaps, reports)
