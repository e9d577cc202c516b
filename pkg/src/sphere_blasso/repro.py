"""Reproduction checks for the built-in reference experiments."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .arrangement import cover_count, enumerate_strata, full_regions
from .conditions import check_full_rank, check_independence
from .errors import AtomCountChanged, SolverFailed
from .geometry import angular_distance
from .instances import FIG1_ATOMS, FIG4_SINGULAR_VALUES, fig1_config, fig4_config
from .solver import SolverConfig, match_atoms, solve, stability_sweep, sweep_lambda


@dataclass
class Check:
    criterion: str
    passed: bool
    detail: str


def check_fig1(config: Optional[SolverConfig] = None) -> list:
    cfg = fig1_config() if config is None else fig1_config(solver=config)
    inst = cfg.instance()
    t0 = time.perf_counter()
    rep = solve(inst, cfg.solver)
    elapsed = time.perf_counter() - t0
    m = rep.measure
    ref_c = np.array([c for c, _ in FIG1_ATOMS])
    ref_w = np.array([np.array(w) / np.linalg.norm(w) for _, w in FIG1_ATOMS])
    ok = len(m) == 3
    detail = f"{len(m)} atoms"
    if ok:
        idx = match_atoms(ref_w, m.locations)
        ang = max(angular_distance(ref_w[i], m.locations[j]) for i, j in enumerate(idx))
        dc = max(abs(ref_c[i] - m.coefficients[j]) for i, j in enumerate(idx))
        sat = float(np.max(rep.saturation_errors))
        ok = ang <= 2e-2 and dc <= 5e-2 and rep.sup_abs_eta <= 1 + 1e-2 and sat <= 1e-2
        detail += (f", max angle {ang:.2e}, max |dc| {dc:.2e}, sup|eta| {rep.sup_abs_eta:.6f}, "
                   f"max saturation error {sat:.2e}, {elapsed:.1f} s")
    return [Check("1 three-atom solution and certificate", bool(ok), detail)]


def check_regions() -> list:
    cfg = fig1_config()
    strata = enumerate_strata(cfg.instance())
    r = len(full_regions(strata))
    xi = cover_count(5, 2)
    return [Check("2 full-dimensional region count", r == 10 and xi == 10,
                  f"{r} regions, cover_count(5,2) = {xi}")]


def check_sweep(config: Optional[SolverConfig] = None) -> list:
    cfg = fig1_config() if config is None else fig1_config(solver=config)
    inst = cfg.instance()
    lams = [cfg.to_canonical(l) for l in cfg.lambda_grid()]
    sw = sweep_lambda(inst, lams, cfg.solver)
    counts = [r.atom_count for r in sw.rows]
    certified = [r for r in sw.rows if r.certified]
    ok = all(r.atom_count <= 10 for r in certified) and sw.monotone_up_to_one
    detail = f"counts {counts}, certified {len(certified)}/{len(sw.rows)}"
    if sw.inversions:
        detail += f", inversions at rows {sw.inversions}"
    return [Check("3 sparsity bound along the lambda grid", bool(ok), detail)]


def check_interior(config: Optional[SolverConfig] = None) -> list:
    cfg = fig4_config() if config is None else fig4_config(solver=config)
    inst = cfg.instance()
    rep = solve(inst, cfg.solver)
    m = rep.measure
    if len(m) != 2:
        return [Check("4 interior two-atom setup", False, f"{len(m)} atoms"),
                Check("4 reference minor [[1,0],[1,1]] on columns 1,2", False, "not evaluated")]
    margin = float(np.min(np.abs(m.locations @ inst.points.T)))
    fr = check_full_rank(m.locations, inst)
    sv = np.sort(fr.singular_values)[::-1]
    sv_err = float(np.max(np.abs(sv - np.array(FIG4_SINGULAR_VALUES))))
    ind = check_independence(m.locations, inst)
    ok = margin > 1e-3 and fr.rank == 4 and sv_err <= 5e-2 and ind.independent \
        and ind.witness_minor == (0, 1) and ind.perm_value == abs(ind.det_value) == 1
    first = Check("4 interior two-atom setup", bool(ok),
                  f"margin {margin:.3g}, rank {fr.rank}, singular values "
                  f"{np.array2string(sv, precision=3)}, max deviation {sv_err:.3g}, "
                  f"witness columns {ind.witness_minor}, perm {ind.perm_value}, det {ind.det_value}")
    pi = np.array(ind.pattern)
    # atom order is arbitrary, so either row order may match
    minors = {tuple(map(tuple, pi[perm][:, :2])) for perm in ([0, 1], [1, 0])}
    literal = ((1, 0), (1, 1)) in minors
    second = Check("4 reference minor [[1,0],[1,1]] on columns 1,2", literal,
                   f"columns 1,2 of the activation pattern: {pi[:, :2].tolist()}")
    return [first, second]


def check_stability(config: Optional[SolverConfig] = None) -> list:
    cfg = fig4_config() if config is None else fig4_config(solver=config)
    inst = cfg.instance()
    try:
        res = stability_sweep(inst, cfg.stability_levels(), cfg.directions_seed, cfg.solver)
    except (AtomCountChanged, SolverFailed) as exc:
        return [Check("5 linear stability rates", False, str(exc))]
    r2 = [f[2] for f in res.fits_c + res.fits_w]
    ok = len(res.baseline.measure) == 2 and min(r2) >= 0.95
    return [Check("5 linear stability rates", bool(ok),
                  "R^2 " + ", ".join(f"{v:.5f}" for v in r2))]


def run_all(config: Optional[SolverConfig] = None) -> list:
    checks = []
    checks += check_fig1(config)
    checks += check_regions()
    checks += check_sweep(config)
    checks += check_interior(config)
    checks += check_stability(config)
    return checks
