"""Command-line interface.

Exit codes: 0 on success, 1 if a certificate or check fails, 2 on input errors.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import click
import numpy as np

from . import io, plots
from .arrangement import cover_count, enumerate_strata, full_regions, sparsity_bound, strata_by_codim
from .certificate import check_LC, check_ND, dual_from_primal
from .conditions import check_full_rank, check_independence
from .config import RunConfig, load_config
from .errors import AtomCountChanged, ConfigError, SolverFailed, StratumBoundary
from .geometry import SparseMeasure
from .solver import measure_objective, solve, stability_sweep, sweep_lambda

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _out_dir(cfg: RunConfig, override) -> Path:
    p = Path(override if override is not None else cfg.output_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load(path) -> RunConfig:
    try:
        return load_config(path)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)


def _certificate_samples(cert, count: int = 3600):
    th = np.arange(count) * (2 * math.pi / count)
    W = np.column_stack([np.cos(th), np.sin(th)])
    return th, W, cert.eta_many(W)


def solution_payload(cfg: RunConfig, rep) -> dict:
    base = rep.to_dict()
    base.pop("lambda")
    return {
        "lambda": cfg.lam,
        "fidelity": cfg.fidelity,
        "lambda_canonical": rep.dual.instance.lam,
        **base,
        "saturation_errors": [float(e) for e in rep.saturation_errors],
        "iterations_run": int(rep.iterations_run),
    }


def _measure_from_solution(path, d: int) -> SparseMeasure:
    try:
        data = io.read_json(path)
        atoms = data["atoms"]
        c = np.array([a["c"] for a in atoms], dtype=float)
        W = np.array([a["w"] for a in atoms], dtype=float).reshape(len(atoms), d)
        return SparseMeasure.from_atoms(c, W) if len(atoms) else SparseMeasure.empty(d)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        click.echo(f"error: cannot read solution file: {exc}", err=True)
        sys.exit(EXIT_INPUT)


@click.group()
def main():
    """Sparse-measure training of shallow ReLU networks with certificates."""


@main.command("solve")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None, help="Overrides output_dir of the config.")
def solve_cmd(config, output_dir):
    """Solve and certify; writes solution.json, certificate.csv and solution.svg."""
    cfg = _load(config)
    inst = cfg.instance()
    out = _out_dir(cfg, output_dir)
    rep = solve(inst, cfg.solver)
    io.write_json(out / "solution.json", solution_payload(cfg, rep))
    if inst.d == 2:
        th, W, eta = _certificate_samples(rep.dual)
        io.write_csv(out / "certificate.csv", ["theta", "w1", "w2", "eta"],
                     ([a, w[0], w[1], e] for a, w, e in zip(th, W, eta)))
        svg = plots.region_wheel(inst.points, rep.measure.coefficients, rep.measure.locations,
                                 eta, title=f"{len(rep.measure)} atoms")
        (out / "solution.svg").write_text(svg, encoding="utf-8")
    click.echo(f"{len(rep.measure)} atoms, objective {rep.objective:.10g}, "
               f"sup|eta| {rep.sup_abs_eta:.6f}, certified {rep.certified}")
    sys.exit(EXIT_OK if rep.certified else EXIT_FAIL)


def certify_payload(cfg: RunConfig, measure: SparseMeasure) -> dict:
    inst = cfg.instance()
    strata = enumerate_strata(inst)
    cert = dual_from_primal(measure, inst)
    lc = check_LC(cert, measure, strata, cfg.certify.tol_sat, cfg.certify.match_radius)
    nd = []
    for w in measure.locations:
        try:
            nd.append(check_ND(cert, w, strata, cfg.certify.nd_tol).to_dict())
        except Exception as exc:  # EmptyFamily: report, do not abort
            nd.append({"holds": False, "error": str(exc)})
    ind = check_independence(measure.locations, inst) if len(measure) else None
    try:
        fr = check_full_rank(measure.locations, inst).to_dict() if len(measure) else None
    except StratumBoundary as exc:
        fr = {"full_rank": False, "reason": f"not applicable: {exc}"}
    return {
        "lambda": cfg.lam,
        "objective": measure_objective(measure, inst),
        "dual_p": [float(v) for v in cert.p],
        "lc": lc.to_dict(),
        "nd": nd,
        "independence": None if ind is None else ind.to_dict(),
        "full_rank": fr,
    }


@main.command("certify")
@click.argument("config", type=click.Path(dir_okay=False))
@click.argument("solution", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None)
def certify_cmd(config, solution, output_dir):
    """Localization, non-degeneracy and independence checks; writes certify.json."""
    cfg = _load(config)
    measure = _measure_from_solution(solution, len(cfg.points[0]))
    out = _out_dir(cfg, output_dir)
    payload = certify_payload(cfg, measure)
    io.write_json(out / "certify.json", payload)
    ok = payload["lc"]["holds"] and all(r["holds"] for r in payload["nd"])
    if payload["independence"] is not None:
        ok = ok and payload["independence"]["rank_full"]
    click.echo(f"LC {payload['lc']['holds']}, ND {all(r['holds'] for r in payload['nd'])}")
    sys.exit(EXIT_OK if ok else EXIT_FAIL)


@main.command("conditions")
@click.argument("config", type=click.Path(dir_okay=False))
@click.argument("solution", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None)
def conditions_cmd(config, solution, output_dir):
    """Independence and full-rank tests only; writes conditions.json."""
    cfg = _load(config)
    inst = cfg.instance()
    measure = _measure_from_solution(solution, inst.d)
    out = _out_dir(cfg, output_dir)
    ind = check_independence(measure.locations, inst)
    try:
        fr = check_full_rank(measure.locations, inst).to_dict()
    except StratumBoundary as exc:
        fr = {"full_rank": False, "reason": f"not applicable: {exc}"}
    io.write_json(out / "conditions.json", {"independence": ind.to_dict(), "full_rank": fr})
    click.echo(f"independent {ind.independent} ({ind.reason}), full rank {fr['full_rank']}")
    sys.exit(EXIT_OK if ind.rank_full else EXIT_FAIL)


def regions_payload(cfg: RunConfig) -> dict:
    inst = cfg.instance()
    strata = enumerate_strata(inst)
    return {
        "n": inst.n,
        "d": inst.d,
        "full_regions": len(full_regions(strata)),
        "strata_by_codim": {str(k): v for k, v in strata_by_codim(strata).items()},
        "cover_count": cover_count(inst.n, inst.d),
        "sparsity_bound": sparsity_bound(inst.n, inst.d),
        "witnesses": [
            {"sign_vector": list(s.ternary()), "codim": s.codim_label,
             "witness": [float(v) for v in s.witness]}
            for s in strata
        ],
    }


@main.command("regions")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None)
def regions_cmd(config, output_dir):
    """Enumerate dual regions and strata; writes regions.json."""
    cfg = _load(config)
    out = _out_dir(cfg, output_dir)
    payload = regions_payload(cfg)
    io.write_json(out / "regions.json", payload)
    click.echo(f"{payload['full_regions']} regions, cover_count {payload['cover_count']}, "
               f"sparsity bound {payload['sparsity_bound']}")


@main.command("sweep-lambda")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None)
def sweep_cmd(config, output_dir):
    """Atom count along a lambda grid; writes atoms_vs_lambda.csv and .svg."""
    cfg = _load(config)
    out = _out_dir(cfg, output_dir)
    grid = cfg.lambda_grid()
    sw = sweep_lambda(cfg.instance(), [cfg.to_canonical(l) for l in grid], cfg.solver)
    rows = sorted(sw.rows, key=lambda r: -r.lam)
    io.write_csv(out / "atoms_vs_lambda.csv", ["lambda", "atom_count", "objective", "certified"],
                 ([cfg.from_canonical(r.lam), r.atom_count, r.objective, r.certified] for r in rows))
    lam_user = [cfg.from_canonical(r.lam) for r in rows]
    svg = plots.line_plot(
        [{"x": lam_user, "y": [r.atom_count for r in rows], "label": "atoms", "style": "line"},
         {"x": lam_user, "y": [sw.bound] * len(rows), "label": f"bound {sw.bound}",
          "style": "line", "dash": "5 4"}],
        "lambda", "number of atoms", "Support size against lambda", logx=True)
    (out / "atoms_vs_lambda.svg").write_text(svg, encoding="utf-8")
    click.echo("counts " + " ".join(str(r.atom_count) for r in rows))
    if sw.inversions:
        click.echo(f"count inversions at rows {sw.inversions}")
    ok = all(r.certified and r.within_bound for r in rows)
    sys.exit(EXIT_OK if ok else EXIT_FAIL)


@main.command("stability")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None)
def stability_cmd(config, output_dir):
    """Deviation of atoms under label noise; writes stability.csv and two SVGs."""
    cfg = _load(config)
    out = _out_dir(cfg, output_dir)
    try:
        res = stability_sweep(cfg.instance(), cfg.stability_levels(), cfg.directions_seed,
                              cfg.solver)
    except (AtomCountChanged, SolverFailed) as exc:
        click.echo(f"stability sweep failed: {exc}", err=True)
        sys.exit(EXIT_FAIL)
    N = res.L_c.shape[1]
    rows = [[0.0, i, 0.0, 0.0] for i in range(N)]
    for k, s in enumerate(res.noise_norms):
        rows += [[float(s), i, res.L_c[k, i], res.L_w[k, i]] for i in range(N)]
    for i in range(N):
        rows.append([f"slope_c_{i}", i, res.fits_c[i][0], ""])
        rows.append([f"slope_w_{i}", i, "", res.fits_w[i][0]])
        rows.append([f"r2_c_{i}", i, res.fits_c[i][2], ""])
        rows.append([f"r2_w_{i}", i, "", res.fits_w[i][2]])
    io.write_csv(out / "stability.csv", ["noise_norm", "atom_index", "L_c", "L_w"], rows)
    for key, data, fits in (("c", res.L_c, res.fits_c), ("w", res.L_w, res.fits_w)):
        series = []
        for i in range(N):
            a, b, r2 = fits[i]
            series.append({"x": list(res.noise_norms), "y": list(data[:, i]),
                           "label": f"atom {i + 1}", "style": "marker"})
            series.append({"x": list(res.noise_norms), "y": [a * s + b for s in res.noise_norms],
                           "label": f"fit {i + 1}: slope {a:.3g}, R2 {r2:.4f}", "style": "line"})
        svg = plots.line_plot(series, "noise norm", f"L_{key}", f"Deviation L_{key}")
        (out / f"stability_L{key}.svg").write_text(svg, encoding="utf-8")
    click.echo(f"min R^2 {res.min_r2:.5f}")
    sys.exit(EXIT_OK)


@main.command("paper-repro")
@click.option("-o", "--output-dir", default=".", help="Where to write repro.csv.")
def repro_cmd(output_dir):
    """Run the built-in reference experiments and print a pass/fail table."""
    from .repro import run_all

    checks = run_all()
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_csv(out / "repro.csv", ["criterion", "passed", "detail"],
                 ([c.criterion, c.passed, c.detail] for c in checks))
    width = max(len(c.criterion) for c in checks)
    for c in checks:
        click.echo(f"{'PASS' if c.passed else 'FAIL'}  {c.criterion.ljust(width)}  {c.detail}")
    sys.exit(EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL)


if __name__ == "__main__":  # pragma: no cover
    main()
