"""Command-line interface: ``dirac-entropy <command> [options]``."""

from __future__ import annotations

import argparse
import copy
import datetime
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from .area_law_harness import compare_report, format_report, run_sweep, sweep_csv, sweep_svg
from .dirac_symbols import CutoffSpec, DiracParams, LineSymbol, ScalarLineSymbol, symbol_check
from .entropy_functions import concavity_constant, eta
from .errors import ConfigError, DiracEntropyError, PreconditionError
from .io import hash_of, write_json
from .lattice_model import Region, TorusLattice, build_kernel, correlation_matrix, entanglement_entropy, schatten_commutator_slope
from .wiener_hopf import SectionSpec, hs_cross_norm, line_kernel, solve_section
from .widom_coefficient import widom_coefficient

COMMANDS = ("symbol-check", "coeff", "entropy", "sweep", "verify", "diagnostics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac-entropy",
        description="Entanglement entropy of the regularized Dirac vacuum and its area-law coefficient.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    helps = {
        "symbol-check": "check gamma algebra, projector identities and rotation covariance",
        "coeff": "Widom coefficient from one-dimensional finite sections",
        "entropy": "lattice entropy of a single region",
        "sweep": "lattice entropy sweep, quadratic fit and comparison with the coefficient",
        "verify": "fast analytic-oracle checks",
        "diagnostics": "Schatten quasi-norm scaling of the commutator",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", type=Path, help="config file (flat key = value text or .json)")
        p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
        p.add_argument("--output", type=Path, help="output directory (overrides output_dir)")
        p.add_argument("--kappa", type=float, nargs="+", help="Renyi orders (overrides kappa_list)")
        p.add_argument("--epsilon", type=float, help="regularization length")
        p.add_argument("--mass", type=float, help="mass")
        if name == "sweep":
            p.add_argument("--L", type=float, nargs="+", help="region sizes in sites")
    return parser


def resolve_config(args) -> dict:
    cfg = copy.deepcopy(cfgmod.load(args.config))
    if args.kappa:
        cfg["kappa_list"] = list(args.kappa)
    if args.epsilon is not None:
        cfg["epsilon"] = args.epsilon
    if args.mass is not None:
        cfg["mass"] = args.mass
    if getattr(args, "L", None):
        cfg.setdefault("sweep", {})["L_values"] = list(args.L)
    if args.output is not None:
        cfg["output_dir"] = str(args.output)
    cfgmod.validate(cfg, args.command)
    return cfg


def params_of(cfg: dict) -> DiracParams:
    cutoff = CutoffSpec.from_dict(cfg.get("cutoff", {}))
    return DiracParams(mass=cfg.get("mass", 0.0), epsilon=cfg.get("epsilon", 0.0), cutoff=cutoff)


def section_spec_of(cfg: dict) -> SectionSpec:
    wh = cfg.get("wiener_hopf", {})
    fields = {k: wh[k] for k in ("dx", "decay_lengths", "x_min", "n_max", "dx_max") if k in wh}
    return SectionSpec(**fields)


def lattice_of(cfg: dict) -> TorusLattice:
    lat = cfg["lattice"]
    return TorusLattice(float(lat["box_side"]), int(lat["points_per_dim"]))


def _tol(cfg, key, default):
    return cfg.get("tolerances", {}).get(key, default)


# ---------------------------------------------------------------- commands


def cmd_symbol_check(cfg, jobs):
    res = symbol_check(params_of(cfg))
    limits = {"anticommutator": 0.0, "idempotency": 1e-12, "trace": 1e-12, "eigenvalues": 1e-12, "covariance": 1e-10}
    checks = {k: bool(res[k] <= limits[k]) for k in limits}
    return {"residuals": res, "limits": limits, "checks": checks, "pass": all(checks.values())}


def cmd_coeff(cfg, jobs):
    params = params_of(cfg)
    spec = section_spec_of(cfg)
    results = [widom_coefficient(params, k, spec=spec, jobs=jobs).to_dict() for k in cfg["kappa_list"]]
    ok = all(r["positivity_ok"] is not False for r in results)
    for r in results:
        print(f"kappa = {r['kappa']:g}: M = {r['coefficient']:.8g} +- {r['coefficient_error']:.2g}, "
              f"M(f0) = {r['f0_coefficient']:.6g}, positivity_ok = {r['positivity_ok']}")
    return {"results": results, "positivity_ok": ok, "pass": ok}


def cmd_entropy(cfg, jobs):
    params = params_of(cfg)
    lattice = lattice_of(cfg)
    region = Region.from_dict(cfg["region"])
    kernel = build_kernel(params, lattice, allow_coarse=cfg["lattice"].get("allow_coarse", False))
    corr = correlation_matrix(kernel, region)
    rows = []
    for kappa in cfg["kappa_list"]:
        S = entanglement_entropy(corr, kappa)
        rows.append({"kappa": kappa, "entropy": S, "nonnegative": bool(S >= -1e-9 or kappa >= 2)})
        print(f"kappa = {kappa:g}: S = {S:.10g}")
    return {
        "params": params.to_dict(), "lattice": lattice.to_dict(), "region": region.to_dict(),
        "clip_count": corr.clip_count, "dim": corr.dim, "entropies": rows,
        "pass": all(r["nonnegative"] for r in rows),
    }


def cmd_sweep(cfg, jobs, out_dir):
    params = params_of(cfg)
    lattice = lattice_of(cfg)
    kind = cfg["region"]["kind"]
    L = cfg["sweep"]["L_values"]
    coarse = cfg["lattice"].get("allow_coarse", False)
    reports = []
    for kappa in cfg["kappa_list"]:
        record = run_sweep(params, lattice, kind, L, kappa, allow_coarse=coarse)
        widom = widom_coefficient(params, kappa, spec=section_spec_of(cfg), jobs=jobs)
        rep = compare_report(record, widom, _tol(cfg, "area_gap", 0.2))
        print(format_report(rep))
        tag = f"sweep_kappa{kappa:g}"
        (out_dir / f"{tag}.csv").write_text(sweep_csv(record))
        (out_dir / f"{tag}.svg").write_text(sweep_svg(record))
        reports.append(rep)
    return {"reports": reports, "pass": all(r["pass"] for r in reports)}


def verify_checks(cfg) -> dict:
    """Analytic-oracle checks that run in seconds."""
    checks = {}
    cutoff = CutoffSpec.from_dict(cfg.get("cutoff", {}))
    sym = symbol_check(DiracParams(1.0, 0.3, cutoff))
    checks["symbols"] = {**sym, "pass": bool(sym["idempotency"] < 1e-12 and sym["eigenvalues"] < 1e-12
                                              and sym["anticommutator"] == 0 and sym["covariance"] < 1e-10)}
    kappas = cfg.get("verify", {}).get("kappa_list", [0.5, 1.0, 1.5])
    eta_err = max(abs(eta(k, 0.5) - math.log(2)) for k in [0.3, 0.5, 1.0, 1.5, 2.0])
    outside = max(abs(eta(k, t)) for k in kappas for t in (-0.3, 0.0, 1.0, 1.7))
    checks["entropy_functions"] = {"eta_half_error": eta_err, "eta_outside": outside,
                                   "k0_kappa1": concavity_constant(1.0),
                                   "pass": bool(eta_err < 1e-12 and outside == 0 and concavity_constant(1.0) == 4.0)}
    gauss = ScalarLineSymbol()
    u = np.linspace(0.0, 8.0, 33)
    kerr = float(np.max(np.abs(line_kernel(gauss, u)[:, 0, 0] - np.exp(-u * u / 4) / (2 * math.sqrt(math.pi)))))
    hs_err = abs(hs_cross_norm(gauss) - 1 / math.pi)
    checks["gaussian"] = {"kernel_error": kerr, "hs_error": hs_err, "pass": bool(kerr < 1e-8 and hs_err < 1e-4)}
    params = DiracParams(0.0, 0.0, cutoff)
    spec = section_spec_of(cfg)
    tol = _tol(cfg, "f0_identity", 0.01)
    rows, ok = [], True
    for s in cfg.get("verify", {}).get("s_values", [0.5, 1.0, 2.0]):
        line = LineSymbol(s, params)
        sol = solve_section(line, spec)
        hs = hs_cross_norm(line)
        m0, _ = sol.m_pair("f0")
        rel = abs(m0 - hs) / hs
        pointwise = []
        for k in kappas:
            mk, ek = sol.m_pair(k)
            k0 = concavity_constant(k)
            pointwise.append({"kappa": k, "m_pair": mk, "bound": k0 * m0, "ok": bool(mk >= k0 * m0 - ek and mk > 0)})
        good = rel < tol and all(p["ok"] for p in pointwise)
        ok &= good
        rows.append({"s": s, "hs_cross_norm": hs, "m_pair_f0": m0, "relative_error": rel, "positivity": pointwise,
                     "pass": bool(good)})
    checks["sections"] = {"rows": rows, "pass": bool(ok)}
    return checks


def cmd_verify(cfg, jobs):
    checks = verify_checks(cfg)
    for name, c in checks.items():
        print(f"{name:18s} {'PASS' if c['pass'] else 'FAIL'}")
    return {"checks": checks, "pass": all(c["pass"] for c in checks.values())}


def cmd_diagnostics(cfg, jobs):
    params = params_of(cfg)
    d = cfg.get("diagnostics", {})
    n = int(d.get("points_per_dim", cfg["lattice"]["points_per_dim"]))
    lattice = TorusLattice.from_spacing(lattice_of(cfg).spacing, n)
    fit = schatten_commutator_slope(params, lattice, cfg["region"]["kind"], d.get("sigma", 0.9),
                                    d.get("alpha_list", [3, 4, 5, 6, 7, 8]), allow_coarse=True)
    tol = _tol(cfg, "schatten_slope", 0.3)
    ok = abs(fit.slope - 2.0) <= tol
    print(f"slope = {fit.slope:.4f} (expected 2 +- {tol:g}), residual = {fit.residual:.2e}")
    return {"slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual, "alphas": list(fit.alphas),
            "quasi_norms": list(fit.quasi_norms), "sigma": d.get("sigma", 0.9), "pass": bool(ok)}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("dirac-entropy: error: a command is required", file=sys.stderr)
        return 2
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"dirac-entropy: error: {exc}", file=sys.stderr)
        return 2
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    out_dir = Path(cfg.get("output_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    name = args.command.replace("-", "_")
    try:
        if args.command == "sweep":
            result = cmd_sweep(cfg, jobs, out_dir)
        else:
            result = globals()[f"cmd_{name}"](cfg, jobs)
    except PreconditionError as exc:
        print(f"dirac-entropy: error: {exc}", file=sys.stderr)
        return 2
    except DiracEntropyError as exc:
        print(f"dirac-entropy: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    # the output location is not part of the experiment
    config_hash = hash_of({k: v for k, v in cfg.items() if k != "output_dir"})
    result = {"command": args.command, "config_hash": config_hash, "version": __version__, **result}
    write_json(out_dir / f"{name}.json", result)
    write_json(out_dir / f"{name}.meta.json", {
        "config_hash": config_hash,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    })
    return 0 if result["pass"] else 1
