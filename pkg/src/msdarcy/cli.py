"""Command-line front end.

Subcommands: simulate (stiff hyperbolic run), limit (diffusion-limit run),
sweep (epsilon convergence study), certify (equilibrium certificate),
identities (mixture/matrix identity battery), uphill (cross-diffusion probe).

Exit codes: 0 success, 1 configuration error, 2 runtime abort (vacuum or
instability), 3 failed certificate or failed identity battery.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import fileio, harness, identities, presets
from .certificate import certify
from .config import parse_config
from .errors import ConfigError, MsdarcyError, VacuumError
from .hyperbolic import run as run_hyperbolic
from .kernels import BACKEND
from .mixture import CellState
from .parabolic import reconstruct_momentum
from .parabolic import run as run_parabolic

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_CHECK = 3


def _say(args, *parts):
    if not args.quiet:
        print(*parts)


def _need_config(args):
    if args.config is None:
        raise ConfigError("this subcommand needs --config <path>")
    return parse_config(args.config)


def cmd_simulate(args) -> int:
    cfg = _need_config(args)
    snap0, _ = harness.well_prepared_init(cfg.scenario(), cfg.hyperbolic.epsilon)
    result = run_hyperbolic(cfg.model, snap0, cfg.grid, cfg.hyperbolic)
    fileio.write_field_snapshots(
        os.path.join(args.out, "snapshots.csv"), result.snapshots, cfg.grid.centers
    )
    fileio.write_audit(os.path.join(args.out, "entropy_audit.csv"), result.audit)
    _say(args, f"simulate: {len(result.snapshots)} snapshots -> {args.out} [{BACKEND} kernels]")
    return EXIT_OK


def cmd_limit(args) -> int:
    cfg = _need_config(args)
    scenario = cfg.scenario()
    result = run_parabolic(cfg.model, scenario.initial_density(), cfg.grid, cfg.parabolic)
    fileio.write_density_snapshots(
        os.path.join(args.out, "limit_snapshots.csv"), result.snapshots, cfg.grid.centers
    )
    final = result.snapshots[-1]
    mbar, ebar = reconstruct_momentum(cfg.model, final.r, cfg.grid, cfg.hyperbolic.epsilon)
    fileio.write_reconstruction(
        os.path.join(args.out, "limit_reconstruction.csv"),
        final.t,
        cfg.grid.centers,
        mbar,
        ebar,
    )
    _say(args, f"limit: {len(result.snapshots)} snapshots -> {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _need_config(args)
    result = harness.sweep(cfg.scenario(sweep=True))
    fileio.write_sweep_json(os.path.join(args.out, "sweep.json"), result)
    fileio.write_sweep_csv(os.path.join(args.out, "sweep.csv"), result)
    for note in result.warnings:
        print(f"warning: {note}", file=sys.stderr)
    _say(
        args,
        f"sweep: order={result.observed_order:.3f} K={result.k_estimate:.4g} "
        f"coupling_ratios={np.round(result.coupling_ratios, 3).tolist()} -> {args.out}",
    )
    if any(rec.failure for rec in result.records):
        for rec in result.records:
            if rec.failure:
                print(f"epsilon={rec.epsilon}: {rec.failure}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_certify(args) -> int:
    if args.config is not None:
        cfg = parse_config(args.config)
        model, box = cfg.model, cfg.box
        equilibrium = CellState(cfg.farfield, np.zeros((model.n, model.d)))
        samples = cfg.certificate_samples
    else:
        model = presets.default_two_species_model()
        box = presets.default_certificate_box()
        equilibrium = CellState(np.ones(2), np.zeros((2, 1)))
        samples = 10000
    report = certify(model, equilibrium, box, sample_count=samples, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "certificate.json")
    with open(path, "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    for i, cond in enumerate(report.conditions, start=1):
        _say(args, f"condition {i}: {cond.verdict:<24s} margin={cond.margin:.6g}")
    _say(args, f"certificate -> {path}")
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_identities(args) -> int:
    if args.config is not None:
        cfg = parse_config(args.config)
        model, box = cfg.model, cfg.box
    else:
        model = presets.default_two_species_model()
        box = presets.default_certificate_box()
    checks = identities.run_battery(model, box, count=args.samples, seed=args.seed)
    extra = harness_linalg_residuals()
    for check in checks:
        _say(args, check.line())
    for name, value, tol in extra:
        status = "ok" if value < tol else "FAIL"
        _say(args, f"{name:<42s} {value:12.3e} < {tol:.0e}  {status}")
    ok = all(c.passed for c in checks) and all(v < tol for _, v, tol in extra)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        doc = {
            "schema_version": 1,
            "overall": "pass" if ok else "fail",
            "checks": {c.name: {"residual": c.residual, "tolerance": c.tolerance} for c in checks},
            "matrix_checks": {n: {"residual": v, "tolerance": t} for n, v, t in extra},
        }
        with open(os.path.join(args.out, "identities.json"), "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if ok else EXIT_CHECK


def harness_linalg_residuals():
    """Matrix-algebra battery: Kronecker mixed product and the gradient rules."""
    from . import linalg

    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(50):
        a = rng.standard_normal((3, 2))
        b = rng.standard_normal((2, 4))
        c = rng.standard_normal((2, 3))
        d = rng.standard_normal((4, 2))
        lhs = linalg.kron(a, b) @ linalg.kron(c, d)
        rhs = linalg.kron(a @ c, b @ d)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / max(1.0, np.max(np.abs(rhs))))
    res_rules = linalg.verify_product_rules(4096)
    return [
        ("kron mixed-product property", worst, 1e-12),
        ("discrete gradient product rules", res_rules, 1e-4),
    ]


def cmd_uphill(args) -> int:
    if args.config is not None:
        cfg = parse_config(args.config)
        scenario = cfg.scenario()
        solver = cfg.uphill_solver
        threshold = cfg.uphill_threshold
    else:
        scenario = presets.uphill_scenario()
        solver = "hyperbolic"
        threshold = 1e-8
    witnesses = harness.uphill_probe(scenario, solver=solver, threshold=threshold)
    os.makedirs(args.out, exist_ok=True)
    fileio.write_witnesses(os.path.join(args.out, "uphill_witnesses.csv"), witnesses)
    if witnesses:
        best = max(witnesses, key=lambda w: w.value)
        _say(
            args,
            f"uphill: {len(witnesses)} witnesses; strongest species {best.species + 1} "
            f"at x={best.x:.4g}, t={best.t:.4g} (value {best.value:.4g})",
        )
    else:
        _say(args, "uphill: none found")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msdarcy",
        description="Multi-species porous-media flow laboratory with cross-diffusion",
    )
    parser.add_argument("--config", help="run configuration file")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=0, help="sampling seed")
    parser.add_argument("--quiet", action="store_true", help="suppress normal output")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", help="run the stiff hyperbolic system")
    sub.add_parser("limit", help="run the nonlinear diffusion limit system")
    sub.add_parser("sweep", help="run the epsilon convergence study")
    sub.add_parser("certify", help="check the equilibrium wellposedness conditions")
    p_id = sub.add_parser("identities", help="run the identity battery")
    p_id.add_argument("--samples", type=int, default=1000)
    sub.add_parser("uphill", help="probe for uphill diffusion witnesses")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "sweep": cmd_sweep,
    "certify": cmd_certify,
    "identities": cmd_identities,
    "uphill": cmd_uphill,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VacuumError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except MsdarcyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
