"""Command-line entry point.

Exit codes: 0 success, 1 configuration or hypothesis error, 2 divergence,
3 no Hopf crossing, 4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import spectral as S
from .config import ConfigError, RunConfig, build_problem, load_config
from .diagnostics import casimir_drift, decay_ratio, detect_limit_cycle
from .integrator import DivergenceError, IntegratorConfig, NonFiniteRhsError, adjust_step, integrate
from .models import RigidBodyParams
from .report import SCHEMA_VERSION, analyze, to_jsonable, write_json

__all__ = ["main", "EXIT_OK", "EXIT_CONFIG", "EXIT_DIVERGENCE", "EXIT_NO_CROSSING", "EXIT_VERIFY",
           "SWEEP_HEADER", "run_simulation", "sweep_rows"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_NO_CROSSING = 3
EXIT_VERIFY = 4

SWEEP_HEADER = ["tau", "h", "decayed", "decay_ratio", "amplitude", "period", "converged", "status", "error"]
ENERGY_SAMPLES = 201
DECAY_THRESHOLD = 0.1

log = logging.getLogger("delaydiss")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return "" if v is None else str(v)


def _step_for(cfg: RunConfig) -> float:
    """Step that divides the delay; the adjustment is logged."""
    tau = cfg.tau
    h = adjust_step(cfg.h, tau)
    if h != cfg.h:
        log.warning("step h adjusted from %.17g to %.17g so that it divides tau = %.17g", cfg.h, h, tau)
    return h


def run_simulation(cfg: RunConfig):
    """Integrate a configured run; returns ``(trajectory, h_used)``."""
    h = _step_for(cfg)
    prob = build_problem(cfg)
    ic = IntegratorConfig(h, cfg.t_end, cfg.divergence_guard, cfg.prune_history)
    return integrate(prob, ic), h


def _summary(cfg: RunConfig, traj, h: float) -> dict:
    spec = cfg.spec
    t = traj.t
    x = traj.x
    i0 = int(np.searchsorted(t, 0.0, side="left"))
    out = {
        "schema_version": SCHEMA_VERSION,
        "model": cfg.model,
        "params": cfg.params,
        "h_requested": cfg.h, "h": h, "h_adjusted": h != cfg.h,
        "t_end": float(t[-1]), "n_nodes": int(len(t)),
        "initial_state": x[i0], "final_state": x[-1],
        "zero_motion": bool(np.max(np.abs(x[i0:] - x[i0])) <= 1e-12),
    }
    if spec.casimir is not None:
        out["casimir_drift"] = casimir_drift(traj, spec.casimir(cfg.params))
    if spec.energy is not None:
        efn = spec.energy(cfg.params)
        idx = np.unique(np.linspace(i0, len(t) - 1, min(ENERGY_SAMPLES, len(t) - i0)).astype(int))
        E = np.array([efn(x[i]) for i in idx])
        out["energy_profile"] = {"t": t[idx], "E": E, "E_initial": E[0], "E_final": E[-1],
                                 "max_increase": float(np.max(E - E[0]))}
    return out


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    stem = Path(args.config).with_suffix("")
    csv_path = Path(args.output_csv) if args.output_csv else (cfg.output_csv or stem.with_suffix(".csv"))
    json_path = Path(args.output_json) if args.output_json else (cfg.output_json or Path(f"{stem}_summary.json"))
    try:
        traj, h = run_simulation(cfg)
    except (DivergenceError, NonFiniteRhsError) as exc:
        write_json({"schema_version": SCHEMA_VERSION, "model": cfg.model, "params": cfg.params,
                    "error": str(exc), "diverged": True}, json_path)
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    traj.to_csv(csv_path)
    summary = _summary(cfg, traj, h)
    write_json(summary, json_path)
    print(f"wrote {csv_path} and {json_path}")
    if "casimir_drift" in summary:
        print(f"casimir drift {summary['casimir_drift']:.3e}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    out = Path(args.output)
    try:
        p = RigidBodyParams(args.I1, args.I2, args.I3, args.alpha, m=args.m)
        res = analyze(p, args.variant, tau_max=args.tau_max, oracle=not args.no_oracle)
    except S.HypothesisError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_json(res.report, out)
    sp = res.report["spectral"]
    if res.hopf_point is None:
        print(f"no Hopf crossing: {sp.get('error')}; report written to {out}", file=sys.stderr)
        return EXIT_NO_CROSSING
    q = res.quantities
    print(f"omega0={sp['omega0']:.10g} tau0={sp['tau0']:.10g} tau_c={sp['tau_c']:.10g} branch={sp['branch']}")
    print(f"Re dlambda/dtau={sp['re_dlambda_dtau']:.10g}")
    if q is None:
        print(res.report["hopf"]["skipped"])
    else:
        print(f"g21={res.normal_form.g21:.10g}")
        print(f"mu2={q.mu2:.10g} T2={q.T2:.10g} beta2={q.beta2:.10g} ({q.direction}, {q.stability})")
    print(f"{len(res.report['discrepancies'])} discrepancies listed in {out}")
    return EXIT_OK


def _sweep_one(cfg: RunConfig, tau: float, component: int) -> dict:
    row = {k: None for k in SWEEP_HEADER}
    row["tau"] = tau
    c = cfg.with_params(tau=tau)
    try:
        traj, h = run_simulation(c)
        row["h"] = h
        ref = c.spec.state(c.params)
        ratio = decay_ratio(traj, ref, window=0.1 * c.t_end)
        est = detect_limit_cycle(traj, component)
        row.update(decayed=ratio < DECAY_THRESHOLD, decay_ratio=ratio, amplitude=est.amplitude,
                   period=est.period, converged=est.converged, status=est.status)
    except (DivergenceError, NonFiniteRhsError) as exc:
        row.update(status="diverged", error=str(exc))
    except Exception as exc:  # aggregated per row; the sweep goes on
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return row


def sweep_rows(cfg: RunConfig, taus, component: int = 1, workers: Optional[int] = None) -> list[dict]:
    """Run one simulation per delay, concurrently; rows come back sorted by delay."""
    taus = [float(t) for t in taus]
    if workers == 1 or len(taus) == 1:
        rows = [_sweep_one(cfg, t, component) for t in taus]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_one, [cfg] * len(taus), taus, [component] * len(taus)))
    return sorted(rows, key=lambda r: r["tau"])


def cmd_sweep(args) -> int:
    try:
        cfg = load_config(args.config)
        if "tau" not in cfg.params:
            raise ConfigError("model", f"model {cfg.model!r} has no adjustable delay")
        if not (args.tau_min > 0 and args.tau_max >= args.tau_min):
            raise ConfigError("--tau-min/--tau-max", "need 0 < tau_min <= tau_max")
        if args.points < 1:
            raise ConfigError("--points", "must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    taus = np.linspace(args.tau_min, args.tau_max, args.points) if args.points > 1 else [args.tau_min]
    dim = cfg.spec.dimension(cfg.params)
    comp = args.component if args.component is not None else (1 if dim > 1 else 0)
    rows = sweep_rows(cfg, taus, comp, args.workers)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in SWEEP_HEADER])
    onset = next((r["tau"] for r in rows if r["decayed"] is False), None)
    print(f"wrote {len(rows)} rows to {out}; first non-decaying delay: {onset}")
    if any(r["status"] == "diverged" for r in rows):
        return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import FAULTS, run_checks

    if args.fault_inject is not None and args.fault_inject not in FAULTS:
        print(f"unknown fault {args.fault_inject!r}; choose one of {', '.join(sorted(FAULTS))}", file=sys.stderr)
        return EXIT_CONFIG
    results = run_checks(args.fault_inject)
    failed = [r.name for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "fault_inject": args.fault_inject,
        "passed": not failed,
        "failed": failed,
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail, "seconds": r.seconds}
                   for r in results],
    }
    if args.output:
        write_json(doc, args.output)
    else:
        print(json.dumps(to_jsonable(doc)))
    if failed:
        print("failed invariants: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delaydiss", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a configured model")
    s.add_argument("--config", required=True)
    s.add_argument("--output-csv")
    s.add_argument("--output-json")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="spectral and Hopf analysis of the rigid body")
    for k in ("I1", "I2", "I3", "alpha", "m"):
        a.add_argument(f"--{k}", type=float, required=True)
    a.add_argument("--variant", choices=("determinant", "paper"), default="determinant")
    a.add_argument("--tau-max", type=float, default=None, help="ignore crossings beyond this delay")
    a.add_argument("--no-oracle", action="store_true", help="skip the numerical Taylor oracle")
    a.add_argument("--output", default="analysis.json")
    a.set_defaults(func=cmd_analyze)

    w = sub.add_parser("sweep", help="simulate over a grid of delays")
    w.add_argument("--config", required=True)
    w.add_argument("--tau-min", type=float, required=True)
    w.add_argument("--tau-max", type=float, required=True)
    w.add_argument("--points", type=int, required=True)
    w.add_argument("--component", type=int, default=None, help="state component for cycle detection")
    w.add_argument("--workers", type=int, default=None)
    w.add_argument("--output", default="sweep.csv")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the invariant battery")
    v.add_argument("--fault-inject", metavar="KEY", default=None)
    v.add_argument("--output", default=None)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
