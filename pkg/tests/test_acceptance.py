"""Acceptance criteria, one test per criterion.

Every tolerance is pinned as a module constant. Each test records a
single PASS/FAIL line (shown in the terminal summary) and then asserts
the criterion exactly as stated; supplementary lines report closely
related quantities without changing the verdict.
"""
import math
import time

import numpy as np
import pytest

from delaydiss import algebra as alg
from delaydiss import hopf as H
from delaydiss import models as M
from delaydiss import spectral as S
from delaydiss.cli import sweep_rows
from delaydiss.config import parse_config_text
from delaydiss.diagnostics import casimir_drift, decay_ratio, detect_limit_cycle, energy_rate_check
from delaydiss.integrator import IntegratorConfig, adjust_step, integrate
from delaydiss.report import REFERENCE_VALUES, analyze

# criterion 1
C1_TOL = 1e-10
C1_BUDGET = 1.0
C1_SETS = [  # (I1, I2, I3, alpha, m), all with I1 > I2 and I1 > I3
    (0.8, 0.5, 0.4, 0.3, 1.5), (0.8, 0.5, 0.4, 0.3, 1.8), (1.0, 0.6, 0.3, 0.2, 1.0),
    (1.0, 0.3, 0.6, 0.5, 2.5), (1.2, 0.5, 0.5, 0.1, 0.8), (0.9, 0.7, 0.2, 0.4, 3.0),
    (2.0, 1.0, 1.5, 0.25, 1.2), (0.6, 0.2, 0.3, 0.8, 0.5), (1.5, 0.4, 1.0, 1.0, 2.0),
    (0.7, 0.65, 0.1, 0.3, 1.0),
]
# criteria 2 and 3
RUN_PARAMS = dict(I1=0.8, I2=0.5, I3=0.4, alpha=0.3, tau=0.5, m=1.5)
RUN_EPS = 0.1
RUN_H = 1e-3
RUN_T_END = 50.0
C2_TOL = 1e-8
C2_BUDGET = 5.0
C3_TOL = 1e-5
C3_RATIO_CHANGE = 2.0
C3_BUDGET = 10.0
# criterion 4
C4_PAIRS = 1000
C4_TOL = 1e-12
C4_BUDGET = 1.0
# criterion 5
C5_TOL = 1e-6
C5_BUDGET = 1.0
C5_GRID = [(a, b, c) for a in (0.6, 0.8, 1.0) for b in (0.3, 0.45, 0.55) for c in (0.2, 0.35, 0.5)]
# criterion 6
C6_RTOL = 1e-3
C6_BUDGET = 1.0
# criterion 7
C7_DECAY = 0.1
C7_PERIOD_RTOL = 0.05
C7_BUDGET = 120.0
C7_H = 0.01
C7_T_END = 400.0
C7_SWEEP_POINTS = 14
# criterion 8
C8_RTOL = 1e-5
C8_BUDGET = 10.0
# criterion 9
C9_BUDGET = 1.0
# criterion 10
C10_TOL = 1e-8
C10_T_END = 20.0
C10_BUDGET = 2.0
# criterion 11
C11_RANGE = (12.0, 20.0)
C11_BUDGET = 30.0

SET1 = M.RigidBodyParams(0.8, 0.5, 0.4, 0.3, m=1.5)


def _norm(x):
    return float(np.linalg.norm(x))


@pytest.fixture(scope="module")
def hopf1():
    co = S.coefficients(SET1)
    return co, S.hopf_point(co, SET1.m, SET1.alpha)


@pytest.fixture(scope="module")
def delayed_run():
    p = M.RigidBodyParams(**RUN_PARAMS)
    t0 = time.perf_counter()
    tr = integrate(M.rigid_body_problem(p, M0=M.perturbed_equilibrium(p, RUN_EPS)), IntegratorConfig(RUN_H, RUN_T_END))
    return p, tr, time.perf_counter() - t0


def _rb_config(tau, t_end=C7_T_END):
    return parse_config_text(
        "model = rigid_body\nI1 = 0.8\nI2 = 0.5\nI3 = 0.4\nalpha = 0.3\nm = 1.5\n"
        f"tau = {tau!r}\nh = {C7_H!r}\nt_end = {t_end!r}\ninitial = perturbed\neps = {RUN_EPS!r}\n")


@pytest.fixture(scope="module")
def end_to_end(hopf1):
    """Runs at 0.9 tau0 and 1.1 tau0 plus the onset sweep."""
    _, hp = hopf1
    t0 = time.perf_counter()
    out = {}
    for f in (0.9, 1.1):
        p = SET1.replace(tau=f * hp.tau0)
        h = adjust_step(C7_H, p.tau)
        tr = integrate(M.rigid_body_problem(p, M0=M.perturbed_equilibrium(p, RUN_EPS)), IntegratorConfig(h, C7_T_END))
        out[f] = tr
    cfg = _rb_config(hp.tau0)
    taus = np.linspace(0.1 * hp.tau0, 1.5 * hp.tau0, C7_SWEEP_POINTS)
    rows = sweep_rows(cfg, taus, component=1)
    out["sweep"] = (taus, rows)
    out["seconds"] = time.perf_counter() - t0
    return out


def test_criterion_01_characteristic_self_consistency(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    branches = []
    for I1, I2, I3, alpha, m in C1_SETS:
        assert I1 > I2 and I1 > I3
        co = S.coefficients(M.RigidBodyParams(I1, I2, I3, alpha, m=m))
        hp = S.hopf_point(co, m, alpha)
        P, Q = S.crossing_equations(hp.omega0, hp.tau0, co)
        worst = max(worst, abs(S.char_residual(hp.lambda1, hp.tau0, co)), abs(P), abs(Q))
        branches.append(hp.branch)
    dt = time.perf_counter() - t0
    ok = worst <= C1_TOL and dt < C1_BUDGET
    criterion(1, ok, f"max residual over {len(C1_SETS)} sets {worst:.2e} (tol {C1_TOL:g}), "
                     f"branches {sorted(set(branches))}, {dt:.3f} s")
    assert ok


def test_criterion_02_casimir_conservation(criterion, delayed_run):
    _, tr, secs = delayed_run
    t0 = time.perf_counter()
    drift = casimir_drift(tr, _norm)
    dt = secs + time.perf_counter() - t0
    ok = drift <= C2_TOL and dt < C2_BUDGET
    criterion(2, ok, f"max | |M(t)| - |M(0)| | = {drift:.2e} (tol {C2_TOL:g}), {dt:.2f} s")
    assert ok


def test_criterion_03_energy_dissipation_law(criterion, delayed_run):
    p, tr, secs = delayed_run
    t0 = time.perf_counter()
    tr_half = integrate(M.rigid_body_problem(p, M0=M.perturbed_equilibrium(p, RUN_EPS)),
                        IntegratorConfig(RUN_H / 2, RUN_T_END))
    d1 = energy_rate_check(tr, p, "printed")
    d2 = energy_rate_check(tr_half, p, "printed")
    change = (d1 / RUN_H**2) / (d2 / (RUN_H / 2) ** 2)
    e1 = energy_rate_check(tr, p, "exact")
    e2 = energy_rate_check(tr_half, p, "exact")
    dt = secs + time.perf_counter() - t0
    change_ok = 1 / C3_RATIO_CHANGE <= change <= C3_RATIO_CHANGE
    ok = d1 <= C3_TOL and change_ok and dt < C3_BUDGET
    criterion(3, ok, f"law -alpha|M~ x Omega~|^2: discrepancy {d1:.3e} (tol {C3_TOL:g}), "
                     f"discrepancy/h^2 change under halving {change:.3f} (allowed {C3_RATIO_CHANGE:g}x), {dt:.2f} s")
    ex_change = (e1 / RUN_H**2) / (e2 / (RUN_H / 2) ** 2)
    criterion(3, e1 <= C3_TOL and 1 / C3_RATIO_CHANGE <= ex_change <= C3_RATIO_CHANGE,
              f"law -alpha (M x Omega).(M~ x Omega~): discrepancy {e1:.3e}, h^2 ratio change {ex_change:.4f}",
              supplementary=True)
    assert ok


def test_criterion_04_generic_engine_equivalence(criterion):
    spec = alg.so3()  # Gamma = id, C = 1
    p = M.RigidBodyParams(0.8, 0.5, 0.4, 1.0)  # alpha = 1 matches Gamma = id
    grad = lambda v: v / p.inertia
    rng = np.random.default_rng(4)
    pairs = rng.normal(size=(C4_PAIRS, 2, 3))
    t0 = time.perf_counter()
    worst = 0.0
    worst_split = 0.0
    for mu, mud in pairs:
        g = M.generic_dissipative_rhs(mu, mud, spec, grad, grad)
        rb = M.rigid_body_delay_rhs(mu, mud, p)
        worst = max(worst, float(np.max(np.abs(g - rb))))
        # the generic rhs also carries the normal term; removing it leaves the rigid body
        k = np.cross(mu, mud)
        normal = (grad(mu) @ k) * np.cross(mu, k - (k @ mu) / (mu @ mu) * mu)
        worst_split = max(worst_split, float(np.max(np.abs(g + normal - rb))))
    dt = time.perf_counter() - t0
    ok = worst <= C4_TOL and dt < C4_BUDGET
    criterion(4, ok, f"max |generic - rigid body| over {C4_PAIRS} pairs {worst:.3e} (tol {C4_TOL:g}), {dt:.2f} s")
    criterion(4, worst_split <= C4_TOL, f"generic + normal term vs rigid body {worst_split:.2e}", supplementary=True)
    assert ok


def test_criterion_05_linearization_oracle(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for I1, I2, I3 in C5_GRID:
        p = M.RigidBodyParams(I1, I2, I3, 0.3, m=1.5)
        lin = S.linearize(p)
        A, aG = S.fd_jacobians(p)
        worst = max(worst, float(np.max(np.abs(A - lin.A))), float(np.max(np.abs(aG - p.alpha * lin.G))))
    dt = time.perf_counter() - t0
    ok = worst <= C5_TOL and dt < C5_BUDGET and len(C5_GRID) == 27
    criterion(5, ok, f"max |analytic - FD| over {len(C5_GRID)} inertia points {worst:.2e} (tol {C5_TOL:g}), {dt:.3f} s")
    assert ok


def test_criterion_06_transversality(criterion, hopf1):
    co, hp = hopf1
    t0 = time.perf_counter()
    tr = S.transversality(co, hp)
    ts = S.tracked_slope(co, hp)
    rel = abs(ts.real - tr.real) / abs(tr.real)
    dt = time.perf_counter() - t0
    ok = rel <= C6_RTOL and dt < C6_BUDGET
    criterion(6, ok, f"Re dlambda/dtau {tr.real:.6f} vs tracked {ts.real:.6f}, relative {rel:.2e} "
                     f"(tol {C6_RTOL:g}), {dt:.3f} s")
    criterion(6, None, f"printed closed-form expression gives {S.transversality_printed(co, hp):.5f}",
              supplementary=True)
    assert ok


@pytest.mark.slow
def test_criterion_07_end_to_end_hopf(criterion, hopf1, end_to_end):
    _, hp = hopf1
    below, above = end_to_end[0.9], end_to_end[1.1]
    ref = M.equilibrium_state(SET1)
    ratio = decay_ratio(below, ref, 0.1 * C7_T_END)
    cyc = detect_limit_cycle(above, 1, expected_omega=hp.omega0)
    T0 = 2 * math.pi / hp.omega0
    period_err = abs(cyc.period - T0) / T0
    taus, rows = end_to_end["sweep"]
    cell = taus[1] - taus[0]
    onset = next((r["tau"] for r in rows if r["decayed"] is False), None)
    onset_ok = onset is not None and abs(onset - hp.tau0) <= cell
    monotone = all(r["decayed"] is (r["tau"] < onset) for r in rows) if onset is not None else False
    dt = end_to_end["seconds"]
    parts = {
        "decay": ratio < C7_DECAY,
        "converged": cyc.converged,
        "period": period_err <= C7_PERIOD_RTOL,
        "onset": onset_ok and monotone,
        "budget": dt < C7_BUDGET,
    }
    ok = all(parts.values())
    failed = [k for k, v in parts.items() if not v]
    criterion(7, ok, f"0.9 tau0 decay ratio {ratio:.2e}; 1.1 tau0 converged={cyc.converged} period {cyc.period:.4f} "
                     f"vs 2pi/omega0 {T0:.4f} ({100 * period_err:.1f}%, tol {100 * C7_PERIOD_RTOL:g}%); "
                     f"sweep onset {onset} vs tau0 {hp.tau0:.4f} (cell {cell:.4f}); {dt:.1f} s"
                     + (f"; failing parts: {failed}" if failed else ""))
    # amplitude-dependent period from the normal form
    q = SET1.replace(tau=hp.tau0)
    e = H.normalize_adjoint(H.eigenvectors(q, hp), q, hp)
    nf = H.cubic_coefficients(q, hp, e)
    hq = H.hopf_quantities(nf, S.transversality(S.coefficients(SET1), hp), hp.omega0)
    eps2 = 0.1 * hp.tau0 / hq.mu2
    T_pred = T0 * (1 + hq.T2 * eps2)
    pred_err = abs(cyc.period - T_pred) / T_pred
    criterion(7, pred_err <= C7_PERIOD_RTOL,
              f"period vs 2pi/omega0 (1 + T2 (tau - tau0)/mu2) = {T_pred:.4f}: {100 * pred_err:.2f}%",
              supplementary=True)
    assert ok


@pytest.mark.slow
def test_criterion_08_normal_form_oracle(criterion, hopf1, end_to_end):
    co, hp = hopf1
    t0 = time.perf_counter()
    q = SET1.replace(tau=hp.tau0)
    e = H.normalize_adjoint(H.eigenvectors(q, hp), q, hp)
    nf = H.cubic_coefficients(q, hp, e)
    orc = H.taylor_oracle(q, hp, e)
    hq = H.hopf_quantities(nf, S.transversality(co, hp), hp.omega0)
    dt = time.perf_counter() - t0
    rel = abs(orc.g21 - nf.g21) / abs(nf.g21)
    cyc = detect_limit_cycle(end_to_end[1.1], 1)
    stable_observed = cyc.converged and cyc.amplitude > 0.1
    sign_ok = (hq.beta2 < 0) == stable_observed
    ok = rel <= C8_RTOL and sign_ok and dt < C8_BUDGET
    criterion(8, ok, f"g21 {nf.g21:.6f} vs oracle {orc.g21:.6f}, relative {rel:.2e} (tol {C8_RTOL:g}); "
                     f"beta2 {hq.beta2:.5f} predicts {hq.stability}, observed cycle converged={cyc.converged} "
                     f"amplitude {cyc.amplitude:.3f}; {dt:.2f} s")
    assert ok


def test_criterion_09_printed_number_comparison(criterion, hopf1):
    t0 = time.perf_counter()
    res = analyze(SET1)
    dt = time.perf_counter() - t0
    rep = res.report
    gaps = {(d["where"], d["quantity"]) for d in rep["discrepancies"] if d.get("abs_gap") is not None}
    listed = all((f"{k} (m={v['params']['m']})", q) in gaps
                 for k, v in REFERENCE_VALUES.items() for q in ("omega0", "tau0", "mu2", "T2", "beta2"))
    printed = rep["paper_reference_values"]
    values_ok = (printed["set1"]["omega0"] == 3.20631 and printed["set1"]["tau0"] == 0.88154
                 and printed["set1"]["beta2"] == -0.00139 and printed["set2"]["omega0"] == 0.68547
                 and printed["set2"]["beta2"] == 0.00097)
    sp = rep["spectral"]
    computed_ok = (sp["residual"] <= C1_TOL and sp["transversality_rel_error"] <= C6_RTOL
                   and rep["hopf"]["oracle"]["g21_rel_error"] <= C8_RTOL)
    ok = listed and values_ok and computed_ok and dt < C9_BUDGET
    criterion(9, ok, f"{len(rep['discrepancies'])} discrepancy entries, every printed value has a quantified gap: "
                     f"{listed}; computed values meet criteria 1, 6 and 8 tolerances: {computed_ok}; {dt:.3f} s "
                     "(criterion 7 is reported on its own line)")
    assert ok


def test_criterion_10_sphere_invariance(criterion):
    t0 = time.perf_counter()
    tr = integrate(M.sphere_problem(1.0, x0=(0.6, 0.0, 0.8)), IntegratorConfig(1e-3, C10_T_END))
    drift = casimir_drift(tr, _norm)
    dt = time.perf_counter() - t0
    ok = drift <= C10_TOL and dt < C10_BUDGET and abs(_norm(tr.x[0]) - 1) < 1e-15
    criterion(10, ok, f"max | |q| - 1 | over t_end={C10_T_END:g}: {drift:.2e} (tol {C10_TOL:g}), {dt:.2f} s")
    assert ok


def test_criterion_11_integrator_order(criterion):
    p = SET1.replace(tau=0.5)
    M0 = M.perturbed_equilibrium(p, 0.3)
    t0 = time.perf_counter()
    finals = [integrate(M.rigid_body_problem(p, M0=M0), IntegratorConfig(h, 5.0)).x[-1]
              for h in (0.05, 0.025, 0.0125)]
    ratio = np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])
    dt = time.perf_counter() - t0
    ok = C11_RANGE[0] <= ratio <= C11_RANGE[1] and dt < C11_BUDGET
    criterion(11, ok, f"self-convergence ratio {ratio:.3f} (range {C11_RANGE}), {dt:.2f} s")
    assert ok
