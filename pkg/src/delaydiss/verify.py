"""Invariant battery run by ``delaydiss verify``.

Each check is a small function returning ``(passed, detail)``; the
battery catches exceptions so one broken module does not hide the rest.
``fault`` names a deliberate corruption used to confirm that the harness
can actually fail.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import algebra as alg
from . import diagnostics as diag
from . import hopf as H
from . import models as M
from . import spectral as S
from .history import InitialFunction, Trajectory, hermite
from .integrator import DDEProblem, IntegratorConfig, integrate

__all__ = ["CheckResult", "FAULTS", "CHECKS", "run_checks"]

FAULTS = {
    "structure_constant": "give [e1, e2] an e1 component in so(3), keeping antisymmetry but breaking Jacobi",
    "energy_sign": "flip the sign of the dissipation in the energy law being checked",
    "hopf_residual": "shift omega0 by 1e-6 before validating the Hopf point",
    "history_interpolation": "replace Hermite midpoints by linear interpolation in the order test",
}

SEED = 20240611


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _so3_constants(fault):
    C = alg.levi_civita().copy()
    if fault == "structure_constant":
        # [e1, e2] picks up an e1 component; antisymmetry survives, Jacobi does not
        C[0, 0, 1] += 0.05
        C[0, 1, 0] -= 0.05
    return C


def check_antisymmetry(fault):
    C = _so3_constants(fault)
    d = alg.antisymmetry_defect(C)
    return d <= 1e-12, f"antisymmetry defect {d:.3e}"


def check_jacobi(fault):
    C = _so3_constants(fault)
    d = alg.jacobi_defect(C)
    return d <= 1e-12, f"Jacobi defect {d:.3e}"


def check_coadjoint_duality(fault):
    spec = alg.so3()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(50):
        xi, eta, mu = rng.normal(size=(3, 3))
        lhs = alg.coadjoint(spec, xi, mu) @ eta
        rhs = mu @ alg.bracket(spec, xi, eta)
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-12, f"max |<ad*_xi mu, eta> - <mu, [xi, eta]>| = {worst:.3e}"


def check_isotropy(fault):
    spec = alg.so3()
    mu = np.array([0.3, -1.2, 0.7])
    basis = alg.isotropy_basis(spec, mu)
    ok = len(basis) == 1 and abs(abs(basis[0] @ mu) - np.linalg.norm(mu) * np.linalg.norm(basis[0])) < 1e-12
    return ok, f"isotropy dimension {len(basis)} (expected 1, spanned by mu)"


def check_hermite_cubic(fault):
    f = lambda t: 2 * t**3 - t**2 + 3 * t - 1
    df = lambda t: 6 * t**2 - 2 * t + 3
    ts = np.linspace(0.1, 0.4, 7)
    x, dx = hermite(0.1, 0.4, f(0.1), f(0.4), df(0.1), df(0.4), ts)
    err = max(np.max(np.abs(x - f(ts))), np.max(np.abs(dx - df(ts))))
    return err <= 1e-13, f"cubic reproduction error {err:.3e}"


def check_method_of_steps(fault):
    prob = DDEProblem(1, lambda t, x, xd: -xd, 1.0, InitialFunction.constant([1.0], 1.0))
    tr = integrate(prob, IntegratorConfig(1e-3, 2.0))
    x1 = tr.sample(1.0)[0][0]
    x2 = tr.sample(2.0)[0][0]
    ok = abs(x1) <= 1e-12 and abs(x2 + 0.5) <= 1e-10
    return ok, f"x(1) = {x1:.3e}, x(2) + 0.5 = {x2 + 0.5:.3e}"


def _rb_order_ratio(linear_midpoint=False):
    p = M.RigidBodyParams(0.8, 0.5, 0.4, 0.3, tau=0.5, m=1.5)
    M0 = M.perturbed_equilibrium(p, 0.3)
    tend = 5.0
    hs = (0.05, 0.025, 0.0125)
    finals = []
    for h in hs:
        prob = M.rigid_body_problem(p, M0=M0)
        if linear_midpoint:
            prob = _with_linear_history(prob, h)
        finals.append(integrate(prob, IntegratorConfig(h, tend)).x[-1])
    e1 = np.linalg.norm(finals[0] - finals[1])
    e2 = np.linalg.norm(finals[1] - finals[2])
    return e1 / e2


def _with_linear_history(prob, h):
    """Replace the delayed argument at half steps by a linear average (fault mode).

    The rhs sees every accepted state when the integrator evaluates the
    derivative at the new node, so those states are cached by step index
    and the two nodes around each delayed midpoint are looked up there.
    """
    f = prob.rhs
    N = round(prob.tau / h)
    nodes = {}

    def node(i):
        return nodes[i] if i > 0 else prob.initial(i * h)

    def rhs(t, x, xd):
        k2 = round(2 * t / h)
        if k2 % 2:
            j = (k2 - 1) // 2 - N
            xd = 0.5 * (node(j) + node(j + 1))
        else:
            nodes[k2 // 2] = np.array(x, dtype=float)
        return f(t, x, xd)

    return DDEProblem(prob.dimension, rhs, prob.tau, prob.initial, prob.name)


def check_integrator_order(fault):
    r = _rb_order_ratio(linear_midpoint=(fault == "history_interpolation"))
    return 12 <= r <= 20, f"self-convergence ratio {r:.3f} (fourth order gives 16)"


def check_casimir(fault):
    p = M.RigidBodyParams(0.8, 0.5, 0.4, 0.3, tau=0.5, m=1.5)
    tr = integrate(M.rigid_body_problem(p, M0=M.perturbed_equilibrium(p, 0.1)), IntegratorConfig(1e-3, 10.0))
    d = diag.casimir_drift(tr, lambda x: float(np.linalg.norm(x)))
    return d <= 1e-8, f"max |M| drift {d:.3e}"


def check_energy_law(fault):
    p = M.RigidBodyParams(0.8, 0.5, 0.4, 0.3, tau=0.5, m=1.5)
    tr = integrate(M.rigid_body_problem(p, M0=M.perturbed_equilibrium(p, 0.1)), IntegratorConfig(1e-3, 10.0))
    if fault == "energy_sign":
        p = p.replace(alpha=-p.alpha)
    d = diag.energy_rate_check(tr, p, law="exact")
    return d <= 1e-5, f"max |dE/dt - (-alpha (M x Omega).(M~ x Omega~))| = {d:.3e}"


def check_sphere(fault):
    tr = integrate(M.sphere_problem(1.0), IntegratorConfig(1e-3, 20.0))
    d = diag.casimir_drift(tr, lambda x: float(np.linalg.norm(x)))
    return d <= 1e-8, f"max | |q| - 1 | = {d:.3e}"


def check_generic_forms(fault):
    spec = alg.so3(np.eye(3) * 0.3, casimir="norm_squared")
    I = np.array([0.8, 0.5, 0.4])
    grad = lambda mu: mu / I
    rng = np.random.default_rng(SEED)
    worst = 0.0
    tang = 0.0
    for _ in range(50):
        mu, mud = rng.normal(size=(2, 3))
        a = M.generic_dissipative_rhs(mu, mud, spec, grad, grad)
        b = M.lie_poisson_delay_rhs(mu, mud, spec, grad, grad)
        worst = max(worst, float(np.max(np.abs(a - b))))
        tang = max(tang, abs(a @ mu) / (np.linalg.norm(a) * np.linalg.norm(mu)))
    ok = worst <= 1e-12 and tang <= 1e-12
    return ok, f"bracket vs coadjoint form {worst:.3e}; orbit tangency {tang:.3e}"


def _set1():
    p = M.RigidBodyParams(0.8, 0.5, 0.4, 0.3, m=1.5)
    co = S.coefficients(p)
    return p, co


def check_linearization(fault):
    p, _ = _set1()
    lin = S.linearize(p)
    A, aG = S.fd_jacobians(p)
    err = max(np.max(np.abs(A - lin.A)), np.max(np.abs(aG - p.alpha * lin.G)))
    return err <= 1e-6, f"finite-difference Jacobian error {err:.3e}"


def check_hopf_point(fault):
    p, co = _set1()
    hp = S.hopf_point(co, p.m, p.alpha)
    w = hp.omega0 + (1e-6 if fault == "hopf_residual" else 0.0)
    r = abs(S.char_residual(1j * w, hp.tau0, co))
    P, Q = S.crossing_equations(w, hp.tau0, co)
    worst = max(r, abs(P), abs(Q))
    return worst <= 1e-10, f"characteristic residual {worst:.3e}"


def check_transversality(fault):
    p, co = _set1()
    hp = S.hopf_point(co, p.m, p.alpha)
    tr = S.transversality(co, hp)
    ts = S.tracked_slope(co, hp)
    rel = abs(ts.real - tr.real) / abs(tr.real)
    return rel <= 1e-3, f"implicit vs tracked Re dlambda/dtau relative gap {rel:.3e}"


def check_normal_form(fault):
    p, co = _set1()
    hp = S.hopf_point(co, p.m, p.alpha)
    q = p.replace(tau=hp.tau0)
    e = H.normalize_adjoint(H.eigenvectors(q, hp), q, hp)
    nf = H.cubic_coefficients(q, hp, e)
    orc = H.taylor_oracle(q, hp, e)
    rel = abs(orc.g21 - nf.g21) / abs(nf.g21)
    zeros = all(nf.F20[k] == 0 and nf.F11[k] == 0 and nf.F02[k] == 0 for k in (1, 2))
    ok = rel <= 1e-5 and zeros and e.normalization_residual <= 1e-10
    return ok, (f"g21 oracle gap {rel:.3e}; F components 2-3 zero: {zeros}; "
                f"normalization residual {e.normalization_residual:.1e}")


def check_bilinear_quadrature(fault):
    p, co = _set1()
    hp = S.hopf_point(co, p.m, p.alpha)
    q = p.replace(tau=hp.tau0)
    e = H.eigenvectors(q, hp)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(3):
        lp, lf = rng.normal(size=2) + 1j * rng.normal(size=2)
        a = H.bilinear_form(e.w, e.v, q, hp, lp, lf)
        b = H.bilinear_form_quadrature(e.w, e.v, q, hp, lp, lf)
        worst = max(worst, abs(a - b) / abs(a))
    return worst <= 1e-9, f"closed form vs quadrature {worst:.3e}"


def check_cycle_detector(fault):
    t = np.arange(0.0, 100.0, 0.01)
    tr = Trajectory.from_arrays(t, (0.1 * np.sin(2 * t))[:, None], (0.2 * np.cos(2 * t))[:, None])
    c = diag.detect_limit_cycle(tr, 0)
    ok = c.converged and abs(c.period - math.pi) <= 1e-4 and abs(c.amplitude - 0.1) <= 1e-4
    return ok, f"period error {c.period - math.pi:.2e}, amplitude error {c.amplitude - 0.1:.2e}"


CHECKS: list[tuple[str, Callable]] = [
    ("algebra.antisymmetry", check_antisymmetry),
    ("algebra.jacobi", check_jacobi),
    ("algebra.coadjoint_duality", check_coadjoint_duality),
    ("algebra.isotropy_dimension", check_isotropy),
    ("history.hermite_cubic_exact", check_hermite_cubic),
    ("integrator.method_of_steps", check_method_of_steps),
    ("integrator.fourth_order", check_integrator_order),
    ("models.casimir_conservation", check_casimir),
    ("models.energy_rate_law", check_energy_law),
    ("models.sphere_invariance", check_sphere),
    ("models.generic_forms_agree", check_generic_forms),
    ("spectral.linearization_fd", check_linearization),
    ("spectral.hopf_residual", check_hopf_point),
    ("spectral.transversality_tracking", check_transversality),
    ("hopf.normal_form_oracle", check_normal_form),
    ("hopf.bilinear_quadrature", check_bilinear_quadrature),
    ("diagnostics.cycle_detector", check_cycle_detector),
]


def run_checks(fault: Optional[str] = None) -> list[CheckResult]:
    if fault is not None and fault not in FAULTS:
        raise KeyError(f"unknown fault {fault!r}; choose one of {sorted(FAULTS)}")
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(fault)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out
