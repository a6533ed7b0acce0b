"""
Crossing the Hopf point in simulation
=====================================

Below tau0 the perturbed rotation decays back to equilibrium. Above it
the trajectory settles on a stable periodic orbit whose period follows
the normal-form prediction 2 pi / omega0 (1 + T2 (tau - tau0) / mu2)
rather than the linear period 2 pi / omega0.
"""
import math

from delaydiss import (IntegratorConfig, RigidBodyParams, adjust_step, equilibrium_state, integrate,
                       perturbed_equilibrium, rigid_body_problem)
from delaydiss import hopf as H
from delaydiss import spectral as S
from delaydiss.diagnostics import decay_ratio, detect_limit_cycle

p = RigidBodyParams(0.8, 0.5, 0.4, alpha=0.3, m=1.5)
co = S.coefficients(p)
hp = S.hopf_point(co, p.m, p.alpha)
q = p.replace(tau=hp.tau0)
e = H.normalize_adjoint(H.eigenvectors(q, hp), q, hp)
hq = H.hopf_quantities(H.cubic_coefficients(q, hp, e), S.transversality(co, hp), hp.omega0)
T0 = 2 * math.pi / hp.omega0

for factor in (0.9, 1.05, 1.1, 1.2):
    pt = p.replace(tau=factor * hp.tau0)
    h = adjust_step(0.01, pt.tau)
    traj = integrate(rigid_body_problem(pt, M0=perturbed_equilibrium(pt, 0.1)), IntegratorConfig(h, 400.0))
    ratio = decay_ratio(traj, equilibrium_state(pt), window=40.0)
    cyc = detect_limit_cycle(traj, component_index=1, expected_omega=hp.omega0)
    line = f"tau = {factor:.2f} tau0: decay ratio {ratio:9.2e}, status {cyc.status:11}"
    if cyc.converged:
        T_pred = T0 * (1 + hq.T2 * (pt.tau - hp.tau0) / hq.mu2)
        line += (f" period {cyc.period:.4f} (linear {T0:.4f}, normal form {T_pred:.4f}),"
                 f" amplitude {cyc.amplitude:.4f}")
    print(line)
