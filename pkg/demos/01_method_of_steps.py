"""
Method of steps on a scalar delay equation
==========================================

x'(t) = -x(t - 1) with x = 1 on [-1, 0] has a piecewise polynomial
solution: x = 1 - t on [0, 1] and x = 1 - t + (t - 1)^2 / 2 on [1, 2].
The integrator reproduces it to rounding because RK4 with cubic Hermite
history is exact for polynomials of this degree.
"""
import numpy as np

from delaydiss import DDEProblem, InitialFunction, IntegratorConfig, integrate

prob = DDEProblem(1, lambda t, x, xd: -xd, tau=1.0, initial=InitialFunction.constant([1.0], 1.0))
traj = integrate(prob, IntegratorConfig(h=1e-3, t_end=2.0))

# compare with the closed form on both delay intervals
ts = np.linspace(0.0, 2.0, 9)
exact = np.where(ts <= 1, 1 - ts, 1 - ts + (ts - 1) ** 2 / 2)
numeric = traj.sample_many(ts)[:, 0]
for t, a, b in zip(ts, numeric, exact):
    print(f"t = {t:4.2f}   x = {a: .12f}   exact = {b: .12f}")

print("max error:", np.max(np.abs(numeric - exact)))
print("x(2) =", traj.sample(2.0)[0][0])
