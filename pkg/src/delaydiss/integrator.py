"""Fixed-step RK4 integration of constant-delay DDEs by the method of steps.

The step ``h`` must divide the delay, so the delayed argument of every RK
stage lands on a completed interval of history: at the stage times
``t, t + h/2, t + h`` the delayed times are a node, the midpoint of the
following interval, and the next node. Midpoints are filled in with the
cubic Hermite interpolant of the stored states and derivatives.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .history import InitialFunction, Trajectory, fd_derivatives

__all__ = [
    "DDEProblem",
    "IntegratorConfig",
    "DivergenceError",
    "NonFiniteRhsError",
    "DriftReport",
    "integrate",
    "integrate_on_orbit",
    "adjust_step",
    "delay_steps",
]

log = logging.getLogger(__name__)


class DivergenceError(ArithmeticError):
    """The state norm exceeded the divergence guard."""

    def __init__(self, time: float, norm: float, guard: float):
        super().__init__(f"state norm {norm:.6g} exceeded guard {guard:.6g} at t={time:.6g}")
        self.time = time
        self.norm = norm
        self.guard = guard


class NonFiniteRhsError(ArithmeticError):
    """The right-hand side returned NaN or infinity."""

    def __init__(self, time: float):
        super().__init__(f"right-hand side returned a non-finite value at t={time:.6g}")
        self.time = time


@dataclass(frozen=True)
class DDEProblem:
    """``x'(t) = rhs(t, x(t), x(t - tau))`` with ``x = phi`` on ``[-tau, 0]``."""

    dimension: int
    rhs: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    tau: float
    initial: InitialFunction
    name: str = "dde"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if not (self.tau >= 0 and math.isfinite(self.tau)):
            raise ValueError("delay must be finite and non-negative")
        if self.initial.dimension != self.dimension:
            raise ValueError("initial function dimension does not match the problem")
        if self.initial.tau < self.tau * (1 - 1e-12):
            raise ValueError("initial function does not cover [-tau, 0]")


@dataclass(frozen=True)
class IntegratorConfig:
    h: float
    t_end: float
    divergence_guard: float = 1e6
    prune_history: bool = False

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("step h must be positive")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive")
        if not self.divergence_guard > 0:
            raise ValueError("divergence_guard must be positive")


def delay_steps(tau: float, h: float, rtol: float = 1e-9) -> int:
    """Number of steps per delay; raises if ``tau / h`` is not an integer."""
    if tau == 0:
        return 0
    n = round(tau / h)
    if n < 1 or abs(n * h - tau) > rtol * tau:
        raise ValueError(
            f"delay {tau!r} is not an integer multiple of the step {h!r}; "
            f"use adjust_step to pick a compatible step"
        )
    return int(n)


def adjust_step(h: float, tau: float) -> float:
    """Largest step not exceeding ``h`` that divides ``tau`` exactly."""
    if tau == 0:
        return h
    n = math.ceil(tau / h - 1e-9)
    return tau / n


def integrate(
    problem: DDEProblem,
    config: IntegratorConfig,
    observer: Optional[Callable[[float, np.ndarray], None]] = None,
) -> Trajectory:
    """Integrate ``problem`` on ``[0, t_end]`` and return the full trajectory.

    Nodes on ``[-tau, 0]`` come from the initial function at spacing ``h``;
    their derivatives are finite differences of it. The node at ``t = 0``
    stores this difference as its left derivative and ``rhs(0, ...)`` as its
    right derivative. ``observer(t, x)`` is called on each new node, which
    lets callers monitor long runs when ``prune_history`` keeps only the
    last delay interval in memory.
    """
    h = config.h
    tau = problem.tau
    N = delay_steps(tau, h)
    n_steps = max(1, math.ceil(config.t_end / h - 1e-9))
    n = problem.dimension
    f = problem.rhs
    guard = config.divergence_guard

    # history nodes i = 0..N at times (i - N) h
    phi = problem.initial
    hist = np.array([phi((i - N) * h) if i < N else phi(0.0) for i in range(N + 1)])
    hist_d = fd_derivatives(hist, h) if N > 0 else np.zeros((1, n))

    total = N + 1 + n_steps
    L = N + 2 if config.prune_history else total
    ts = np.empty(L)
    xs = np.empty((L, n))
    ds = np.empty((L, n))
    dls = np.empty((L, n))
    for i in range(N + 1):
        ts[i % L] = (i - N) * h
        xs[i % L] = hist[i]
        ds[i % L] = hist_d[i]
        dls[i % L] = hist_d[i]

    def checked(t, val):
        val = np.asarray(val, dtype=float)
        if not np.all(np.isfinite(val)):
            raise NonFiniteRhsError(t)
        return val

    x = hist[N].copy()
    k1 = checked(0.0, f(0.0, x, hist[0] if N > 0 else x))
    ds[N % L] = k1
    if observer is not None:
        observer(0.0, x)

    h2 = 0.5 * h
    h6 = h / 6.0
    hh8 = h / 8.0
    for k in range(n_steps):
        t = k * h
        tm = t + h2
        tn = (k + 1) * h
        if N > 0:
            j0 = k % L
            j1 = (k + 1) % L
            xd0 = xs[j0]
            xd1 = xs[j1]
            xdm = 0.5 * (xd0 + xd1) + hh8 * (ds[j0] - dls[j1])
            xa = x + h2 * k1
            k2 = f(tm, xa, xdm)
            xb = x + h2 * k2
            k3 = f(tm, xb, xdm)
            xc = x + h * k3
            k4 = f(tn, xc, xd1)
            x = x + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            kn = f(tn, x, xd1)
        else:
            xa = x + h2 * k1
            k2 = f(tm, xa, xa)
            xb = x + h2 * k2
            k3 = f(tm, xb, xb)
            xc = x + h * k3
            k4 = f(tn, xc, xc)
            x = x + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            kn = f(tn, x, x)
        # a NaN or inf from any stage propagates into x or kn, so one check per step suffices
        nrm = math.sqrt(float(x @ x))
        if not (math.isfinite(nrm) and math.isfinite(float(kn @ kn))):
            raise NonFiniteRhsError(tn)
        if nrm > guard:
            raise DivergenceError(tn, nrm, guard)
        p = (N + 1 + k) % L
        ts[p] = tn
        xs[p] = x
        ds[p] = kn
        dls[p] = kn
        k1 = kn
        if observer is not None:
            observer(tn, x)

    if config.prune_history:
        last = N + n_steps
        idx = np.array([i % L for i in range(max(0, last - L + 1), last + 1)])
        return Trajectory.from_arrays(ts[idx], xs[idx], ds[idx], dls[idx])
    return Trajectory.from_arrays(ts, xs, ds, dls)


@dataclass(frozen=True)
class DriftReport:
    max_drift: float
    time_of_max: float
    reference: float


def integrate_on_orbit(
    problem: DDEProblem,
    config: IntegratorConfig,
    casimir: Callable[[np.ndarray], float],
) -> tuple[Trajectory, DriftReport]:
    """``integrate`` plus the largest deviation of ``casimir`` from its value at t = 0."""
    state = {"ref": None, "max": 0.0, "t": 0.0}

    def watch(t, x):
        c = float(casimir(x))
        if state["ref"] is None:
            state["ref"] = c
            return
        d = abs(c - state["ref"])
        if d > state["max"]:
            state["max"], state["t"] = d, t

    traj = integrate(problem, config, observer=watch)
    return traj, DriftReport(state["max"], state["t"], state["ref"])
