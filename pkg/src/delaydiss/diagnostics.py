"""Post-hoc trajectory checks: invariant drift, energy-rate laws and limit cycles.

Everything here is a pure function of a finished :class:`Trajectory`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .history import Trajectory
from .models import RigidBodyParams, rigid_body_energy, rigid_body_energy_rate

log = logging.getLogger(__name__)

__all__ = [
    "CycleEstimate",
    "InsufficientDataError",
    "energy_rate_check",
    "energy_rate_profile",
    "casimir_drift",
    "detect_limit_cycle",
    "decay_ratio",
    "PERIOD_RTOL",
    "HEIGHT_RTOL",
    "EQUILIBRIUM_AMPLITUDE",
]

PERIOD_RTOL = 0.01
HEIGHT_RTOL = 0.02
EQUILIBRIUM_AMPLITUDE = 1e-6
N_CONVERGE = 5


class InsufficientDataError(ValueError):
    """Too few nodes for the requested diagnostic."""


@dataclass(frozen=True)
class CycleEstimate:
    """Result of peak-based limit-cycle detection.

    ``status`` is ``"cycle"`` when converged, ``"equilibrium"`` when the
    final oscillation is below ``EQUILIBRIUM_AMPLITUDE`` and
    ``"transient"`` otherwise.
    """

    amplitude: float
    period: float
    converged: bool
    transient_cut: float
    n_peaks: int = 0
    status: str = "transient"

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.converged and not self.period > 0:
            raise ValueError("a converged cycle needs a positive period")


def energy_rate_profile(traj: Trajectory, p: RigidBodyParams, law: str = "printed"):
    """Central-difference ``dE/dt`` and the law's prediction at interior nodes.

    Only nodes whose neighbours both lie in ``t >= 0`` are used, so the
    derivative jump at ``t = 0`` never enters a difference quotient. The
    node at ``t = tau`` is skipped as well: the second derivative of ``E``
    jumps there (it sees the jump of ``M~'``), which would make the central
    difference only first-order accurate at that one node.
    Returns ``(t, fd_rate, predicted_rate)``.
    """
    t = traj.t
    x = traj.x
    tau = p.tau
    i0 = int(np.searchsorted(t, 0.0, side="left"))
    idx = np.arange(i0 + 1, len(t) - 1)
    if tau > 0:
        h = t[-1] - t[-2]
        idx = idx[np.abs(t[idx] - tau) > 0.5 * h]
    if idx.size == 0:
        raise InsufficientDataError("no interior nodes after t = 0")
    E = rigid_body_energy(x, p)
    fd = (E[idx + 1] - E[idx - 1]) / (t[idx + 1] - t[idx - 1])
    Md = traj.sample_many(t[idx] - tau) if tau > 0 else x[idx]
    pred = rigid_body_energy_rate(x[idx], Md, p, law=law)
    return t[idx], fd, pred


def energy_rate_check(traj: Trajectory, p: RigidBodyParams, law: str = "printed") -> float:
    """Largest ``|dE/dt (central difference) - law|`` over the run.

    ``law="printed"`` compares against ``-alpha |M~ x Omega~|^2``, ``law="exact"``
    against ``-alpha (M x Omega) . (M~ x Omega~)``.
    """
    n_after = int(np.sum(traj.t > p.tau))
    if n_after < 10:
        raise InsufficientDataError(f"need at least 10 nodes beyond t = tau, have {n_after}")
    _, fd, pred = energy_rate_profile(traj, p, law)
    return float(np.max(np.abs(fd - pred)))


def casimir_drift(traj: Trajectory, casimir_fn: Callable[[np.ndarray], float]) -> float:
    """Largest deviation of ``casimir_fn`` on nodes with ``t >= 0`` from its value at ``t = 0``."""
    t = traj.t
    i0 = int(np.searchsorted(t, 0.0, side="left"))
    x = traj.x[i0:]
    if x.shape[0] == 0:
        return 0.0
    vals = np.array([casimir_fn(xi) for xi in x], dtype=float)
    return float(np.max(np.abs(vals - vals[0])))


def _parabola_vertex(t, y):
    """Vertex of the parabola through three points ``(t_k, y_k)``."""
    t0, t1, t2 = t
    y0, y1, y2 = y
    d0 = (y1 - y0) / (t1 - t0)
    d1 = (y2 - y1) / (t2 - t1)
    a = (d1 - d0) / (t2 - t0)
    if a == 0:
        return t1, y1
    b = d0 - a * (t0 + t1)
    tv = -b / (2 * a)
    yv = y0 + d0 * (tv - t0) + a * (tv - t0) * (tv - t1)
    return tv, yv


def _extrema(t, y, sign):
    z = sign * y
    k = np.nonzero((z[1:-1] > z[:-2]) & (z[1:-1] >= z[2:]))[0] + 1
    out_t = np.empty(k.size)
    out_y = np.empty(k.size)
    for j, i in enumerate(k):
        out_t[j], out_y[j] = _parabola_vertex(t[i - 1:i + 2], y[i - 1:i + 2])
    return out_t, out_y


def detect_limit_cycle(traj: Trajectory, component_index: int = 0, transient_fraction: float = 0.5,
                       expected_omega: Optional[float] = None) -> CycleEstimate:
    """Peak-based period and amplitude of one state component.

    The first ``transient_fraction`` of the run (measured from ``t = 0``)
    is discarded. Maxima are refined by a parabola through each node
    triple. The estimate is converged when the last five inter-peak
    intervals agree to 1% and the last five peak heights agree to 2% of
    the oscillation amplitude. Period is the mean of those intervals;
    amplitude is half the spread between the largest refined maximum and
    the smallest refined minimum over the final five periods.
    """
    if not 0 <= transient_fraction < 1:
        raise ValueError("transient_fraction must lie in [0, 1)")
    t_all = traj.t
    t_end = float(t_all[-1])
    cut = transient_fraction * max(t_end, 0.0)
    sel = t_all >= cut
    t = t_all[sel]
    y = traj.x[sel, component_index]
    if expected_omega is not None and t.size and (t[-1] - t[0]) < 20 / expected_omega:
        log.warning("analysis window %.3g s is shorter than 20/omega = %.3g s",
                    t[-1] - t[0], 20 / expected_omega)
    if t.size < 3:
        return CycleEstimate(0.0, 0.0, False, cut, 0, "transient")

    pt, py = _extrema(t, y, +1)
    qt, qy = _extrema(t, y, -1)
    span = float(np.max(y) - np.min(y)) / 2
    if pt.size < N_CONVERGE + 1:
        status = "equilibrium" if span < EQUILIBRIUM_AMPLITUDE else "transient"
        return CycleEstimate(span, 0.0, False, cut, int(pt.size), status)

    last_t = pt[-(N_CONVERGE + 1):]
    intervals = np.diff(last_t)
    heights = py[-N_CONVERGE:]
    period = float(np.mean(intervals))
    window_start = last_t[0]
    troughs = qy[qt >= window_start]
    lo = float(np.min(troughs)) if troughs.size else float(np.min(y[t >= window_start]))
    amplitude = max(0.0, (float(np.max(heights)) - lo) / 2)
    if amplitude < EQUILIBRIUM_AMPLITUDE:
        return CycleEstimate(amplitude, period, False, cut, int(pt.size), "equilibrium")
    p_ok = (np.max(intervals) - np.min(intervals)) <= PERIOD_RTOL * period
    h_ok = (np.max(heights) - np.min(heights)) <= HEIGHT_RTOL * amplitude
    converged = bool(p_ok and h_ok)
    return CycleEstimate(amplitude, period, converged, cut, int(pt.size), "cycle" if converged else "transient")


def decay_ratio(traj: Trajectory, reference, window: float) -> float:
    """``max |x - reference|`` over the last ``window`` seconds divided by its value at ``t = 0``."""
    t = traj.t
    x = traj.x
    ref = np.asarray(reference, dtype=float)
    i0 = int(np.searchsorted(t, 0.0, side="left"))
    d0 = float(np.linalg.norm(x[i0] - ref))
    if d0 == 0:
        raise ValueError("trajectory starts at the reference state")
    tail = t >= t[-1] - window
    return float(np.max(np.linalg.norm(x[tail] - ref, axis=1)) / d0)
