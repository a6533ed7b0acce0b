"""Dense solution history: node storage plus cubic Hermite interpolation."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "Trajectory",
    "InitialFunction",
    "HistoryRangeError",
    "hermite",
    "fd_derivatives",
]


class HistoryRangeError(LookupError):
    """A query fell outside the stored interval.

    Seeing this from the integrator means it asked for history it never
    stored, which is a bug rather than a recoverable condition.
    """


def hermite(t0, t1, x0, x1, d0, d1, t):
    """Cubic Hermite interpolant on ``[t0, t1]``, returning value and derivative."""
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    x = h00 * x0 + h10 * h * d0 + h01 * x1 + h11 * h * d1
    dh00 = (6 * s2 - 6 * s) / h
    dh10 = 3 * s2 - 4 * s + 1
    dh01 = (-6 * s2 + 6 * s) / h
    dh11 = 3 * s2 - 2 * s
    dx = dh00 * x0 + dh10 * d0 + dh01 * x1 + dh11 * d1
    return x, dx


class Trajectory:
    """Ordered nodes ``(t, x, dx)`` of a DDE solution.

    Storage is a set of preallocated arrays that double when full, so
    appending is amortised O(1). Besides the right derivative ``dx`` each
    node may carry a separate left derivative (``dx_left``); they differ
    only at ``t = 0`` where the initial function meets the solution and the
    derivative is generally discontinuous. Interpolation on an interval
    always uses the one-sided derivatives facing into that interval.
    """

    def __init__(self, dimension: int, capacity: int = 64):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = int(dimension)
        cap = max(int(capacity), 2)
        self._t = np.empty(cap)
        self._x = np.empty((cap, self.dimension))
        self._dx = np.empty((cap, self.dimension))
        self._dxl = np.empty((cap, self.dimension))
        self._n = 0
        self._offset = 0  # nodes pruned from the front

    def __len__(self) -> int:
        return self._n

    def _grow(self, need: int):
        cap = self._t.shape[0]
        if need <= cap:
            return
        new = max(need, 2 * cap)
        for name in ("_t", "_x", "_dx", "_dxl"):
            old = getattr(self, name)
            arr = np.empty((new,) + old.shape[1:])
            arr[: self._n] = old[: self._n]
            setattr(self, name, arr)

    def reserve(self, total: int):
        self._grow(int(total))

    @property
    def t(self) -> np.ndarray:
        return self._t[: self._n]

    @property
    def x(self) -> np.ndarray:
        return self._x[: self._n]

    @property
    def dx(self) -> np.ndarray:
        return self._dx[: self._n]

    @property
    def dx_left(self) -> np.ndarray:
        return self._dxl[: self._n]

    @property
    def t_min(self) -> float:
        if self._n == 0:
            raise HistoryRangeError("empty trajectory")
        return float(self._t[0])

    @property
    def t_max(self) -> float:
        if self._n == 0:
            raise HistoryRangeError("empty trajectory")
        return float(self._t[self._n - 1])

    def append(self, t: float, x, dx, dx_left=None) -> "Trajectory":
        """Append a node; ``t`` must exceed the current ``t_max``."""
        x = np.asarray(x, dtype=float)
        dx = np.asarray(dx, dtype=float)
        if x.shape != (self.dimension,) or dx.shape != (self.dimension,):
            raise ValueError(
                f"expected vectors of length {self.dimension}, got {x.shape} and {dx.shape}"
            )
        if self._n and not t > self._t[self._n - 1]:
            raise ValueError(f"node time {t!r} does not exceed t_max={self.t_max!r}")
        if not (np.isfinite(t) and np.all(np.isfinite(x)) and np.all(np.isfinite(dx))):
            raise ValueError("node contains non-finite values")
        self._grow(self._n + 1)
        i = self._n
        self._t[i] = t
        self._x[i] = x
        self._dx[i] = dx
        self._dxl[i] = dx if dx_left is None else np.asarray(dx_left, dtype=float)
        self._n += 1
        return self

    def prune_before(self, t_keep: float):
        """Drop nodes strictly older than the node bracketing ``t_keep``."""
        k = int(np.searchsorted(self._t[: self._n], t_keep, side="right")) - 1
        if k <= 0:
            return
        for name in ("_t", "_x", "_dx", "_dxl"):
            arr = getattr(self, name)
            arr[: self._n - k] = arr[k : self._n]
        self._n -= k
        self._offset += k

    def _locate(self, t: float) -> int:
        if self._n == 0:
            raise HistoryRangeError("empty trajectory")
        t0, t1 = self._t[0], self._t[self._n - 1]
        if not (t0 <= t <= t1):
            raise HistoryRangeError(f"time {t!r} outside stored history [{t0!r}, {t1!r}]")
        if self._n == 1:
            return 0
        k = int(np.searchsorted(self._t[: self._n], t, side="right")) - 1
        return min(k, self._n - 2)

    def sample(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """State and derivative at ``t`` by cubic Hermite interpolation."""
        k = self._locate(t)
        if self._n == 1:
            return self._x[0].copy(), self._dx[0].copy()
        t0, t1 = self._t[k], self._t[k + 1]
        if t == t0:
            return self._x[k].copy(), self._dx[k].copy()
        if t == t1:
            return self._x[k + 1].copy(), self._dxl[k + 1].copy()
        return hermite(t0, t1, self._x[k], self._x[k + 1], self._dx[k], self._dxl[k + 1], t)

    def sample_many(self, ts) -> np.ndarray:
        """Interpolated states at an array of times (vectorised)."""
        ts = np.asarray(ts, dtype=float)
        if self._n < 2:
            raise HistoryRangeError("need at least two nodes")
        T = self._t[: self._n]
        if ts.size and (ts.min() < T[0] or ts.max() > T[-1]):
            raise HistoryRangeError("query outside stored history")
        k = np.clip(np.searchsorted(T, ts, side="right") - 1, 0, self._n - 2)
        x, _ = hermite(
            T[k][:, None], T[k + 1][:, None],
            self._x[k], self._x[k + 1], self._dx[k], self._dxl[k + 1], ts[:, None],
        )
        return x

    def to_csv(self, path) -> Path:
        """Write one row per node: ``t,x1..xn,dx1..dxn`` with 17 significant digits."""
        path = Path(path)
        n = self.dimension
        header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"dx{i + 1}" for i in range(n)]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i in range(self._n):
                row = [self._t[i], *self._x[i], *self._dx[i]]
                w.writerow([f"{v:.17g}" for v in row])
        return path

    @classmethod
    def from_arrays(cls, t, x, dx, dx_left=None) -> "Trajectory":
        t = np.asarray(t, dtype=float)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        dx = np.atleast_2d(np.asarray(dx, dtype=float))
        if x.shape[0] != t.size:
            x = x.T
            dx = dx.T
        traj = cls(x.shape[1], capacity=t.size)
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("node times must be strictly increasing")
        traj._t[: t.size] = t
        traj._x[: t.size] = x
        traj._dx[: t.size] = dx
        traj._dxl[: t.size] = dx if dx_left is None else dx_left
        traj._n = t.size
        return traj


def fd_derivatives(x: np.ndarray, h: float) -> np.ndarray:
    """Derivatives of uniformly spaced samples by fourth-order finite differences.

    Interior nodes use the five-point central stencil and the two nodes at
    each end use one-sided five-point stencils. With fewer than five samples
    it falls back to ``np.gradient``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n == 1:
        return np.zeros_like(x)
    if n < 5:
        return np.gradient(x, h, axis=0, edge_order=2 if n >= 3 else 1)
    d = np.empty_like(x)
    d[2:-2] = (-x[4:] + 8 * x[3:-1] - 8 * x[1:-3] + x[:-4]) / (12 * h)
    d[0] = (-25 * x[0] + 48 * x[1] - 36 * x[2] + 16 * x[3] - 3 * x[4]) / (12 * h)
    d[1] = (-3 * x[0] - 10 * x[1] + 18 * x[2] - 6 * x[3] + x[4]) / (12 * h)
    d[-1] = (25 * x[-1] - 48 * x[-2] + 36 * x[-3] - 16 * x[-4] + 3 * x[-5]) / (12 * h)
    d[-2] = (3 * x[-1] + 10 * x[-2] - 18 * x[-3] + 6 * x[-4] - x[-5]) / (12 * h)
    return d


@dataclass(frozen=True)
class InitialFunction:
    """History ``phi`` on ``[-tau, 0]``, evaluated on demand."""

    fn: Callable[[float], np.ndarray]
    tau: float
    dimension: int

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be non-negative")

    def __call__(self, t: float) -> np.ndarray:
        if t < -self.tau * (1 + 1e-12) - 1e-15 or t > 1e-15:
            raise HistoryRangeError(f"initial function queried at {t!r} outside [-{self.tau}, 0]")
        v = np.asarray(self.fn(t), dtype=float).reshape(-1)
        if v.shape != (self.dimension,) or not np.all(np.isfinite(v)):
            raise ValueError(f"initial function returned an invalid value at t={t!r}")
        return v

    @classmethod
    def constant(cls, x0, tau: float) -> "InitialFunction":
        x0 = np.array(x0, dtype=float).reshape(-1)
        x0.setflags(write=False)
        return cls(lambda t: x0, float(tau), x0.size)

    @classmethod
    def tabulated(cls, times, values) -> "InitialFunction":
        """Interpolate tabulated values with a cubic spline on ``[times[0], 0]``."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if times[-1] != 0.0:
            raise ValueError("tabulated initial data must end at t = 0")
        if times.size == 1:
            return cls.constant(values[0], 0.0)
        spline = CubicSpline(times, values, axis=0)
        return cls(lambda t: spline(t), float(-times[0]), values.shape[1])

    @classmethod
    def from_callable(cls, fn, tau: float, dimension: int) -> "InitialFunction":
        return cls(fn, float(tau), int(dimension))
