"""Linear stability of the steady rotation ``Omega_1 = (m / I1, 0, 0)``.

In the variables ``delta Omega`` the linearized system is
``d/dt delta Omega = A delta Omega + alpha G delta Omega~`` and the
characteristic matrix ``lambda - A - alpha G e^{-tau lambda}`` factors as
``lambda * R(lambda, tau)`` with

    R(lambda, tau) = lambda^2 + a lambda e^{-tau lambda} + b e^{-2 tau lambda} + c.

The factor ``lambda`` belongs to the direction normal to the momentum
sphere (the Casimir direction) and never moves. ``R`` at ``lambda = i w``
equals ``-P + i Q`` where ``P, Q`` are the two real crossing equations

    P = w^2 - c - a w sin(w tau) - b cos(2 w tau)
    Q = a w cos(w tau) - b sin(2 w tau).

Every point returned by :func:`hopf_point` is checked against both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .models import RigidBodyParams, rigid_body_delay_rhs

__all__ = [
    "Linearization",
    "SpectralCoefficients",
    "HopfPoint",
    "Crossing",
    "HypothesisError",
    "NoCrossingError",
    "NewtonDivergenceError",
    "DegenerateCrossingError",
    "linearize",
    "fd_jacobians",
    "coefficients",
    "critical_delay",
    "char_residual",
    "char_derivative",
    "crossing_equations",
    "zero_delay_roots",
    "imaginary_crossings",
    "hopf_point",
    "transversality",
    "transversality_printed",
    "transversality_closed_form",
    "track_root",
    "tracked_slope",
    "newton_root",
    "HOPF_RESIDUAL_TOL",
]

HOPF_RESIDUAL_TOL = 1e-10
NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50


class HypothesisError(ValueError):
    """Parameters violate the hypotheses an operation needs (e.g. I1 > I2, I1 > I3)."""


class NoCrossingError(RuntimeError):
    """No imaginary-axis crossing of the characteristic roots was found."""


class NewtonDivergenceError(RuntimeError):
    def __init__(self, msg, last_iterate=None, tau=None):
        super().__init__(msg)
        self.last_iterate = last_iterate
        self.tau = tau


class DegenerateCrossingError(ArithmeticError):
    """The implicit-differentiation denominator vanishes at the crossing."""


@dataclass(frozen=True)
class Linearization:
    A: np.ndarray
    G: np.ndarray
    alpha: float

    def matrix(self, lam: complex, tau: float) -> np.ndarray:
        """Characteristic matrix ``lambda - A - alpha G e^{-tau lambda}``."""
        return lam * np.eye(3) - self.A - self.alpha * self.G * np.exp(-tau * lam)


def _check_m(p: RigidBodyParams):
    if p.m == 0:
        raise HypothesisError("m = 0: the equilibrium family degenerates")


def linearize(p: RigidBodyParams) -> Linearization:
    """Matrices ``A`` (instantaneous) and ``G`` (delayed, before ``alpha``) at ``Omega_1``."""
    _check_m(p)
    I1, I2, I3, m = p.I1, p.I2, p.I3, p.m
    A = np.array([
        [0.0, 0.0, 0.0],
        [0.0, 0.0, (I3 - I1) * m / (I1 * I2)],
        [0.0, (I1 - I2) * m / (I1 * I3), 0.0],
    ])
    G = np.array([
        [0.0, 0.0, 0.0],
        [0.0, (I2 - I1) * m**2 / (I1 * I2), 0.0],
        [0.0, 0.0, (I3 - I1) * m**2 / (I1 * I3)],
    ])
    A.setflags(write=False)
    G.setflags(write=False)
    return Linearization(A, G, float(p.alpha))


def fd_jacobians(p: RigidBodyParams, step: float = 1e-5) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobians of ``Omega' = I^{-1} f(I Omega, I Omega~)`` at ``Omega_1``.

    Returns the derivatives with respect to the current and the delayed
    argument, which should equal ``A`` and ``alpha G``.
    """
    I = p.inertia
    om1 = np.array([p.m / p.I1, 0.0, 0.0])

    def F(om, omd):
        return rigid_body_delay_rhs(I * om, I * omd, p) / I

    J = np.empty((3, 3))
    Jd = np.empty((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = step
        J[:, k] = (F(om1 + e, om1) - F(om1 - e, om1)) / (2 * step)
        Jd[:, k] = (F(om1, om1 + e) - F(om1, om1 - e)) / (2 * step)
    return J, Jd


@dataclass(frozen=True)
class SpectralCoefficients:
    """``a, b, c`` of the reduced characteristic function.

    ``variant="determinant"`` expands the determinant of the linearization;
    ``variant="paper"`` keeps an extra ``1 / I1`` in ``a`` as in the printed
    closed form. ``b`` and ``c`` agree between the two.
    """

    a: float
    b: float
    c: float
    variant: str = "determinant"


def coefficients(p: RigidBodyParams, variant: str = "determinant") -> SpectralCoefficients:
    _check_m(p)
    I1, I2, I3, al, m = p.I1, p.I2, p.I3, p.alpha, p.m
    s = I3 * (I1 - I2) + I2 * (I1 - I3)
    if variant == "determinant":
        a = al * m**2 * s / (I1 * I2 * I3)
    elif variant == "paper":
        a = al * m**2 * s / (I1**2 * I2 * I3)
    else:
        raise ValueError(f"unknown variant {variant!r}; use 'determinant' or 'paper'")
    X = (I1 - I2) * (I1 - I3) / (I1**2 * I2 * I3)
    return SpectralCoefficients(float(a), float(al**2 * m**4 * X), float(m**2 * X), variant)


def critical_delay(p: RigidBodyParams) -> float:
    """``tau_c = I1 [I3 (I1 - I2) + I2 (I1 - I3)] / (3 |alpha| m^2 (I1 - I2)(I1 - I3))``."""
    I1, I2, I3, al, m = p.I1, p.I2, p.I3, p.alpha, p.m
    if not (I1 > I2 and I1 > I3):
        raise HypothesisError(f"critical delay needs I1 > I2 and I1 > I3 (got I={p.I1, p.I2, p.I3})")
    if al == 0 or m == 0:
        raise HypothesisError("critical delay needs alpha != 0 and m != 0")
    return I1 * (I3 * (I1 - I2) + I2 * (I1 - I3)) / (3 * abs(al) * m**2 * (I1 - I2) * (I1 - I3))


def char_residual(lam: complex, tau: float, co: SpectralCoefficients) -> complex:
    """``R(lambda, tau) = lambda^2 + a lambda e^{-tau lambda} + b e^{-2 tau lambda} + c``."""
    E = np.exp(-tau * lam)
    return lam * lam + co.a * lam * E + co.b * E * E + co.c


def char_derivative(lam: complex, tau: float, co: SpectralCoefficients) -> complex:
    """``dR / dlambda``."""
    E = np.exp(-tau * lam)
    return 2 * lam + co.a * (1 - tau * lam) * E - 2 * co.b * tau * E * E


def crossing_equations(omega: float, tau: float, co: SpectralCoefficients) -> tuple[float, float]:
    """The pair ``(P, Q)`` that must both vanish at an imaginary root ``i omega``."""
    a, b, c = co.a, co.b, co.c
    P = omega**2 - c - a * omega * math.sin(omega * tau) - b * math.cos(2 * omega * tau)
    Q = a * omega * math.cos(omega * tau) - b * math.sin(2 * omega * tau)
    return P, Q


def zero_delay_roots(co: SpectralCoefficients) -> tuple[complex, complex]:
    """Roots of ``lambda^2 + a lambda + (b + c)``, the characteristic function at tau = 0."""
    disc = complex(co.a**2 - 4 * (co.b + co.c))
    r = np.sqrt(disc)
    return (-co.a + r) / 2, (-co.a - r) / 2


@dataclass(frozen=True)
class Crossing:
    """A purely imaginary root ``i omega`` of ``R`` at delay ``tau``.

    ``family`` is ``"A+"`` (``omega tau = pi/2 mod 2 pi``), ``"A-"``
    (``3 pi / 2 mod 2 pi``) or ``"B"`` (``omega^2 = b + c``).
    """

    omega: float
    tau: float
    family: str
    k: int


def _add_crossing(out, omega, theta, family, k, co):
    if omega <= 0:
        return
    tau = (theta + 2 * math.pi * k) / omega
    if tau <= 0:
        return
    if abs(char_residual(1j * omega, tau, co)) <= 1e-8 * max(1.0, omega**2):
        out.append(Crossing(float(omega), float(tau), family, k))


def imaginary_crossings(co: SpectralCoefficients, tau_max: float) -> list[Crossing]:
    """All imaginary-axis roots ``i omega, omega > 0`` with ``0 < tau <= tau_max``, sorted by tau."""
    a, b, c = co.a, co.b, co.c
    out: list[Crossing] = []
    kmax = 1
    for sign, fam, theta in ((+1, "A+", math.pi / 2), (-1, "A-", 3 * math.pi / 2)):
        # w^2 - sign * a w + (b - c) = 0
        disc = a * a - 4 * (b - c)
        if disc < 0:
            continue
        for w in ((sign * a + math.sqrt(disc)) / 2, (sign * a - math.sqrt(disc)) / 2):
            if w > 0:
                kmax = max(kmax, int(tau_max * w / (2 * math.pi)) + 2)
                for k in range(kmax):
                    _add_crossing(out, w, theta, fam, k, co)
    if b != 0 and b + c > 0:
        w = math.sqrt(b + c)
        s = a * w / (2 * b)
        if abs(s) <= 1:
            th1 = math.asin(s) % (2 * math.pi)
            th2 = (math.pi - math.asin(s)) % (2 * math.pi)
            kk = int(tau_max * w / (2 * math.pi)) + 2
            for k in range(kk):
                for th in {th1, th2}:
                    if abs(math.cos(th)) > 1e-12:
                        _add_crossing(out, w, th, "B", k, co)
    out = [x for x in out if x.tau <= tau_max]
    out.sort(key=lambda x: (x.tau, x.omega))
    dedup: list[Crossing] = []
    for x in out:
        if dedup and abs(dedup[-1].tau - x.tau) < 1e-12 and abs(dedup[-1].omega - x.omega) < 1e-12:
            continue
        dedup.append(x)
    return dedup


@dataclass(frozen=True)
class HopfPoint:
    """Imaginary root ``i omega0`` at ``tau0``, validated against ``R`` on construction.

    ``branch`` records the branch rule the point came from (``case-i`` for
    ``omega tau = pi/2``, ``case-ii`` for ``3 pi / 2``). When the prescribed
    branch fails validation the point is the first crossing found by
    enumeration and Newton refinement, and ``flagged`` is set with an
    explanation in ``note``.
    """

    omega0: float
    tau0: float
    branch: str
    coefficients: SpectralCoefficients
    residual: float = field(default=float("nan"))
    flagged: bool = False
    note: str = ""
    family: str = ""

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        r = abs(char_residual(1j * self.omega0, self.tau0, self.coefficients))
        P, Q = crossing_equations(self.omega0, self.tau0, self.coefficients)
        worst = max(r, abs(P), abs(Q))
        if not worst <= HOPF_RESIDUAL_TOL:
            raise ValueError(f"(omega0, tau0) is not an imaginary root: residual {worst:.3e}")
        object.__setattr__(self, "residual", float(r))

    @property
    def lambda1(self) -> complex:
        return 1j * self.omega0


def _branch_candidate(co: SpectralCoefficients, case: str):
    disc = co.a**2 - 4 * (co.b - co.c)
    if disc < 0:
        return None, f"negative discriminant a^2 - 4(b - c) = {disc:.6g}"
    if case == "case-i":
        w = (co.a + math.sqrt(disc)) / 2
        theta = math.pi / 2
    else:
        w = (-co.a + math.sqrt(disc)) / 2
        theta = 3 * math.pi / 2
    if not w > 0:
        return None, f"{case} formula gives omega0 = {w:.6g} <= 0"
    tau = theta / w
    P, Q = crossing_equations(w, tau, co)
    res = max(abs(char_residual(1j * w, tau, co)), abs(P), abs(Q))
    if res > HOPF_RESIDUAL_TOL:
        return None, f"{case} point fails validation with residual {res:.3e}"
    return (w, tau), ""


def hopf_point(co: SpectralCoefficients, m: float, alpha: float,
               tau_max: Optional[float] = None) -> HopfPoint:
    """Imaginary-axis root ``(omega0, tau0)`` by the branch rule on ``|m|`` versus ``1/|alpha|``.

    ``|m| < 1/|alpha|`` selects ``omega0 = (a + sqrt(a^2 - 4(b - c)))/2``,
    ``tau0 = pi/(2 omega0)``; otherwise ``omega0 = (-a + sqrt(...))/2``,
    ``tau0 = 3 pi/(2 omega0)``. A candidate that is not positive or not a
    root is replaced by the smallest-delay crossing found by enumeration,
    refined by Newton iteration, and the result is flagged.
    """
    if alpha == 0 or m == 0:
        raise HypothesisError("Hopf analysis needs alpha != 0 and m != 0")
    case = "case-i" if abs(m) < 1 / abs(alpha) else "case-ii"
    cand, why = _branch_candidate(co, case)
    if cand is not None:
        return HopfPoint(cand[0], cand[1], case, co, family="A+" if case == "case-i" else "A-")
    scale = max(math.pi / math.sqrt(max(co.b + co.c, 1e-300)), 1.0)
    crossings = imaginary_crossings(co, tau_max or 50 * scale)
    if not crossings:
        raise NoCrossingError(f"{why}; no imaginary-axis crossing found by enumeration")
    x = crossings[0]
    lam = newton_root(co, 1j * x.omega, x.tau)
    w = abs(lam.imag)
    return HopfPoint(
        w, x.tau, "tracked", co, flagged=True, family=x.family,
        note=f"{why}; using first crossing (family {x.family}, k={x.k}) refined by Newton",
    )


def transversality(co: SpectralCoefficients, hp: HopfPoint) -> complex:
    """``dlambda/dtau`` at ``(i omega0, tau0)`` by implicit differentiation of ``R``."""
    lam = hp.lambda1
    tau = hp.tau0
    E = np.exp(-tau * lam)
    num = co.a * lam * lam * E + 2 * co.b * lam * E * E
    den = char_derivative(lam, tau, co)
    if abs(den) <= 1e-14 * max(1.0, abs(num)):
        raise DegenerateCrossingError("dR/dlambda vanishes at the crossing (root not simple)")
    return complex(num / den)


def transversality_printed(co: SpectralCoefficients, hp: HopfPoint) -> float:
    """The printed closed form ``w (w + a)(a - 2b) / (tau (a w - 2b)^2 + (w + a)^2)``."""
    w, t, a, b = hp.omega0, hp.tau0, co.a, co.b
    return w * (w + a) * (a - 2 * b) / (t * (a * w - 2 * b) ** 2 + (w + a) ** 2)


def transversality_closed_form(co: SpectralCoefficients, hp: HopfPoint) -> Optional[float]:
    """Exact ``Re dlambda/dtau`` on the ``cos(w tau) = 0`` crossings.

    With ``s = sin(w tau) = +-1``:
    ``Re = s w (a w - 2 s b)(2 w - s a) / (tau^2 (a w - 2 s b)^2 + (2 w - s a)^2)``.
    Returns ``None`` off those crossings.
    """
    w, t, a, b = hp.omega0, hp.tau0, co.a, co.b
    if abs(math.cos(w * t)) > 1e-9:
        return None
    s = 1.0 if math.sin(w * t) > 0 else -1.0
    u = a * w - 2 * s * b
    v = 2 * w - s * a
    return s * w * u * v / (t * t * u * u + v * v)


def newton_root(co: SpectralCoefficients, seed: complex, tau: float,
                tol: float = NEWTON_TOL, maxiter: int = NEWTON_MAXITER) -> complex:
    """Newton iteration on ``R(., tau)``; stops when ``|R| <= tol``."""
    lam = complex(seed)
    for _ in range(maxiter + 1):
        r = char_residual(lam, tau, co)
        if abs(r) <= tol:
            return lam
        d = char_derivative(lam, tau, co)
        if d == 0 or not np.isfinite(d):
            break
        lam = lam - r / d
        if not np.isfinite(lam):
            break
    raise NewtonDivergenceError(
        f"Newton did not converge within {maxiter} iterations at tau={tau!r} (last iterate {lam!r})",
        last_iterate=lam, tau=tau,
    )


def track_root(co: SpectralCoefficients, lambda_seed: complex, tau_from: float, tau_to: float,
               steps: int) -> list[tuple[float, complex]]:
    """Continue a characteristic root along a uniform grid of ``steps + 1`` delays.

    Each point is warm-started from the previous root (with a secant
    predictor once two points exist).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    r0 = abs(char_residual(lambda_seed, tau_from, co))
    if not r0 <= 1e-8:
        raise ValueError(f"seed is not a root at tau_from: residual {r0:.3e}")
    taus = np.linspace(tau_from, tau_to, steps + 1)
    lam = newton_root(co, lambda_seed, tau_from)
    out = [(float(taus[0]), lam)]
    for i in range(1, steps + 1):
        guess = lam if i < 2 else 2 * lam - out[-2][1]
        try:
            lam = newton_root(co, guess, float(taus[i]))
        except NewtonDivergenceError:
            lam = newton_root(co, out[-1][1], float(taus[i]))
        out.append((float(taus[i]), lam))
    return out


def tracked_slope(co: SpectralCoefficients, hp: HopfPoint, dtau: float = 1e-4) -> complex:
    """Central-difference ``dlambda/dtau`` from roots tracked to ``tau0 +- dtau``."""
    seed = hp.lambda1
    up = track_root(co, seed, hp.tau0, hp.tau0 + dtau, 4)[-1][1]
    down = track_root(co, seed, hp.tau0, hp.tau0 - dtau, 4)[-1][1]
    return (up - down) / (2 * dtau)
