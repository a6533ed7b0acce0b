"""Center-manifold reduction and Hopf normal form at ``(omega0, tau0)``.

Conventions
-----------
The state is ``V = Omega - Omega_1`` and the linear part is
``V' = A V + alpha G V(t - tau)``. With ``lambda1 = i omega0``:

* ``phi(theta) = v e^{lambda1 theta}`` on ``[-tau, 0]``, ``v = (0, v2, v3)``
  a right null vector of ``Delta(lambda1) = lambda1 - A - alpha G e^{-lambda1 tau}``.
* ``psi(s) = w e^{lambda1 s}`` on ``[0, tau]`` with ``conj(w)`` a left null
  vector of ``Delta(lambda1)``.
* The pairing is the point-delay form
  ``<psi, phi> = conj(psi(0)) phi(0) + alpha int_{-tau}^0 conj(psi(xi + tau)) G phi(xi) dxi``,
  conjugate-linear in ``psi``.

The quadratic and cubic parts of the nonlinearity are exact multilinear
forms (the vector field is a polynomial of degree three), so the
coefficients ``F20, F11, F02, F21`` are evaluated by polarization rather
than by hand-expanded component formulas. The second-order center
manifold coefficient ``w11`` has a constant first component fixed by the
momentum sphere ``|I (Omega_1 + V)| = |m|``; the linear equation for it is
singular in exactly that direction.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import integrate as spi

from .models import RigidBodyParams, rigid_body_delay_rhs
from .spectral import HopfPoint, linearize, transversality

__all__ = [
    "EigenData",
    "NormalFormData",
    "HopfQuantities",
    "OracleResult",
    "ResonanceError",
    "eigenvectors",
    "printed_eigenvectors",
    "bilinear_form",
    "bilinear_form_printed",
    "bilinear_form_quadrature",
    "normalize_adjoint",
    "cubic_coefficients",
    "hopf_quantities",
    "center_manifold_trajectory",
    "taylor_oracle",
    "printed_F_coefficients",
    "exact_nonlinearity",
    "EIGEN_TOL",
]

EIGEN_TOL = 1e-10
PRINTED_TOL = 1e-8
SERIES_CUTOFF = 1e-6


class ResonanceError(ArithmeticError):
    """A linear system in the normal-form computation is singular."""


# --------------------------------------------------------------------------
# eigenvectors


@dataclass(frozen=True)
class EigenData:
    """Eigenvector ``v`` of the generator, adjoint ``w`` and their normalization.

    ``a11 = <psi, phi>`` and ``a12 = <psi, conj(phi)>``. After
    :func:`normalize_adjoint`, ``b11, b12`` give
    ``psi~ = b11 psi + b12 conj(psi)`` with ``<psi~, phi> = 1`` and
    ``<psi~, conj(phi)> = 0``, and ``h = conj(psi~(0))`` is the row vector
    that projects onto the center direction.
    """

    lambda1: complex
    tau0: float
    v: np.ndarray
    w: np.ndarray
    v_residual: float
    w_residual: float
    printed_v_residual: float
    printed_w_residual: float
    flags: tuple = ()
    a11: Optional[complex] = None
    a12: Optional[complex] = None
    b11: Optional[complex] = None
    b12: Optional[complex] = None
    h: Optional[np.ndarray] = None
    normalization_residual: Optional[float] = None

    @property
    def v2(self):
        return self.v[1]

    @property
    def v3(self):
        return self.v[2]

    @property
    def w2(self):
        return self.w[1]

    @property
    def w3(self):
        return self.w[2]

    @property
    def w_tilde(self) -> Optional[np.ndarray]:
        """``psi~(0) = b11 w + b12 conj(w)``."""
        if self.b11 is None:
            return None
        return self.b11 * self.w + self.b12 * np.conj(self.w)

    @property
    def w2_tilde(self):
        wt = self.w_tilde
        return None if wt is None else wt[1]

    @property
    def w3_tilde(self):
        wt = self.w_tilde
        return None if wt is None else wt[2]


def printed_eigenvectors(p: RigidBodyParams, hp: HopfPoint) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvector and adjoint vector in their printed closed forms.

    ``v = (0, (I3 - I1) m, lambda1 I1 I2 - (I2 - I1) m^2 alpha e^{-lambda1 tau0})`` and
    ``w = (0, I2 (I1 - I2) m, (lambda1 I1 I2 - (I2 - I1) m^2 alpha e^{lambda1 tau0}) I3)``.
    """
    I1, I2, I3, m, al = p.I1, p.I2, p.I3, p.m, p.alpha
    l1 = hp.lambda1
    t0 = hp.tau0
    v = np.array([0, (I3 - I1) * m, l1 * I1 * I2 - (I2 - I1) * m**2 * al * cmath.exp(-l1 * t0)], dtype=complex)
    w = np.array([0, I2 * (I1 - I2) * m, (l1 * I1 * I2 - (I2 - I1) * m**2 * al * cmath.exp(l1 * t0)) * I3], dtype=complex)
    return v, w


def _rel_residual(D, x, left=False):
    r = (np.conj(x) @ D) if left else (D @ x)
    scale = max(1.0, np.linalg.norm(D, 2)) * max(np.linalg.norm(x), 1e-300)
    return float(np.linalg.norm(r) / scale)


def _null_vector(D: np.ndarray) -> np.ndarray:
    _, s, vh = np.linalg.svd(D)
    if s[-1] > 1e-8 * max(1.0, s[0]):
        raise ValueError(f"characteristic matrix is not singular (smallest singular value {s[-1]:.3e})")
    return np.conj(vh[-1])


def eigenvectors(p: RigidBodyParams, hp: HopfPoint) -> EigenData:
    """Eigenvector ``v`` and adjoint vector ``w`` at ``lambda1 = i omega0``.

    Both printed forms are residual-checked; when a printed vector fails
    at ``1e-8`` the nullspace vector is used and the failure is recorded
    in ``flags``. The returned ``v`` is scaled so that ``v2`` equals the
    linearization entry ``A[1, 2]``, which makes it the printed vector
    divided by ``I1 I2``.
    """
    lin = linearize(p)
    l1 = hp.lambda1
    D = lin.matrix(l1, hp.tau0)
    pv, pw = printed_eigenvectors(p, hp)
    rv_p = _rel_residual(D, pv)
    rw_p = _rel_residual(D, pw, left=True)
    flags = []

    if rv_p <= PRINTED_TOL:
        v = pv / (p.I1 * p.I2)
    else:
        flags.append(f"printed eigenvector fails the residual check ({rv_p:.3e}); using the nullspace vector")
        v = _null_vector(D)
        if abs(v[1]) > 1e-14:
            v = v * (lin.A[1, 2] / v[1])
    if rw_p <= PRINTED_TOL:
        w = pw
    else:
        flags.append(
            f"printed adjoint vector fails the residual check ({rw_p:.3e}); "
            "its third component pairs lambda1 with e^{+lambda1 tau0}, while the adjoint needs "
            "lambda2 with e^{+lambda1 tau0} (or lambda1 with e^{-lambda1 tau0} without conjugation); "
            "using the left nullspace vector"
        )
        wbar = _null_vector(D.T)  # D^T wbar = 0, i.e. wbar^T D = 0
        w = np.conj(wbar)
        if abs(w[1]) > 1e-14:
            w = w * (pw[1] / w[1])
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    v[0] = 0.0
    w[0] = 0.0
    rv = _rel_residual(D, v)
    rw = _rel_residual(D, w, left=True)
    if rv > EIGEN_TOL or rw > EIGEN_TOL:
        raise ValueError(f"eigenvector residuals too large: v {rv:.3e}, w {rw:.3e}")
    return EigenData(l1, hp.tau0, v, w, rv, rw, rv_p, rw_p, tuple(flags))


# --------------------------------------------------------------------------
# bilinear forms


def _phi1(z: complex) -> complex:
    """``(e^z - 1) / z`` with its series near zero."""
    if abs(z) < SERIES_CUTOFF:
        return 1 + z / 2 + z * z / 6
    return complex(np.expm1(z)) / z


def _P(kappa: complex, tau: float) -> complex:
    """``int_{-tau}^0 e^{kappa theta} dtheta``."""
    return tau * _phi1(-kappa * tau)


def _dP(kappa: complex, tau: float) -> complex:
    """``int_{-tau}^0 theta e^{kappa theta} dtheta``."""
    z = kappa * tau
    if abs(z) < 1e-3:
        # -sum_n kappa^n (-tau)^{n+2} / (n! (n+2))
        s = 0j
        term = 1.0 + 0j
        for n in range(12):
            s += term * (-tau) ** (n + 2) / (n + 2)
            term *= kappa / (n + 1)
        return -s
    e = cmath.exp(-z)
    return tau * e / kappa - (1 - e) / kappa**2


def bilinear_form(psi_coeffs, phi_coeffs, p: RigidBodyParams, hp: HopfPoint,
                  lambda_psi: complex, lambda_phi: complex) -> complex:
    """``<psi, phi>`` for ``psi(s) = c_psi e^{lambda_psi s}``, ``phi(theta) = c_phi e^{lambda_phi theta}``.

    Closed form:
    ``conj(c_psi) . c_phi + alpha (conj(c_psi)^T G c_phi) e^{conj(lambda_psi) tau}
    (1 - e^{-s tau}) / s`` with ``s = conj(lambda_psi) + lambda_phi``.
    """
    G = linearize(p).G
    wc = np.conj(np.asarray(psi_coeffs, dtype=complex))
    v = np.asarray(phi_coeffs, dtype=complex)
    tau = hp.tau0
    mu = np.conj(lambda_psi)
    s = mu + lambda_phi
    integral = cmath.exp(mu * tau) * tau * _phi1(-s * tau)
    return complex(wc @ v + p.alpha * (wc @ G @ v) * integral)


def bilinear_form_printed(psi_coeffs, phi_coeffs, p: RigidBodyParams, hp: HopfPoint,
                          lambda_psi: complex, lambda_phi: complex) -> complex:
    """The double-integral pairing with a ``dtheta`` measure, as printed.

    ``conj(psi(0)) phi(0) - alpha int_{-tau}^0 int_0^theta conj(psi(xi - theta)) G phi(xi) dxi dtheta``.
    This is the pairing for a delay spread uniformly over ``[-tau, 0]``, not
    for the point delay of the model; it is kept only for comparison.
    The inner integral is ``(e^{lambda theta} - e^{-mu theta}) / (mu + lambda)``
    with ``mu = conj(lambda_psi)``, so the outer one is a divided difference
    of ``P(kappa) = int_{-tau}^0 e^{kappa theta} dtheta``.
    """
    G = linearize(p).G
    wc = np.conj(np.asarray(psi_coeffs, dtype=complex))
    v = np.asarray(phi_coeffs, dtype=complex)
    tau = hp.tau0
    mu = np.conj(lambda_psi)
    x, y = complex(lambda_phi), complex(-mu)
    if abs(x - y) * max(tau, 1.0) < SERIES_CUTOFF:
        dd = _dP((x + y) / 2, tau)
    else:
        dd = (_P(x, tau) - _P(y, tau)) / (x - y)
    return complex(wc @ v - p.alpha * (wc @ G @ v) * dd)


def bilinear_form_quadrature(psi_coeffs, phi_coeffs, p: RigidBodyParams, hp: HopfPoint,
                             lambda_psi: complex, lambda_phi: complex, form: str = "point",
                             tol: float = 1e-12) -> complex:
    """Same pairings by adaptive quadrature (``quad`` or ``dblquad``), for cross-checks."""
    G = linearize(p).G
    wc = np.conj(np.asarray(psi_coeffs, dtype=complex))
    v = np.asarray(phi_coeffs, dtype=complex)
    k = complex(wc @ G @ v)
    tau = hp.tau0
    mu = complex(np.conj(lambda_psi))
    lp = complex(lambda_phi)
    base = complex(wc @ v)
    if form == "point":
        def f(xi):
            return cmath.exp(mu * (xi + tau)) * cmath.exp(lp * xi)

        re = spi.quad(lambda x: f(x).real, -tau, 0, epsabs=tol, epsrel=tol, limit=200)[0]
        im = spi.quad(lambda x: f(x).imag, -tau, 0, epsabs=tol, epsrel=tol, limit=200)[0]
        return base + p.alpha * k * complex(re, im)
    if form == "printed":
        def g(xi, theta):
            return cmath.exp(mu * (xi - theta)) * cmath.exp(lp * xi)

        # dblquad integrates func(y, x) with x outer; here x = theta, y = xi in [theta, 0]
        # int_0^theta dxi = -int_theta^0 dxi
        re = spi.dblquad(lambda xi, th: -g(xi, th).real, -tau, 0, lambda th: th, lambda th: 0.0,
                         epsabs=tol, epsrel=tol)[0]
        im = spi.dblquad(lambda xi, th: -g(xi, th).imag, -tau, 0, lambda th: th, lambda th: 0.0,
                         epsabs=tol, epsrel=tol)[0]
        return base - p.alpha * k * complex(re, im)
    raise ValueError(f"unknown form {form!r}")


def normalize_adjoint(e: EigenData, p: RigidBodyParams, hp: HopfPoint) -> EigenData:
    """Solve ``<psi~, phi> = 1``, ``<psi~, conj(phi)> = 0`` for ``psi~ = b11 psi + b12 conj(psi)``.

    Because the pairing is conjugate-linear in ``psi`` the system reads
    ``conj(b11) a11 + conj(b12) conj(a12) = 1`` and
    ``conj(b11) a12 + conj(b12) conj(a11) = 0``, whose solution is
    ``b11 = a11 / d``, ``b12 = -conj(a12) / d`` with ``d = |a11|^2 - |a12|^2``.
    The system is solved numerically and then checked against these forms.
    """
    l1 = e.lambda1
    l2 = np.conj(l1)
    a11 = bilinear_form(e.w, e.v, p, hp, l1, l1)
    a12 = bilinear_form(e.w, np.conj(e.v), p, hp, l1, l2)
    d = abs(a11) ** 2 - abs(a12) ** 2
    if abs(d) <= 1e-14 * abs(a11) ** 2:
        raise ResonanceError("normalization system is singular")
    # unknowns x = conj(b11), y = conj(b12)
    M = np.array([[a11, np.conj(a12)], [a12, np.conj(a11)]], dtype=complex)
    x, y = np.linalg.solve(M, np.array([1, 0], dtype=complex))
    b11, b12 = complex(np.conj(x)), complex(np.conj(y))
    flags = list(e.flags)
    if abs(b11 - a11 / d) > 1e-10 * abs(b11) or abs(b12 + np.conj(a12) / d) > 1e-10 * max(abs(b11), 1e-300):
        flags.append("direct normalization disagrees with b11 = a11/d, b12 = -conj(a12)/d")
    # psi~(s) = b11 w e^{l1 s} + b12 conj(w) e^{l2 s}
    h = np.conj(b11) * np.conj(e.w) + np.conj(b12) * e.w
    n1 = np.conj(b11) * a11 + np.conj(b12) * np.conj(a12)
    n2 = np.conj(b11) * a12 + np.conj(b12) * np.conj(a11)
    res = max(abs(n1 - 1), abs(n2))
    if res > EIGEN_TOL:
        raise ResonanceError(f"normalization residual {res:.3e}")
    return replace(e, a11=complex(a11), a12=complex(a12), b11=b11, b12=b12, h=h,
                   normalization_residual=float(res), flags=tuple(flags))


# --------------------------------------------------------------------------
# nonlinearity


def exact_nonlinearity(p: RigidBodyParams, V, Vd) -> np.ndarray:
    """``N(V, V~) = f(Omega_1 + V, Omega_1 + V~) - A V - alpha G V~`` from the full rhs."""
    lin = linearize(p)
    I = p.inertia
    om1 = np.array([p.m / p.I1, 0.0, 0.0])
    f = rigid_body_delay_rhs(I * (om1 + V), I * (om1 + Vd), p) / I
    return f - lin.A @ V - p.alpha * lin.G @ Vd


def _cross(a, b):
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


class _Multilinear:
    """Quadratic and cubic parts of ``N`` on stacked arguments ``X = (V, V~)`` in C^6."""

    def __init__(self, p: RigidBodyParams):
        if p.casimir_scaled:
            raise NotImplementedError("normal form implemented for the unscaled dissipation")
        self.I = p.inertia.astype(complex)
        self.al = p.alpha
        self.M1 = np.array([p.m, 0, 0], dtype=complex)
        self.Om1 = np.array([p.m / p.I1, 0, 0], dtype=complex)

    def quad(self, X):
        I, al = self.I, self.al
        V, Vd = X[:3], X[3:]
        U, Ud = I * V, I * Vd
        out = _cross(U, V) + al * (
            _cross(U, _cross(Ud, self.Om1)) + _cross(U, _cross(self.M1, Vd)) + _cross(self.M1, _cross(Ud, Vd))
        )
        return out / I

    def B(self, X, Y):
        """Polarized quadratic part: ``Q(X + Y) - Q(X) - Q(Y)``."""
        return self.quad(X + Y) - self.quad(X) - self.quad(Y)

    def T(self, X, Y, Z):
        I = self.I
        return self.al * _cross(I * X[:3], _cross(I * Y[3:], Z[3:])) / I

    def C(self, X, Y, Z):
        """Symmetrized cubic part, so that ``C(X, X, X) = 6 T(X, X, X)``."""
        return sum(self.T(*perm) for perm in itertools.permutations((X, Y, Z)))


@dataclass(frozen=True)
class NormalFormData:
    """Coefficients of the center-manifold expansion.

    ``F20, F11, F02`` are the ``z^2, z zbar, zbar^2`` coefficients of ``N``
    on the center eigenspace (with the 1/2 factors of the expansion
    ``F20 z^2/2 + F11 z zbar + F02 zbar^2/2``), ``F21`` the ``z^2 zbar``
    coefficient along the center manifold (times 2). ``E1`` and ``E2`` are
    the constant vectors in ``w20(theta) = E1 e^{2 lambda1 theta}`` and
    ``w11(theta) = E2`` (the ``g``-terms vanish here).
    """

    F20: np.ndarray
    F11: np.ndarray
    F02: np.ndarray
    F21: np.ndarray
    g20: complex
    g11: complex
    g02: complex
    g21: complex
    E1: np.ndarray
    E2: np.ndarray
    w20_1: complex
    w20_1_printed: complex
    w11_1: complex
    flags: tuple = ()

    @property
    def w20(self):
        return self.E1


def cubic_coefficients(p: RigidBodyParams, hp: HopfPoint, e: EigenData) -> NormalFormData:
    """Normal-form coefficients up to ``g21``.

    ``E1`` solves ``(2 lambda1 - A - alpha G e^{-2 lambda1 tau0}) E1 = F20``.
    ``E2`` would solve ``-(A + alpha G) E2 = F11``; that matrix is singular
    along ``e1`` (the Casimir direction), so the rows 2-3 are solved and the
    first component is set by the momentum sphere:
    ``E2[0] = -|I v|^2 / (m I1)``.
    """
    if e.h is None:
        raise ValueError("eigen data must be normalized first")
    lin = linearize(p)
    A, G, al = lin.A, lin.G, p.alpha
    l1 = e.lambda1
    w0 = hp.omega0
    tau = hp.tau0
    E = cmath.exp(-l1 * tau)
    ml = _Multilinear(p)
    v = e.v
    h = e.h
    Q = np.concatenate([v, v * E])
    Qb = np.conj(Q)
    F20 = ml.B(Q, Q)
    F11 = ml.B(Q, Qb)
    F02 = ml.B(Qb, Qb)
    g20 = complex(h @ F20)
    g11 = complex(h @ F11)
    g02 = complex(h @ F02)
    flags = list(e.flags)

    M20 = 2 * l1 * np.eye(3) - A - al * G * cmath.exp(-2 * l1 * tau)
    if np.linalg.cond(M20) > 1e12:
        raise ResonanceError("2 lambda1 is (nearly) a characteristic root")
    E1 = np.linalg.solve(M20, F20)
    w20_1_printed = F20[0] / (2 * l1)
    if abs(E1[0] - w20_1_printed) > 1e-10 * max(abs(E1[0]), 1e-300):
        flags.append("first component of E1 differs from F20^1 / (2 lambda1)")

    Iv = p.inertia * v
    E2 = np.zeros(3, dtype=complex)
    K = -(A + al * G)
    E2[1:] = np.linalg.solve(K[1:, 1:], F11[1:])
    E2[0] = -np.vdot(Iv, Iv).real / (p.m * p.I1)
    if abs(E2[0]) > 0:
        flags.append(
            f"w11 is not zero: its first component is fixed by the momentum sphere at {E2[0].real:.6g}"
        )

    def W20(theta):
        return (1j * g20 / w0) * v * cmath.exp(l1 * theta) \
            + (1j * np.conj(g02) / (3 * w0)) * np.conj(v) * cmath.exp(-l1 * theta) \
            + E1 * cmath.exp(2 * l1 * theta)

    def W11(theta):
        return -(1j * g11 / w0) * v * cmath.exp(l1 * theta) \
            + (1j * np.conj(g11) / w0) * np.conj(v) * cmath.exp(-l1 * theta) + E2

    W20s = np.concatenate([W20(0.0), W20(-tau)])
    W11s = np.concatenate([W11(0.0), W11(-tau)])
    F21 = 2 * ml.B(Q, W11s) + ml.B(Qb, W20s) + ml.C(Q, Q, Qb)
    g21 = complex(h @ F21)
    return NormalFormData(F20, F11, F02, F21, g20, g11, g02, g21, E1, E2,
                          complex(E1[0]), complex(w20_1_printed), complex(E2[0]), tuple(flags))


# --------------------------------------------------------------------------
# bifurcation quantities


@dataclass(frozen=True)
class HopfQuantities:
    C1: complex
    mu2: float
    T2: float
    beta2: float
    direction: str
    stability: str
    period_trend: str

    @property
    def supercritical(self) -> bool:
        return self.mu2 > 0

    @property
    def orbitally_stable(self) -> bool:
        return self.beta2 < 0


def hopf_quantities(nf: NormalFormData, trans: complex, omega0: float) -> HopfQuantities:
    """``C1 = i/(2 w)(g20 g11 - 2|g11|^2 - |g02|^2/3) + g21/2``, then
    ``mu2 = -Re C1 / Re lambda'``, ``T2 = -(Im C1 + mu2 Im lambda')/w``, ``beta2 = 2 Re C1``.

    The first term of ``C1`` vanishes identically here because
    ``g20 = g11 = g02 = 0``, so ``C1 = g21 / 2``.
    """
    if trans.real == 0:
        raise ZeroDivisionError("Re(dlambda/dtau) = 0: direction of bifurcation undefined")
    corr = 1j / (2 * omega0) * (nf.g20 * nf.g11 - 2 * abs(nf.g11) ** 2 - abs(nf.g02) ** 2 / 3)
    C1 = complex(corr + nf.g21 / 2)
    mu2 = -C1.real / trans.real
    T2 = -(C1.imag + mu2 * trans.imag) / omega0
    beta2 = 2 * C1.real
    direction = "supercritical" if mu2 > 0 else ("subcritical" if mu2 < 0 else "degenerate")
    stability = "orbitally stable" if beta2 < 0 else ("unstable" if beta2 > 0 else "degenerate")
    trend = "increasing" if T2 > 0 else ("decreasing" if T2 < 0 else "flat")
    return HopfQuantities(C1, float(mu2), float(T2), float(beta2), direction, stability, trend)


# --------------------------------------------------------------------------
# center-manifold reconstruction


def center_manifold_trajectory(p: RigidBodyParams, hp: HopfPoint, e: EigenData, nf: NormalFormData,
                               u0: complex, t_grid) -> tuple[np.ndarray, np.ndarray]:
    """Approximate path on the center manifold at ``tau = tau0``.

    The amplitude obeys ``u' = lambda1 u + g21 u^2 conj(u) / 2``, solved in
    polar form: ``r^2 = r0^2 / (1 - Re(g21) r0^2 t)`` and phase
    ``omega0 t + Im(g21)/2 int r^2``. The state is
    ``Omega = Omega_1 + 2 Re(u v) + Re(E1 u^2) + E2 |u|^2``.
    Returns ``(u(t), M(t))`` with ``M = I Omega``.
    """
    t = np.asarray(t_grid, dtype=float)
    u0 = complex(u0)
    r0 = abs(u0)
    ph0 = cmath.phase(u0) if r0 > 0 else 0.0
    gr, gi = nf.g21.real, nf.g21.imag
    if r0 == 0:
        u = np.zeros_like(t, dtype=complex)
    else:
        s = 1 - gr * r0**2 * t
        if np.any(s <= 0):
            raise OverflowError("amplitude blows up inside the requested time grid")
        r = r0 / np.sqrt(s)
        if gr != 0:
            int_r2 = -np.log(s) / gr
        else:
            int_r2 = r0**2 * t
        phase = ph0 + hp.omega0 * t + 0.5 * gi * int_r2
        u = r * np.exp(1j * phase)
    om1 = np.array([p.m / p.I1, 0.0, 0.0])
    V = (
        2 * np.real(u[:, None] * e.v[None, :])
        + np.real(u[:, None] ** 2 * nf.E1[None, :])
        + (np.abs(u) ** 2)[:, None] * nf.E2.real[None, :]
    )
    M = p.inertia * (om1 + V)
    return u, M


# --------------------------------------------------------------------------
# oracles


@dataclass(frozen=True)
class OracleResult:
    g21: complex
    F20: np.ndarray
    F11: np.ndarray
    g21_levels: tuple
    radius: float


def _reduced_nonlinearity(p: RigidBodyParams, y, yd):
    """Nonlinear part of the rhs restricted to the momentum sphere ``|I Omega| = |m|``.

    ``y = (x2, x3)`` and the first component is slaved:
    ``x1 = (sign(m) sqrt(m^2 - I2^2 x2^2 - I3^2 x3^2) - m) / I1``.
    """
    lin = linearize(p)
    I1, I2, I3, m = p.I1, p.I2, p.I3, p.m

    def lift(z):
        rad = I2**2 * z[0] ** 2 + I3**2 * z[1] ** 2
        # sqrt(m^2 - rad) - |m| without cancellation
        delta = -rad / (math.sqrt(m * m - rad) + abs(m))
        return np.array([math.copysign(1.0, m) * delta / I1, z[0], z[1]])

    V, Vd = lift(y), lift(yd)
    I = p.inertia
    om1 = np.array([m / I1, 0.0, 0.0])
    f = rigid_body_delay_rhs(I * (om1 + V), I * (om1 + Vd), p) / I
    return f[1:] - lin.A[1:, 1:] @ y - p.alpha * lin.G[1:, 1:] @ yd


def taylor_oracle(p: RigidBodyParams, hp: HopfPoint, e: EigenData, radius: float = 1e-2,
                  n_angles: int = 32, fd_radius: float = 1e-4) -> OracleResult:
    """Normal-form coefficients from numerical expansion of the full vector field.

    ``g21``: on the momentum sphere the nonlinearity has no quadratic part,
    so the center manifold is flat to second order and ``g21`` is
    ``2 h . c1(r) / r^3`` where ``c1(r)`` is the first angular Fourier
    coefficient of the reduced nonlinearity at ``z = r e^{i theta}``. Two
    radii ``r, r/2`` are combined by Richardson extrapolation.

    ``F20, F11``: angular Fourier coefficients 2 and 0 of the unreduced
    ``N`` at radius ``fd_radius``.
    """
    if e.h is None:
        raise ValueError("eigen data must be normalized first")
    tau = hp.tau0
    E = cmath.exp(-e.lambda1 * tau)
    q = e.v[1:]
    qd = q * E
    h = e.h[1:]
    th = 2 * np.pi * np.arange(n_angles) / n_angles

    def first_harmonic(r):
        acc = np.zeros(2, dtype=complex)
        for t in th:
            z = r * cmath.exp(1j * t)
            y = 2 * np.real(z * q)
            yd = 2 * np.real(z * qd)
            acc += _reduced_nonlinearity(p, y, yd) * cmath.exp(-1j * t)
        return acc / n_angles

    levels = []
    for r in (radius, radius / 2, radius / 4):
        c = first_harmonic(r)
        levels.append(complex(2 * (h @ c) / r**3))
    # error expansion in r^2
    r1 = (4 * levels[1] - levels[0]) / 3
    r2 = (4 * levels[2] - levels[1]) / 3
    g21 = (16 * r2 - r1) / 15

    Q = e.v
    Qd = e.v * E
    acc0 = np.zeros(3, dtype=complex)
    acc2 = np.zeros(3, dtype=complex)
    r = fd_radius
    for t in th:
        z = r * cmath.exp(1j * t)
        N = exact_nonlinearity(p, 2 * np.real(z * Q), 2 * np.real(z * Qd))
        acc0 += N
        acc2 += N * cmath.exp(-2j * t)
    F11 = acc0 / n_angles / r**2
    F20 = 2 * acc2 / n_angles / r**2
    return OracleResult(g21, F20, F11, tuple(levels), radius)


def printed_F_coefficients(p: RigidBodyParams, hp: HopfPoint, e: EigenData, nf: NormalFormData) -> dict:
    """First components of ``F20, F11, F02`` and ``F21`` from the printed component formulas.

    Evaluated with the same ``v`` as the pipeline and with the printed
    ``w11 = 0``; used only to quantify discrepancies.
    """
    I1, I2, I3, al, m = p.I1, p.I2, p.I3, p.alpha, p.m
    l1 = e.lambda1
    l2 = np.conj(l1)
    t0 = hp.tau0
    v2, v3 = e.v[1], e.v[2]
    v3b = np.conj(v3)
    e1, e2 = cmath.exp(l1 * t0), cmath.exp(l2 * t0)
    F20 = 2 * (I2 - I3) / I1 * v2 * v3 + al * m / I1 * (I2 * (I1 - I2) * v2**2 - I3 * (I3 - I1) * v3**2) * e2
    F11 = (I2 - I3) / I1 * v2 * (v3 + v3b) + al * m / I1 * (
        I2 * (I1 - I2) * v2**2 - I3 * (I3 - I1) * v3 * v3b) * (e1 + e2)
    F02 = 2 * (I2 - I3) / I1 * v2 * v3b + al * m / I1 * (I2 * (I1 - I2) * v2**2 - I3 * (I3 - I1) * v3b**2) * e1
    w201 = F20 / (2 * l1)
    F21_2 = (I3 - I1) / I2 * v3b * w201 - 2 * al * m * I1 * (I1 - I2) / I2 * v2 * w201 * e1
    F21_3 = (I1 - I2) / I3 * v2 * w201 - 2 * al * m * I1 * (I1 - I3) / I3 * v3b * w201 * e1
    return {"F20_1": complex(F20), "F11_1": complex(F11), "F02_1": complex(F02),
            "F21_2": complex(F21_2), "F21_3": complex(F21_3)}
