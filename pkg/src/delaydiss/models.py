"""Right-hand sides and problem factories for the delayed systems.

Each model comes as a plain rhs function on numpy vectors plus a
``*_problem`` factory that packages it as a :class:`DDEProblem`. The rigid
body also has a scalar-arithmetic kernel used by the factory, since the
integrator calls it hundreds of thousands of times per run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebra import AlgebraSpec, bracket, coadjoint, project_complement
from .history import InitialFunction
from .integrator import DDEProblem

__all__ = [
    "RigidBodyParams",
    "LandauLifschitzParams",
    "NeuronParams",
    "MachineToolParams",
    "SingularConfigurationError",
    "rigid_body_delay_rhs",
    "rigid_body_kernel",
    "rigid_body_problem",
    "rigid_body_energy",
    "rigid_body_energy_rate",
    "equilibrium_state",
    "perturbed_equilibrium",
    "landau_lifschitz_delay_rhs",
    "landau_lifschitz_problem",
    "landau_lifschitz_energy",
    "landau_lifschitz_energy_rate",
    "generic_dissipative_rhs",
    "lie_poisson_delay_rhs",
    "orbit_gradient_rhs",
    "circle_rhs",
    "cylinder_rhs",
    "sphere_rhs",
    "neuron_rhs",
    "machine_tool_rhs",
    "circle_problem",
    "cylinder_problem",
    "sphere_problem",
    "neuron_problem",
    "machine_tool_problem",
    "wrap_angle",
]


class SingularConfigurationError(ArithmeticError):
    """The delayed Landau-Lifschitz metric degenerates (M nearly orthogonal to M~)."""


# --------------------------------------------------------------------------
# rigid body


@dataclass(frozen=True)
class RigidBodyParams:
    """Free rigid body with delayed double-bracket dissipation.

    ``m`` is the angular momentum of the equilibrium ``(m, 0, 0)`` about the
    first principal axis. With ``casimir_scaled`` the dissipation is divided
    by ``|M|^2`` (the variant with prefactor ``alpha / c^2``).
    """

    I1: float
    I2: float
    I3: float
    alpha: float
    tau: float = 0.0
    m: float = 1.0
    casimir_scaled: bool = False

    def __post_init__(self):
        for name in ("I1", "I2", "I3"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not (self.tau >= 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be non-negative, got {self.tau!r}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.m)):
            raise ValueError("alpha and m must be finite")

    @property
    def inertia(self) -> np.ndarray:
        return np.array([self.I1, self.I2, self.I3])

    def replace(self, **kw) -> "RigidBodyParams":
        from dataclasses import replace

        return replace(self, **kw)


def rigid_body_delay_rhs(M, M_delayed, p: RigidBodyParams) -> np.ndarray:
    """``M x Omega + alpha M x (M~ x Omega~)`` with ``Omega = I^{-1} M``."""
    M = np.asarray(M, dtype=float)
    Md = np.asarray(M_delayed, dtype=float)
    I = p.inertia
    Om = M / I
    Omd = Md / I
    alpha = p.alpha
    if p.casimir_scaled:
        alpha = alpha / float(M @ M)
    return np.cross(M, Om) + alpha * np.cross(M, np.cross(Md, Omd))


def rigid_body_kernel(p: RigidBodyParams) -> Callable:
    """Fast ``rhs(t, M, M~)`` for the integrator; same formula as ``rigid_body_delay_rhs``."""
    I1, I2, I3, al = float(p.I1), float(p.I2), float(p.I3), float(p.alpha)
    scaled = p.casimir_scaled

    def rhs(t, M, Md):
        m1, m2, m3 = M.tolist()
        d1, d2, d3 = Md.tolist()
        o1, o2, o3 = m1 / I1, m2 / I2, m3 / I3
        e1, e2, e3 = d1 / I1, d2 / I2, d3 / I3
        c1 = d2 * e3 - d3 * e2
        c2 = d3 * e1 - d1 * e3
        c3 = d1 * e2 - d2 * e1
        a = al / (m1 * m1 + m2 * m2 + m3 * m3) if scaled else al
        return np.array([
            m2 * o3 - m3 * o2 + a * (m2 * c3 - m3 * c2),
            m3 * o1 - m1 * o3 + a * (m3 * c1 - m1 * c3),
            m1 * o2 - m2 * o1 + a * (m1 * c2 - m2 * c1),
        ])

    return rhs


def equilibrium_state(p: RigidBodyParams) -> np.ndarray:
    """Angular momentum of the steady rotation about the first axis."""
    return np.array([p.m, 0.0, 0.0])


def perturbed_equilibrium(p: RigidBodyParams, eps: float, direction=(0.0, 1.0, 0.0),
                          on_sphere: bool = True) -> np.ndarray:
    """``(m, 0, 0) + eps * direction``, optionally rescaled back to norm ``|m|``."""
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if n == 0:
        raise ValueError("perturbation direction must be non-zero")
    M = equilibrium_state(p) + eps * d / n
    if on_sphere and p.m != 0:
        M *= abs(p.m) / np.linalg.norm(M)
    return M


def rigid_body_problem(p: RigidBodyParams, initial: Optional[InitialFunction] = None,
                       M0=None) -> DDEProblem:
    """Rigid body with delay ``p.tau``; constant history ``M0`` unless ``initial`` is given."""
    if initial is None:
        M0 = equilibrium_state(p) if M0 is None else M0
        initial = InitialFunction.constant(M0, p.tau)
    return DDEProblem(3, rigid_body_kernel(p), p.tau, initial, name="rigid_body")


def rigid_body_energy(M, p: RigidBodyParams):
    """Kinetic energy ``M . Omega / 2``; accepts a single state or an array of states."""
    M = np.asarray(M, dtype=float)
    return 0.5 * np.sum(M * M / p.inertia, axis=-1)


def rigid_body_energy_rate(M, M_delayed, p: RigidBodyParams, law: str = "exact"):
    """Energy rate predicted by a dissipation law.

    ``law="printed"`` is ``-alpha |M~ x Omega~|^2``, which is exact only when
    the delay vanishes (``M~ = M``). ``law="exact"`` is the identity
    ``Omega . dM/dt = -alpha (M x Omega) . (M~ x Omega~)`` that holds for
    any delay.
    """
    M = np.asarray(M, dtype=float)
    Md = np.asarray(M_delayed, dtype=float)
    I = p.inertia
    alpha = p.alpha
    if p.casimir_scaled:
        alpha = alpha / np.sum(M * M, axis=-1)
    cd = np.cross(Md, Md / I)
    if law == "printed":
        return -alpha * np.sum(cd * cd, axis=-1)
    if law == "exact":
        return -alpha * np.sum(np.cross(M, M / I) * cd, axis=-1)
    raise ValueError(f"unknown energy law {law!r}")


# --------------------------------------------------------------------------
# Landau-Lifschitz


@dataclass(frozen=True)
class LandauLifschitzParams:
    gamma_ratio: float
    lambda_damp: float
    B: tuple = (0.0, 0.0, 1.0)
    tau: float = 0.0

    def __post_init__(self):
        B = tuple(float(b) for b in self.B)
        if len(B) != 3:
            raise ValueError("B must be a 3-vector")
        object.__setattr__(self, "B", B)
        vals = (self.gamma_ratio, self.lambda_damp, self.tau, *B)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("Landau-Lifschitz parameters must be finite")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")


COS_THETA_MIN = 1e-8


def _ll_prefactor(M, Md, lam):
    nM2 = float(M @ M)
    nMd = math.sqrt(float(Md @ Md))
    if nM2 == 0 or nMd == 0:
        raise SingularConfigurationError("Landau-Lifschitz rhs needs non-zero M and M~")
    cos_t = float(M @ Md) / (math.sqrt(nM2) * nMd)
    if abs(cos_t) < COS_THETA_MIN:
        raise SingularConfigurationError(f"|cos theta| = {abs(cos_t):.3g} below {COS_THETA_MIN}")
    return lam / (nM2 * cos_t)


def landau_lifschitz_delay_rhs(M, M_delayed, B, B_delayed, p: LandauLifschitzParams) -> np.ndarray:
    """``gamma M x B + lambda / (|M|^2 cos theta) M x (M~ x B~)``, theta the angle between M and M~."""
    M = np.asarray(M, dtype=float)
    Md = np.asarray(M_delayed, dtype=float)
    B = np.asarray(B, dtype=float)
    Bd = np.asarray(B_delayed, dtype=float)
    k = _ll_prefactor(M, Md, p.lambda_damp)
    return p.gamma_ratio * np.cross(M, B) + k * np.cross(M, np.cross(Md, Bd))


def landau_lifschitz_problem(p: LandauLifschitzParams, M0, initial: Optional[InitialFunction] = None) -> DDEProblem:
    """Constant applied field, so ``B~ = B``."""
    B = np.array(p.B)

    def rhs(t, M, Md):
        return landau_lifschitz_delay_rhs(M, Md, B, B, p)

    if initial is None:
        initial = InitialFunction.constant(M0, p.tau)
    return DDEProblem(3, rhs, p.tau, initial, name="landau_lifschitz")


def landau_lifschitz_energy(M, p: LandauLifschitzParams):
    """``E = M . B``, the quantity the delayed damping term dissipates."""
    return np.asarray(M, dtype=float) @ np.array(p.B)


def landau_lifschitz_energy_rate(M, M_delayed, p: LandauLifschitzParams, law: str = "exact") -> float:
    """``law="printed"``: ``-k |M~ x B~|^2``; ``law="exact"``: ``-k (M x B) . (M~ x B~)``,
    with ``k = lambda / (|M|^2 cos theta)``."""
    M = np.asarray(M, dtype=float)
    Md = np.asarray(M_delayed, dtype=float)
    B = np.array(p.B)
    k = _ll_prefactor(M, Md, p.lambda_damp)
    cd = np.cross(Md, B)
    if law == "printed":
        return -k * float(cd @ cd)
    if law == "exact":
        return -k * float(np.cross(M, B) @ cd)
    raise ValueError(f"unknown energy law {law!r}")


# --------------------------------------------------------------------------
# generic Lie-algebra engine


def _casimir_values(spec: AlgebraSpec, mu, mu_d):
    c = float(spec.casimir(mu))
    cd = float(spec.casimir(mu_d))
    if not (c > 0 and cd > 0):
        raise ValueError(f"Casimir values must be positive, got C(mu)={c!r}, C(mu~)={cd!r}")
    return c, cd


def _normal_term(spec, mu, mu_d, grad_k, c, cd):
    """Coefficient and complement-projected ``[Gamma mu, Gamma mu~]`` shared by the three forms."""
    G = spec.gamma
    br = bracket(spec, G @ mu, G @ mu_d)
    coef = float((G @ grad_k(mu)) @ br) / (c * cd)
    return coef, project_complement(spec, br, mu)


def generic_dissipative_rhs(mu, mu_delayed, spec: AlgebraSpec, grad_h, grad_k) -> np.ndarray:
    """Lie-Poisson flow with delayed dissipation, algebra identified with its dual.

    ``-[grad h(mu), mu] + [mu, Gamma[mu~, grad k(mu~)]] / C(mu~)
    - <Gamma grad k(mu), [Gamma mu, Gamma mu~]> [mu, [Gamma mu, Gamma mu~]^mu] / (C(mu) C(mu~))``
    where ``^mu`` is the Gamma^{-1}-orthogonal projection off the isotropy algebra of mu.
    """
    mu = spec._check(mu)
    mu_d = spec._check(mu_delayed)
    c, cd = _casimir_values(spec, mu, mu_d)
    out = -bracket(spec, grad_h(mu), mu)
    out = out + bracket(spec, mu, spec.gamma @ bracket(spec, mu_d, grad_k(mu_d))) / cd
    coef, proj = _normal_term(spec, mu, mu_d, grad_k, c, cd)
    return out - coef * bracket(spec, mu, proj)


def lie_poisson_delay_rhs(mu, mu_delayed, spec: AlgebraSpec, grad_h, grad_k) -> np.ndarray:
    """Same flow written with coadjoint actions.

    ``ad*_{grad h} mu + ad*_{Gamma(ad*_{grad k(mu~)} mu~)} mu / C(mu~)
    - <Gamma grad k(mu), [Gamma mu, Gamma mu~]> ad*_{[Gamma mu, Gamma mu~]^mu} mu / (C(mu) C(mu~))``
    """
    mu = spec._check(mu)
    mu_d = spec._check(mu_delayed)
    c, cd = _casimir_values(spec, mu, mu_d)
    out = coadjoint(spec, grad_h(mu), mu)
    inner = spec.gamma @ coadjoint(spec, grad_k(mu_d), mu_d)
    out = out + coadjoint(spec, inner, mu) / cd
    coef, proj = _normal_term(spec, mu, mu_d, grad_k, c, cd)
    return out - coef * coadjoint(spec, proj, mu)


def orbit_gradient_rhs(mu, mu_delayed, spec: AlgebraSpec, grad_k) -> np.ndarray:
    """Normal-metric gradient field of ``k`` on the orbit, in the printed form.

    ``-ad*_{Gamma grad k(mu~)} mu~ / C(mu~)
    + <Gamma grad k(mu), [Gamma mu, Gamma mu~]> [Gamma mu, Gamma mu~]^mu / (C(mu) C(mu~))``
    """
    mu = spec._check(mu)
    mu_d = spec._check(mu_delayed)
    c, cd = _casimir_values(spec, mu, mu_d)
    out = -coadjoint(spec, spec.gamma @ grad_k(mu_d), mu_d) / cd
    coef, proj = _normal_term(spec, mu, mu_d, grad_k, c, cd)
    return out + coef * proj


# --------------------------------------------------------------------------
# introductory examples


def wrap_angle(q):
    """Reduce angles to ``[0, 2 pi)``; applied to output only."""
    return np.mod(q, 2 * np.pi)


def circle_rhs(c: float) -> Callable:
    """``q' = c sin(q(t - 1))`` on the circle."""

    def rhs(t, x, xd):
        return np.array([c * math.sin(xd[0])])

    return rhs


def cylinder_rhs(b: float, c: float) -> Callable:
    """``q1' = q2, q2' = c sin(q1(t - 1)) - b q2`` on the cylinder."""

    def rhs(t, x, xd):
        return np.array([x[1], c * math.sin(xd[0]) - b * x[1]])

    return rhs


def sphere_rhs(t, x, xd) -> np.ndarray:
    """The three-component system whose velocity is always orthogonal to ``q``."""
    q1, q2, q3 = x.tolist()
    p1 = float(xd[0])
    return np.array([-p1 * q2 - q3, p1 * q1 - q3, q1 + q2])


@dataclass(frozen=True)
class NeuronParams:
    a: float
    b: float
    c: float
    d: float
    h_gain: float = 0.0
    n: int = 1
    f: Callable[[np.ndarray], np.ndarray] = field(default=np.tanh, compare=False)

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not self.h_gain >= 0:
            raise ValueError("h_gain must be non-negative")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")


def neuron_rhs(p: NeuronParams) -> Callable:
    """Inertial neurons as a first-order system on ``(q_1..q_n, v_1..v_n)``.

    ``v_i' = -a v_i - b q_i + c f(q_i - h q~_i) + d sum_{j != i} f(q_j - h q~_j)``.
    The full state is passed in, since ``f`` depends on ``q``.
    """
    n = int(p.n)

    def rhs(t, x, xd):
        q, v = x[:n], x[n:]
        s = p.f(q - p.h_gain * xd[:n])
        coupling = p.c * s + p.d * (np.sum(s) - s)
        return np.concatenate([v, -p.a * v - p.b * q + coupling])

    return rhs


@dataclass(frozen=True)
class MachineToolParams:
    k_damp: float
    omega_nat: float
    mass: float
    k1: float
    beta: float
    Omega_rot: float

    def __post_init__(self):
        for name in ("omega_nat", "mass", "k1", "beta", "Omega_rot"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not (self.k_damp >= 0 and math.isfinite(self.k_damp)):
            raise ValueError("k_damp must be non-negative")

    @property
    def tau(self) -> float:
        """One revolution of the work piece."""
        return 2 * math.pi / self.Omega_rot


def machine_tool_rhs(p: MachineToolParams) -> Callable:
    """Orthogonal-cutting model on ``(q, v)``.

    ``q'' + 2 k alpha q' + alpha^2 q = f / m`` with cutting force
    ``f = -(2 pi k1 / (8 beta Omega m)) [(q' - q~) + (5 / beta)(q - q~)^3]``,
    the force law taken exactly as printed (it mixes q' and q~).
    """
    pref = -2 * math.pi * p.k1 / (8 * p.beta * p.Omega_rot * p.mass)
    al = p.omega_nat

    def rhs(t, x, xd):
        q, v = float(x[0]), float(x[1])
        qd = float(xd[0])
        force = pref * ((v - qd) + 5.0 / p.beta * (q - qd) ** 3)
        return np.array([v, -2 * p.k_damp * al * v - al * al * q + force / p.mass])

    return rhs


def _initial(x0, tau, initial):
    return initial if initial is not None else InitialFunction.constant(x0, tau)


def circle_problem(c: float, q0: float = 0.5, initial=None) -> DDEProblem:
    return DDEProblem(1, circle_rhs(c), 1.0, _initial([q0], 1.0, initial), name="circle")


def cylinder_problem(b: float, c: float, x0=(0.5, 0.0), initial=None) -> DDEProblem:
    return DDEProblem(2, cylinder_rhs(b, c), 1.0, _initial(x0, 1.0, initial), name="cylinder")


def sphere_problem(tau: float, x0=(1.0, 0.0, 0.0), initial=None) -> DDEProblem:
    return DDEProblem(3, sphere_rhs, float(tau), _initial(x0, tau, initial), name="sphere")


def neuron_problem(p: NeuronParams, tau: float, x0=None, initial=None) -> DDEProblem:
    n = int(p.n)
    x0 = np.full(2 * n, 0.1) if x0 is None else x0
    return DDEProblem(2 * n, neuron_rhs(p), float(tau), _initial(x0, tau, initial), name="neuron")


def machine_tool_problem(p: MachineToolParams, x0=(1e-3, 0.0), initial=None) -> DDEProblem:
    return DDEProblem(2, machine_tool_rhs(p), p.tau, _initial(x0, p.tau, initial), name="machine_tool")
