"""Finite-dimensional Lie algebras given by structure constants.

Coordinates follow one fixed convention throughout the package:

* ``C[d, a, b]`` are the structure constants, ``[xi, eta]^d = C[d, a, b] xi^a eta^b``.
* The pairing between the dual and the algebra is the coordinate dot product.
* The coadjoint action is defined by ``<ad*_xi mu, eta> = <mu, [xi, eta]>``, so in
  coordinates ``(ad*_xi mu)_b = C[d, a, b] xi^a mu_d``.

For so(3) with the cross product as bracket this gives ``ad*_xi mu = mu x xi``.
With ``xi = dh/dmu = Omega`` the Lie-Poisson equation ``dmu/dt = ad*_{dh/dmu} mu``
is then the free rigid body ``dM/dt = M x Omega``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "AlgebraSpec",
    "InvalidAlgebraError",
    "bracket",
    "coadjoint",
    "coadjoint_matrix",
    "gamma_inverse_inner",
    "isotropy_basis",
    "project_complement",
    "so3",
    "levi_civita",
    "casimir_by_name",
    "algebra_from_dict",
    "load_algebra",
    "jacobi_defect",
    "antisymmetry_defect",
]

VALIDATION_TOL = 1e-10


class InvalidAlgebraError(ValueError):
    """Structure constants or metric fail the Lie algebra axioms."""


def _norm_squared(mu):
    return float(np.dot(mu, mu))


def _norm_squared_grad(mu):
    return 2.0 * np.asarray(mu, dtype=float)


def _constant_one(mu):
    return 1.0


def _constant_one_grad(mu):
    return np.zeros_like(np.asarray(mu, dtype=float))


_CASIMIRS = {
    "norm_squared": (_norm_squared, _norm_squared_grad),
    "constant_one": (_constant_one, _constant_one_grad),
}


def casimir_by_name(name: str) -> tuple[Callable, Callable]:
    """Return ``(C, grad C)`` for one of the named Casimir choices."""
    try:
        return _CASIMIRS[name]
    except KeyError:
        raise InvalidAlgebraError(
            f"unknown casimir {name!r}; expected one of {sorted(_CASIMIRS)}"
        ) from None


def antisymmetry_defect(C: np.ndarray) -> float:
    return float(np.max(np.abs(C + np.swapaxes(C, 1, 2)), initial=0.0))


def jacobi_defect(C: np.ndarray) -> float:
    """Largest violation of the Jacobi identity over all index combinations."""
    # J[f,a,b,c] = sum_e C[e,a,b] C[f,e,c] + cyclic(a,b,c)
    t = np.einsum("eab,fec->fabc", C, C)
    J = t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))
    return float(np.max(np.abs(J), initial=0.0))


@dataclass(frozen=True)
class AlgebraSpec:
    """A Lie algebra with a positive-definite form Gamma and a Casimir function.

    Arrays are copied and made read-only, so a spec can be shared freely.
    Construction validates antisymmetry, the Jacobi identity and positive
    definiteness of ``gamma`` unless ``validate=False`` (used only to build
    deliberately broken specs for harness testing).
    """

    structure_constants: np.ndarray
    gamma: np.ndarray
    casimir: Callable = _constant_one
    casimir_grad: Callable = _constant_one_grad
    casimir_name: str = "constant_one"
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        C = np.array(self.structure_constants, dtype=float)
        if C.ndim != 3 or not (C.shape[0] == C.shape[1] == C.shape[2]) or C.shape[0] == 0:
            raise InvalidAlgebraError(f"structure constants must have shape (n, n, n), got {C.shape}")
        n = C.shape[0]
        gamma = np.array(self.gamma, dtype=float)
        if gamma.shape != (n, n):
            raise InvalidAlgebraError(f"gamma must be {n}x{n}, got {gamma.shape}")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(gamma))):
            raise InvalidAlgebraError("structure constants and gamma must be finite")
        if self.validate:
            scale = max(1.0, float(np.max(np.abs(C))))
            if antisymmetry_defect(C) > VALIDATION_TOL * scale:
                raise InvalidAlgebraError("structure constants are not antisymmetric in the lower indices")
            if jacobi_defect(C) > VALIDATION_TOL * scale**2:
                raise InvalidAlgebraError("structure constants violate the Jacobi identity")
            if not np.allclose(gamma, gamma.T, rtol=0, atol=VALIDATION_TOL * max(1.0, np.max(np.abs(gamma)))):
                raise InvalidAlgebraError("gamma is not symmetric")
            if np.min(np.linalg.eigvalsh(0.5 * (gamma + gamma.T))) <= 0:
                raise InvalidAlgebraError("gamma is not positive definite")
        C.setflags(write=False)
        gamma.setflags(write=False)
        gamma_inv = np.linalg.inv(gamma)
        gamma_inv.setflags(write=False)
        object.__setattr__(self, "structure_constants", C)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "_gamma_inv", gamma_inv)

    @property
    def dimension(self) -> int:
        return self.structure_constants.shape[0]

    @property
    def gamma_inv(self) -> np.ndarray:
        return self._gamma_inv

    def pairing(self, mu, xi) -> float:
        """Evaluate a dual element on an algebra element."""
        return float(np.dot(self._check(mu), self._check(xi)))

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dimension,):
            raise ValueError(f"expected a vector of length {self.dimension}, got shape {v.shape}")
        return v


def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    return eps


def so3(gamma=None, casimir: str = "constant_one") -> AlgebraSpec:
    """so(3) identified with (R^3, x); ``gamma`` defaults to the identity."""
    C, grad = casimir_by_name(casimir)
    return AlgebraSpec(
        structure_constants=levi_civita(),
        gamma=np.eye(3) if gamma is None else gamma,
        casimir=C,
        casimir_grad=grad,
        casimir_name=casimir,
    )


def bracket(spec: AlgebraSpec, xi, eta) -> np.ndarray:
    xi, eta = spec._check(xi), spec._check(eta)
    return np.einsum("dab,a,b->d", spec.structure_constants, xi, eta)


def coadjoint(spec: AlgebraSpec, xi, mu) -> np.ndarray:
    """``ad*_xi mu``, fixed by ``<ad*_xi mu, eta> = <mu, [xi, eta]>``."""
    xi, mu = spec._check(xi), spec._check(mu)
    return np.einsum("dab,a,d->b", spec.structure_constants, xi, mu)


def coadjoint_matrix(spec: AlgebraSpec, mu) -> np.ndarray:
    """Matrix of the linear map ``xi -> ad*_xi mu``."""
    mu = spec._check(mu)
    return np.einsum("dab,d->ba", spec.structure_constants, mu)


def gamma_inverse_inner(spec: AlgebraSpec, xi, eta) -> float:
    """The inner product ``<Gamma^{-1} eta, xi>`` on the algebra."""
    xi, eta = spec._check(xi), spec._check(eta)
    return float(xi @ spec.gamma_inv @ eta)


def isotropy_basis(spec: AlgebraSpec, mu, tol: float = 1e-9) -> list[np.ndarray]:
    """Basis of ``{xi : ad*_xi mu = 0}``, orthonormal in the Gamma^{-1} product.

    Singular values of the coadjoint matrix below ``tol`` times the largest
    one count as zero. When ``mu = 0`` the whole algebra is returned.
    """
    mu = spec._check(mu)
    if not np.all(np.isfinite(mu)):
        raise ValueError("mu must be finite")
    K = coadjoint_matrix(spec, mu)
    _, s, vh = np.linalg.svd(K)
    n = spec.dimension
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        null = np.eye(n)
    else:
        rank = int(np.sum(s > tol * smax))
        null = vh[rank:].T
    if null.shape[1] == 0:
        return []
    gram = null.T @ spec.gamma_inv @ null
    L = np.linalg.cholesky(gram)
    basis = np.linalg.solve(L, null.T).T
    return [basis[:, k].copy() for k in range(basis.shape[1])]


def project_complement(spec: AlgebraSpec, xi, mu, tol: float = 1e-9) -> np.ndarray:
    """Component of ``xi`` Gamma^{-1}-orthogonal to the isotropy algebra of ``mu``."""
    xi = spec._check(xi)
    out = xi.copy()
    for b in isotropy_basis(spec, mu, tol):
        out -= gamma_inverse_inner(spec, xi, b) * b
    return out


def algebra_from_dict(doc: dict) -> AlgebraSpec:
    """Build a spec from ``{"dimension", "structure_constants", "gamma", "casimir"}``."""
    try:
        n = int(doc["dimension"])
        C = np.asarray(doc["structure_constants"], dtype=float)
        gamma = np.asarray(doc.get("gamma", np.eye(n)), dtype=float)
        name = doc.get("casimir", "constant_one")
    except KeyError as exc:
        raise InvalidAlgebraError(f"missing field {exc.args[0]!r}") from None
    if C.shape != (n, n, n):
        raise InvalidAlgebraError(f"structure_constants shape {C.shape} does not match dimension {n}")
    cfun, cgrad = casimir_by_name(name)
    return AlgebraSpec(C, gamma, cfun, cgrad, name)


def load_algebra(path) -> AlgebraSpec:
    return algebra_from_dict(json.loads(Path(path).read_text()))
