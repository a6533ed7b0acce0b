import numpy as np
import pytest

from delaydiss import hopf as H
from delaydiss import spectral as S

G21 = complex(-0.97719, -1.98816)


def test_eigenvectors_are_null_vectors(set1_params, set1_hopf):
    _, hp = set1_hopf
    q = set1_params.replace(tau=hp.tau0)
    e = H.eigenvectors(q, hp)
    lin = S.linearize(q)
    D = lin.matrix(hp.lambda1, hp.tau0)
    assert np.linalg.norm(D @ e.v) <= 1e-10 * np.linalg.norm(e.v)
    assert np.linalg.norm(np.conj(e.w) @ D) <= 1e-10 * np.linalg.norm(e.w)
    assert e.v_residual <= H.EIGEN_TOL and e.w_residual <= H.EIGEN_TOL
    # the printed right eigenvector is null; the printed left one is not
    assert e.printed_v_residual <= 1e-8
    assert e.printed_w_residual > 0.5
    assert any("w" in f for f in e.flags)


def test_adjoint_normalization(set1_normal_form, set1_hopf):
    q, e, _ = set1_normal_form
    _, hp = set1_hopf
    l1, l2 = hp.lambda1, np.conj(hp.lambda1)

    def pair(v, lv):
        # psi~ = b11 psi + b12 conj(psi), conjugate-linear slot
        return (np.conj(e.b11) * H.bilinear_form(e.w, v, q, hp, l1, lv)
                + np.conj(e.b12) * H.bilinear_form(np.conj(e.w), v, q, hp, l2, lv))

    assert pair(e.v, l1) == pytest.approx(1.0, abs=1e-12)
    assert abs(pair(np.conj(e.v), l2)) <= 1e-12
    assert e.b11 == pytest.approx(e.a11 / (abs(e.a11) ** 2 - abs(e.a12) ** 2), rel=1e-10)
    assert e.normalization_residual <= 1e-10


@pytest.mark.parametrize("lp,lf", [(1j, 1j), (0.3 + 2j, -0.5 + 1j), (1e-9j, 2j)])
def test_bilinear_closed_form_matches_quadrature(set1_normal_form, set1_hopf, lp, lf):
    q, e, _ = set1_normal_form
    _, hp = set1_hopf
    a = H.bilinear_form(e.w, e.v, q, hp, lp, lf)
    b = H.bilinear_form_quadrature(e.w, e.v, q, hp, lp, lf)
    assert abs(a - b) <= 1e-9 * abs(a)
    c = H.bilinear_form_printed(e.w, e.v, q, hp, lp, lf)
    d = H.bilinear_form_quadrature(e.w, e.v, q, hp, lp, lf, form="printed")
    assert abs(c - d) <= 1e-9 * abs(c)


def test_normal_form_structure(set1_normal_form):
    _, _, nf = set1_normal_form
    for F in (nf.F20, nf.F11, nf.F02):
        assert F[1] == 0 and F[2] == 0
    assert np.max(np.abs(nf.F11)) <= 1e-15
    assert nf.g20 == 0 and nf.g11 == 0 and nf.g02 == 0
    assert nf.g21 == pytest.approx(G21, abs=1e-5)
    assert nf.w11_1 == pytest.approx(-0.82339, abs=1e-5)


def test_taylor_oracle_agrees(set1_params, set1_hopf, set1_normal_form):
    q, e, nf = set1_normal_form
    _, hp = set1_hopf
    orc = H.taylor_oracle(q, hp, e)
    assert abs(orc.g21 - nf.g21) / abs(nf.g21) <= 1e-5
    np.testing.assert_allclose(orc.F20, nf.F20, atol=1e-6)
    np.testing.assert_allclose(orc.F11, nf.F11, atol=1e-6)


def test_hopf_quantities(set1_hopf, set1_normal_form):
    co, hp = set1_hopf
    _, _, nf = set1_normal_form
    q = H.hopf_quantities(nf, S.transversality(co, hp), hp.omega0)
    assert q.beta2 == 2 * q.C1.real
    assert q.mu2 == pytest.approx(0.41497, abs=1e-5)
    assert q.T2 == pytest.approx(0.58184, abs=1e-5)
    assert q.beta2 == pytest.approx(-0.97719, abs=1e-5)
    assert q.supercritical and q.orbitally_stable
    with pytest.raises(ZeroDivisionError):
        H.hopf_quantities(nf, 1j, hp.omega0)


def test_center_manifold_reconstruction_stays_on_sphere(set1_hopf, set1_normal_form):
    _, hp = set1_hopf
    q, e, nf = set1_normal_form
    t = np.linspace(0, 20, 401)
    u, Mt = H.center_manifold_trajectory(q, hp, e, nf, 0.01, t)
    norms = np.linalg.norm(Mt, axis=1)
    assert np.max(np.abs(norms - q.m)) <= 1e-7
    # at the critical delay the cubic term makes |u| decay slowly
    assert abs(u[-1]) < abs(u[0])


def test_casimir_scaled_normal_form_not_supported(set1_params, set1_hopf):
    _, hp = set1_hopf
    q = set1_params.replace(tau=hp.tau0, casimir_scaled=True)
    e = H.normalize_adjoint(H.eigenvectors(q, hp), q, hp)
    with pytest.raises(NotImplementedError):
        H.cubic_coefficients(q, hp, e)


def test_printed_component_formulas_reported(set1_hopf, set1_normal_form):
    _, hp = set1_hopf
    q, e, nf = set1_normal_form
    d = H.printed_F_coefficients(q, hp, e, nf)
    assert set(d) >= {"F20_1", "F11_1", "F02_1", "F21_2", "F21_3"}
