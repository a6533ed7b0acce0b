import numpy as np
import pytest

from delaydiss import hopf as H
from delaydiss import models as M
from delaydiss import spectral as S

SET1 = dict(I1=0.8, I2=0.5, I3=0.4, alpha=0.3, m=1.5)


@pytest.fixture(scope="session")
def set1_params():
    return M.RigidBodyParams(SET1["I1"], SET1["I2"], SET1["I3"], SET1["alpha"], m=SET1["m"])


@pytest.fixture(scope="session")
def set1_hopf(set1_params):
    co = S.coefficients(set1_params)
    hp = S.hopf_point(co, set1_params.m, set1_params.alpha)
    return co, hp


@pytest.fixture(scope="session")
def set1_normal_form(set1_params, set1_hopf):
    co, hp = set1_hopf
    q = set1_params.replace(tau=hp.tau0)
    e = H.normalize_adjoint(H.eigenvectors(q, hp), q, hp)
    nf = H.cubic_coefficients(q, hp, e)
    return q, e, nf


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL/INFO line; it is printed now and again in the terminal summary."""

    def record(number, passed, detail, supplementary=False):
        tag = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        extra = "[supplementary] " if supplementary else ""
        line = f"CRITERION {number}: {tag} {extra}{detail}"
        request.config._acceptance_lines.append(line)
        print(line)
        return passed

    return record
