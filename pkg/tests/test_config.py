import numpy as np
import pytest

from delaydiss.config import MODELS, ConfigError, build_problem, load_config, parse_config_text

RB = """
# rigid body
model = rigid_body
I1 = 0.8
I2 = 0.5
I3 = 0.4
alpha = 0.3
m = 1.5
tau = 0.5
h = 0.01
t_end = 2
initial = perturbed
eps = 0.1
"""


def test_parse_rigid_body():
    cfg = parse_config_text(RB)
    assert cfg.model == "rigid_body" and cfg.params["I1"] == 0.8
    assert cfg.tau == 0.5 and cfg.eps == 0.1
    prob = build_problem(cfg)
    x0 = prob.initial(0.0)
    assert np.linalg.norm(x0) == pytest.approx(1.5)


@pytest.mark.parametrize("text,key", [
    ("model = rigidbody\nh = 0.1\nt_end = 1\n", "model"),
    (RB + "I4 = 1\n", "I4"),
    (RB.replace("h = 0.01", "h = -1"), "h"),
    (RB.replace("t_end = 2", "t_end = abc"), "t_end"),
    (RB.replace("I1 = 0.8\n", ""), "I1"),
    (RB + "h = 0.02\n", "h"),
    (RB.replace("initial = perturbed", "initial = random"), "initial"),
    (RB.replace("initial = perturbed", "initial = constant"), "x0"),
    (RB.replace("initial = perturbed", "initial = constant\nx0 = 1, 2"), "x0"),
])
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text)
    assert exc.value.key == key
    assert key in str(exc.value)


def test_tabulated_initial_relative_path(tmp_path):
    (tmp_path / "phi.csv").write_text("t,x1,x2,x3\n-0.5,1.5,0,0\n-0.25,1.5,0.05,0\n0,1.5,0.1,0\n")
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(RB.replace("initial = perturbed", "initial = tabulated\ninitial_file = phi.csv")
                        .replace("eps = 0.1", ""))
    cfg = load_config(cfg_file)
    assert cfg.initial_file == tmp_path / "phi.csv"
    np.testing.assert_allclose(build_problem(cfg).initial(0.0), [1.5, 0.1, 0.0])


def test_tabulated_must_cover_delay(tmp_path):
    (tmp_path / "phi.csv").write_text("t,x1,x2,x3\n-0.2,1.5,0,0\n0,1.5,0.1,0\n")
    (tmp_path / "run.cfg").write_text(RB.replace("initial = perturbed", "initial = tabulated\ninitial_file = phi.csv"))
    with pytest.raises(ConfigError) as exc:
        build_problem(load_config(tmp_path / "run.cfg"))
    assert exc.value.key == "initial_file"


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg")


def test_with_params_overrides_delay():
    cfg = parse_config_text(RB).with_params(tau=0.25)
    assert cfg.tau == 0.25


MINIMAL = {
    "rigid_body": "I1 = 0.8\nI2 = 0.5\nI3 = 0.4\nalpha = 0.3\nm = 1.5\ntau = 0.5",
    "landau_lifschitz": "gamma_ratio = 1\nlambda_damp = 0.1\ntau = 0.2",
    "circle": "c = 0.5",
    "cylinder": "b = 0.5\nc = 0.3",
    "sphere": "tau = 1",
    "neuron": "a = 1\nb = 0.5\nc = 0.5\nd = 1\nn = 2\ntau = 0.5",
    "machine_tool": "k_damp = 0.1\nomega_nat = 1\nmass = 1\nk1 = 0.1\nbeta = 0.5\nOmega_rot = 2",
}


def test_every_model_has_a_minimal_config():
    assert set(MINIMAL) == set(MODELS)


@pytest.mark.parametrize("name", sorted(MINIMAL))
def test_every_model_builds_and_runs(name):
    from delaydiss.integrator import IntegratorConfig, adjust_step, integrate

    cfg = parse_config_text(f"model = {name}\n{MINIMAL[name]}\nh = 0.01\nt_end = 1\n")
    prob = build_problem(cfg)
    assert prob.dimension == cfg.spec.dimension(cfg.params)
    tr = integrate(prob, IntegratorConfig(adjust_step(cfg.h, cfg.tau), cfg.t_end))
    assert np.all(np.isfinite(tr.x))
