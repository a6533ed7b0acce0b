import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from delaydiss.history import HistoryRangeError, InitialFunction, Trajectory, fd_derivatives, hermite

coef = st.floats(-5, 5, allow_nan=False)


@given(coef, coef, coef, coef)
def test_hermite_reproduces_cubics(a, b, c, d):
    f = lambda t: a * t**3 + b * t**2 + c * t + d
    df = lambda t: 3 * a * t**2 + 2 * b * t + c
    ts = np.linspace(-0.3, 0.2, 9)
    x, dx = hermite(-0.3, 0.2, f(-0.3), f(0.2), df(-0.3), df(0.2), ts)
    np.testing.assert_allclose(x, f(ts), atol=1e-11)
    np.testing.assert_allclose(dx, df(ts), atol=1e-10)


def test_sampling_and_range_errors():
    t = np.linspace(0, 1, 11)
    tr = Trajectory.from_arrays(t, np.sin(t)[:, None], np.cos(t)[:, None])
    x, dx = tr.sample(0.55)
    assert x[0] == pytest.approx(np.sin(0.55), abs=1e-6)
    assert dx[0] == pytest.approx(np.cos(0.55), abs=1e-4)
    np.testing.assert_allclose(tr.sample_many([0.0, 1.0])[:, 0], [0.0, np.sin(1.0)], atol=1e-15)
    with pytest.raises(HistoryRangeError):
        tr.sample(1.5)


def test_append_rejects_non_increasing_times():
    tr = Trajectory(1)
    tr.append(0.0, [1.0], [0.0])
    with pytest.raises(ValueError):
        tr.append(0.0, [1.0], [0.0])
    with pytest.raises(ValueError):
        tr.append(1.0, [np.nan], [0.0])


def test_prune_keeps_requested_window():
    t = np.linspace(0, 10, 101)
    tr = Trajectory.from_arrays(t, t[:, None], np.ones((101, 1)))
    tr.prune_before(5.0)
    assert tr.t_min <= 5.0 < tr.t_min + 0.1 + 1e-12
    assert tr.sample(7.25)[0][0] == pytest.approx(7.25)


def test_fd_derivatives_fourth_order():
    errs = []
    for n in (41, 81):
        t = np.linspace(0, 1, n)
        d = fd_derivatives(np.exp(t)[:, None], t[1] - t[0])
        errs.append(np.max(np.abs(d[:, 0] - np.exp(t))))
    assert 12.0 < errs[0] / errs[1] < 20.0


def test_initial_function_guards():
    phi = InitialFunction.constant([1.0, 2.0], tau=0.5)
    np.testing.assert_array_equal(phi(-0.25), [1.0, 2.0])
    with pytest.raises(HistoryRangeError):
        phi(-0.6)
    tab = InitialFunction.tabulated([-1.0, -0.5, 0.0], [[0.0], [0.5], [1.0]])
    assert tab(-0.25)[0] == pytest.approx(0.75)
    with pytest.raises(ValueError):
        InitialFunction.tabulated([-1.0, -0.5], [[0.0], [0.5]])


def test_csv_header_and_determinism(tmp_path):
    t = np.linspace(0, 1, 5)
    tr = Trajectory.from_arrays(t, np.c_[t, 2 * t], np.ones((5, 2)))
    a = tr.to_csv(tmp_path / "a.csv").read_bytes()
    b = tr.to_csv(tmp_path / "b.csv").read_bytes()
    assert a == b
    assert a.splitlines()[0] == b"t,x1,x2,dx1,dx2"
    row = a.splitlines()[2].split(b",")
    assert float(row[0]) == t[1]
