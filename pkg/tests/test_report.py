import json
import math

import pytest

from delaydiss import spectral as S
from delaydiss.models import RigidBodyParams
from delaydiss.report import REFERENCE_VALUES, SCHEMA_VERSION, analyze, to_jsonable, write_json


@pytest.fixture(scope="module")
def result():
    return analyze(RigidBodyParams(0.8, 0.5, 0.4, 0.3, m=1.5))


def test_report_layout(result):
    rep = result.report
    assert rep["schema_version"] == SCHEMA_VERSION
    assert {"spectral", "hopf", "paper_reference_values", "discrepancies"} <= set(rep)
    assert rep["paper_reference_values"]["set1"]["omega0"] == 3.20631
    assert rep["paper_reference_values"]["set2"]["beta2"] == 0.00097


def test_beta2_is_twice_re_c1_bit_exact(result):
    assert result.report["hopf"]["beta2"] == 2 * result.report["hopf"]["C1"].real


def test_each_printed_value_has_a_gap(result):
    gaps = {(d["where"], d["quantity"]): d for d in result.report["discrepancies"]}
    for key, ref in REFERENCE_VALUES.items():
        where = f"{key} (m={ref['params']['m']})"
        for q in ("omega0", "tau0", "mu2", "T2", "beta2"):
            d = gaps[(where, q)]
            assert d["printed"] == ref[q]
            assert d["abs_gap"] == pytest.approx(d["computed"] - d["printed"])


def test_report_is_valid_json(tmp_path, result):
    path = write_json(result.report, tmp_path / "r.json")
    doc = json.loads(path.read_text())
    assert doc["hopf"]["g21"]["re"] == result.normal_form.g21.real
    assert doc["spectral"]["tau0"] == result.hopf_point.tau0


def test_to_jsonable_handles_numpy_and_complex():
    import numpy as np

    out = to_jsonable({"a": np.array([1.0, 2.0]), "z": 1 + 2j, "n": np.float64(0.1), "nan": math.nan})
    assert out["a"] == [1.0, 2.0] and out["z"] == {"re": 1.0, "im": 2.0} and out["n"] == 0.1


def test_hypothesis_violation_raises():
    with pytest.raises(S.HypothesisError):
        analyze(RigidBodyParams(0.4, 0.5, 0.3, 0.3, m=1.5))


def test_no_crossing_below_tau_max():
    res = analyze(RigidBodyParams(0.8, 0.5, 0.4, 0.3, m=1.5), tau_max=0.1)
    assert res.hopf_point is None
    assert "error" in res.report["spectral"]
    assert res.report["spectral"]["root_tracking_evidence"]


def test_alternative_variant_changes_a():
    res = analyze(RigidBodyParams(0.8, 0.5, 0.4, 0.3, m=1.5), variant="paper", oracle=False)
    assert res.coefficients.a == pytest.approx(1.6875)
    assert res.quantities is None
    assert "not an eigenvalue" in res.report["hopf"]["skipped"]
