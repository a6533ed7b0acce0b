"""Spectral and Hopf analysis assembled into JSON-ready reports.

Complex numbers are written as ``{"re": ..., "im": ...}``. Floats go
through ``json`` unchanged, whose shortest round-trip representation
reproduces every double exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import hopf as H
from . import spectral as S
from .models import RigidBodyParams

__all__ = [
    "SCHEMA_VERSION",
    "REFERENCE_VALUES",
    "AnalysisResult",
    "analyze",
    "spectral_report",
    "hopf_report",
    "reference_comparison",
    "to_jsonable",
    "write_json",
]

SCHEMA_VERSION = "1.0"

# Values printed for the two worked examples, with the parameters they belong to.
REFERENCE_VALUES = {
    "set1": {
        "params": {"I1": 0.8, "I2": 0.5, "I3": 0.4, "alpha": 0.3, "m": 1.5},
        "branch_used": "case-i",
        "omega0": 3.20631, "tau0": 0.88154, "mu2": 0.00958, "T2": 0.00057, "beta2": -0.00139,
        "claim": "supercritical limit cycle",
    },
    "set2": {
        "params": {"I1": 0.8, "I2": 0.5, "I3": 0.4, "alpha": 0.3, "m": 1.8},
        "branch_used": "case-ii",
        "omega0": 0.68547, "tau0": 0.88154, "mu2": 0.00344, "T2": 0.00050, "beta2": 0.00097,
        "claim": "supercritical limit cycle",
    },
}


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=False) + "\n")
    return path


def _gap(quantity, printed, computed, note="", where=""):
    comp = float(computed)
    if printed is None:
        return {"quantity": quantity, "where": where, "printed": None, "computed": comp,
                "abs_gap": None, "rel_gap": None, "note": note}
    gap = comp - printed
    rel = abs(gap) / abs(comp) if comp != 0 else math.inf
    return {"quantity": quantity, "where": where, "printed": printed, "computed": comp,
            "abs_gap": gap, "rel_gap": rel, "note": note}


@dataclass
class AnalysisResult:
    """Everything computed by :func:`analyze`, plus the serialisable report."""

    params: RigidBodyParams
    coefficients: S.SpectralCoefficients
    hopf_point: Optional[S.HopfPoint]
    transversality: Optional[complex]
    eigen: Optional[H.EigenData]
    normal_form: Optional[H.NormalFormData]
    quantities: Optional[H.HopfQuantities]
    report: dict


def spectral_report(p: RigidBodyParams, variant: str = "determinant", tau_max: Optional[float] = None):
    """Linear-stability part of the report; returns ``(dict, coefficients, hopf point or None, slope)``."""
    lin = S.linearize(p)
    co = S.coefficients(p, variant)
    co_other = S.coefficients(p, "paper" if variant == "determinant" else "determinant")
    tau_c = S.critical_delay(p)
    roots0 = S.zero_delay_roots(co)
    rep = {
        "A": lin.A, "G": lin.G, "a": co.a, "b": co.b, "c": co.c, "variant": co.variant,
        "a_other_variant": {"variant": co_other.variant, "a": co_other.a},
        "tau_c": tau_c, "zero_delay_roots": list(roots0),
        "omega0": None, "tau0": None, "branch": None, "re_dlambda_dtau": None,
    }
    try:
        hp = S.hopf_point(co, p.m, p.alpha, tau_max=tau_max)
    except S.NoCrossingError as exc:
        rep["error"] = str(exc)
        rep["root_tracking_evidence"] = _tracking_evidence(co, roots0, tau_max or 10 * tau_c)
        return rep, co, None, None
    if tau_max is not None and hp.tau0 > tau_max:
        rep["error"] = f"first crossing at tau0={hp.tau0:.6g} lies beyond tau_max={tau_max:.6g}"
        rep["root_tracking_evidence"] = _tracking_evidence(co, roots0, tau_max)
        return rep, co, None, None
    trans = S.transversality(co, hp)
    tracked = S.tracked_slope(co, hp)
    rep.update({
        "omega0": hp.omega0, "tau0": hp.tau0, "branch": hp.branch, "family": hp.family,
        "flagged": hp.flagged, "note": hp.note, "residual": hp.residual,
        "omega0_tau0": hp.omega0 * hp.tau0,
        "re_dlambda_dtau": trans.real, "dlambda_dtau": trans,
        "dlambda_dtau_tracked": tracked,
        "transversality_rel_error": abs(tracked.real - trans.real) / abs(trans.real),
        "re_dlambda_dtau_printed_formula": S.transversality_printed(co, hp),
        "re_dlambda_dtau_closed_form": S.transversality_closed_form(co, hp),
        "crossings": [
            {"omega": c.omega, "tau": c.tau, "family": c.family, "k": c.k}
            for c in S.imaginary_crossings(co, max(3 * hp.tau0, tau_c))[:8]
        ],
    })
    return rep, co, hp, trans


def _tracking_evidence(co, roots0, tau_max, steps=200):
    out = []
    for r in roots0:
        if r.imag < 0:
            continue
        try:
            path = S.track_root(co, r, 0.0, tau_max, steps)
        except S.NewtonDivergenceError as exc:
            out.append({"seed": r, "error": str(exc)})
            continue
        re = [lam.real for _, lam in path]
        out.append({"seed": r, "tau_max": tau_max, "max_real_part": max(re),
                    "final_root": path[-1][1]})
    return out


def hopf_report(p: RigidBodyParams, hp: S.HopfPoint, co: S.SpectralCoefficients, trans: complex,
                oracle: bool = True):
    """Center-manifold part; returns ``(dict, eigen, normal form, quantities)``."""
    q = p.replace(tau=hp.tau0)
    e = H.normalize_adjoint(H.eigenvectors(q, hp), q, hp)
    nf = H.cubic_coefficients(q, hp, e)
    hq = H.hopf_quantities(nf, trans, hp.omega0)
    pv, pw = H.printed_eigenvectors(q, hp)
    l1 = hp.lambda1
    notes = list(nf.flags)
    a11_p = H.bilinear_form_printed(e.w, e.v, q, hp, l1, l1)
    a12_p = H.bilinear_form_printed(e.w, np.conj(e.v), q, hp, l1, np.conj(l1))
    notes.append(
        f"pairing with a uniform dtheta kernel gives <psi, conj(phi)> = {abs(a12_p):.4g} instead of 0; "
        "the point-delay pairing makes psi and conj(phi) orthogonal, so it is used"
    )
    b11_printed = e.a11 / (abs(e.a11) ** 2 - abs(e.a12) ** 2)
    notes.append(
        f"b11 from the direct solve is {e.b11:.6g}; with a12 = 0 it equals a11/|a11|^2 = 1/conj(a11)"
        if abs(e.b11 - b11_printed) < 1e-10 * abs(e.b11)
        else f"b11 from the direct solve {e.b11:.6g} differs from a11/d {b11_printed:.6g}"
    )
    printed = H.printed_F_coefficients(q, hp, e, nf)
    rep = {
        "eigen": {
            "v": e.v, "w": e.w, "v2": e.v2, "v3": e.v3, "w2": e.w2, "w3": e.w3,
            "v_printed": pv, "w_printed": pw,
            "v_residual": e.v_residual, "w_residual": e.w_residual,
            "printed_v_residual": e.printed_v_residual, "printed_w_residual": e.printed_w_residual,
            "a11": e.a11, "a12": e.a12, "b11": e.b11, "b12": e.b12,
            "a11_printed_pairing": a11_p, "a12_printed_pairing": a12_p,
            "w2_tilde": e.w2_tilde, "w3_tilde": e.w3_tilde,
            "normalization_residual": e.normalization_residual,
        },
        "F20": nf.F20, "F11": nf.F11, "F02": nf.F02, "F21": nf.F21,
        "g20": nf.g20, "g11": nf.g11, "g02": nf.g02,
        "w20_1": nf.w20_1, "w20_1_closed_form": nf.w20_1_printed, "w11_1": nf.w11_1,
        "printed_component_formulas": printed,
        "g21": nf.g21, "C1": hq.C1, "mu2": hq.mu2, "T2": hq.T2, "beta2": hq.beta2,
        "direction": hq.direction, "stability": hq.stability, "period_trend": hq.period_trend,
        "discrepancy_notes": notes,
    }
    if oracle:
        orc = H.taylor_oracle(q, hp, e)
        rep["oracle"] = {
            "g21": orc.g21,
            "g21_rel_error": abs(orc.g21 - nf.g21) / abs(nf.g21),
            "F20_rel_error": float(np.max(np.abs(orc.F20 - nf.F20)) / np.max(np.abs(nf.F20))),
            "F11_abs": float(np.max(np.abs(orc.F11))),
        }
    notes.append(
        f"printed F20^1 evaluated with the same v is {printed['F20_1']:.6g}, "
        f"multilinear value is {nf.F20[0]:.6g}"
    )
    return rep, e, nf, hq


def _set_values(key, variant="determinant"):
    ref = REFERENCE_VALUES[key]
    pr = ref["params"]
    p = RigidBodyParams(pr["I1"], pr["I2"], pr["I3"], pr["alpha"], m=pr["m"])
    co = S.coefficients(p, variant)
    hp = S.hopf_point(co, p.m, p.alpha)
    trans = S.transversality(co, hp)
    _, _, _, hq = hopf_report(p, hp, co, trans, oracle=False)
    return p, co, hp, hq


def reference_comparison() -> list[dict]:
    """Printed worked-example values next to computed ones, plus internal consistency checks."""
    out = []
    for key in ("set1", "set2"):
        ref = REFERENCE_VALUES[key]
        p, co, hp, hq = _set_values(key)
        tau_c = S.critical_delay(p)
        where = f"{key} (m={p.m})"
        base = f"computed with branch {hp.branch}" + (" (flagged fallback)" if hp.flagged else "")
        for qn, comp in (("omega0", hp.omega0), ("tau0", hp.tau0), ("mu2", hq.mu2),
                         ("T2", hq.T2), ("beta2", hq.beta2)):
            out.append(_gap(qn, ref[qn], comp, base, where))
        theta = 0.5 * math.pi if ref["branch_used"] == "case-i" else 1.5 * math.pi
        out.append(_gap("omega0*tau0", ref["omega0"] * ref["tau0"], theta,
                        f"printed product against the value {theta:.6f} its own branch formula fixes", where))
        out.append(_gap("tau0 - tau_c", ref["tau0"] - tau_c, hp.tau0 - tau_c,
                        "the printed claim tau0 > tau_c fails for the printed and the computed tau0"
                        if ref["tau0"] < tau_c and hp.tau0 < tau_c else "sign of tau0 - tau_c", where))
        rule = "case-i" if abs(p.m) < 1 / abs(p.alpha) else "case-ii"
        if ref["branch_used"] != rule:
            out.append({"quantity": "branch", "where": where, "printed": ref["branch_used"],
                        "computed": rule, "abs_gap": None, "rel_gap": None,
                        "note": f"|m| = {abs(p.m)} vs 1/|alpha| = {1 / abs(p.alpha):.6g} selects {rule}"})
            cand, why = S._branch_candidate(co, ref["branch_used"])
            if cand is not None:
                w, t = cand
                note = f"{ref['branch_used']} formula evaluated anyway (a valid but later crossing)"
                out.append(_gap("omega0 (printed branch)", ref["omega0"], w, note, where))
                out.append(_gap("tau0 (printed branch)", ref["tau0"], t, note, where))
            else:
                out.append(_gap("omega0 (printed branch)", ref["omega0"], float("nan"), why, where))
        if (ref["beta2"] < 0) != (hq.beta2 < 0) or ref["beta2"] > 0:
            out.append({"quantity": "stability claim", "where": where,
                        "printed": f"beta2={ref['beta2']}, called {ref['claim']}",
                        "computed": f"beta2={hq.beta2:.6g} ({hq.stability}), mu2={hq.mu2:.6g} ({hq.direction})",
                        "abs_gap": None, "rel_gap": None,
                        "note": "beta2 > 0 means an unstable cycle by the stated criterion"
                        if ref["beta2"] > 0 else "sign of beta2 differs"})
    # a second variant makes the a-coefficient disagreement visible
    p1 = _set_values("set1")[0]
    a_det = S.coefficients(p1, "determinant").a
    a_pap = S.coefficients(p1, "paper").a
    out.append(_gap("a (set1)", a_pap, a_det, "printed closed form carries an extra 1/I1", "set1"))
    return out


def analyze(p: RigidBodyParams, variant: str = "determinant", tau_max: Optional[float] = None,
            oracle: bool = True) -> AnalysisResult:
    """Spectral analysis, Hopf normal form and the comparison with printed values.

    Raises :class:`spectral.HypothesisError` when the parameters violate
    ``I1 > I2, I1 > I3, alpha != 0, m != 0``. When no crossing is found
    the result carries ``hopf_point=None`` and the report holds the
    root-tracking evidence.
    """
    S.critical_delay(p)
    spec_rep, co, hp, trans = spectral_report(p, variant, tau_max)
    report = {
        "schema_version": SCHEMA_VERSION,
        "params": {"I1": p.I1, "I2": p.I2, "I3": p.I3, "alpha": p.alpha, "m": p.m, "variant": variant},
        "spectral": spec_rep,
        "hopf": None,
        "paper_reference_values": REFERENCE_VALUES,
    }
    discrepancies = []
    e = nf = hq = None
    if hp is not None and variant != "determinant":
        # the crossing of the alternative characteristic function is not an
        # eigenvalue of the linearization, so no center manifold exists there
        q = p.replace(tau=hp.tau0)
        smin = float(np.linalg.svd(S.linearize(q).matrix(hp.lambda1, hp.tau0), compute_uv=False)[-1])
        why = (f"variant {variant!r}: i*omega0 at tau0 is not an eigenvalue of the linearization "
               f"(smallest singular value {smin:.4g}); normal form skipped")
        report["hopf"] = {"skipped": why}
        discrepancies.append({"quantity": "note", "where": "current", "printed": None, "computed": smin,
                              "abs_gap": None, "rel_gap": None, "note": why})
    elif hp is not None:
        hrep, e, nf, hq = hopf_report(p, hp, co, trans, oracle=oracle)
        report["hopf"] = hrep
        tp = spec_rep["re_dlambda_dtau_printed_formula"]
        discrepancies.append(_gap("Re dlambda/dtau", tp, trans.real,
                                  "printed closed form against implicit differentiation", "current"))
        if hp.tau0 < spec_rep["tau_c"]:
            discrepancies.append(_gap("tau0 - tau_c", None, hp.tau0 - spec_rep["tau_c"],
                                      "computed crossing lies below the critical delay", "current"))
        for n in hrep["discrepancy_notes"]:
            discrepancies.append({"quantity": "note", "where": "current", "printed": None, "computed": None,
                                  "abs_gap": None, "rel_gap": None, "note": n})
    if hp is not None and hp.flagged:
        discrepancies.append({"quantity": "branch", "where": "current", "printed": None, "computed": hp.branch,
                              "abs_gap": None, "rel_gap": None, "note": hp.note})
    discrepancies.extend(reference_comparison())
    report["discrepancies"] = discrepancies
    return AnalysisResult(p, co, hp, trans, e, nf, hq, report)
