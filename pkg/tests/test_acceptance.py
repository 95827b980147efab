"""Acceptance criteria 1-8, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from blaschke.families import make_family
from blaschke.ls import BLOCK_KINDS, LSParams, assemble_ls, blocks_for, feasibility_scan, \
    lemma31_residuals, predicted_invariants
from blaschke.moebius import MoebiusJets, blaschke_eigen
from blaschke.verify import moebius_invariance_test, sample_points, verify_ls, verify_structure

KINDS = tuple(BLOCK_KINDS)
LS_M, LS_P, SCAN_RANGE = (1, 1, 3), (0, 0, 1), (0.5, 30.0)
STRUCTURE_FAMILIES = ("veronese", "twisted_torus", "deformed_product")
STRUCTURE_IDENTITIES = ("trace_B", "norm_B", "trace_A", "gauss", "normal_curvature",
                        "ricci_A", "ricci_B", "ricci_C", "ricci_traced", "divergence_B",
                        "lightcone_Y", "laplace_Y", "biposition_N")

RESULTS = {}


def dump(doc):
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)


def criterion_1():
    m, r_sq = (1, 1, 1), (F(3), F(1), F(2))
    params = LSParams.build(m, (0, 0, 0), r_sq)
    res = lemma31_residuals(params)
    b0 = params.b0
    expected_b0 = np.array([1, -5, 4]) / math.sqrt(54)
    float_res = lemma31_residuals(LSParams.build(m, (0, 0, 0), tuple(map(float, r_sq))))
    ok = (params.lam == (F(-19, 108), F(29, 108), F(11, 108))
          and np.max(np.abs(np.array(b0.values) - expected_b0)) <= 1e-15
          and all(v == 0 for v in res.values())
          and max(float_res.values()) <= 1e-12)
    doc = {"lambda": [str(v) for v in params.lam], "b0": list(b0.values),
           "lemma_exact": {k: str(v) for k, v in res.items()},
           "lemma_float_max": max(float_res.values())}
    return ok, f"lambda {doc['lambda']}, {len(res)} identities exactly 0", doc


def criterion_2():
    deg = LSParams.build((1, 1, 1), (0, 0, 0), (F(2), F(1), F(1)))
    gen = LSParams.build((1, 1, 1), (0, 0, 0), (F(3), F(1), F(2)))
    m, r = deg.m, deg.r_sq
    ok = (deg.lam[1] == deg.lam[2] and m[2] * r[1] == m[1] * r[2]
          and deg.distinct_count() == 2 and predicted_invariants(deg)["distinct"] == 2
          and gen.distinct_count() == 3 and predicted_invariants(gen)["distinct"] == 3)
    doc = {"degenerate": deg.distinct_count(), "generic": gen.distinct_count()}
    return ok, f"distinct counts {doc['degenerate']} and {doc['generic']}", doc


def criterion_3():
    spec = make_family("clifford")
    dev = {k: 0.0 for k in ("rho", "norm_B", "trace_B", "C", "A", "grad_A")}
    multiplicities = set()
    for u in sample_points(spec, 50, 0):
        mj = MoebiusJets(spec, u, order=5)
        d = mj.data()
        dev["rho"] = max(dev["rho"], abs(d.rho - 2.0))
        dev["norm_B"] = max(dev["norm_B"], abs(d.norm_B_sq() - 0.5))
        dev["trace_B"] = max(dev["trace_B"], float(np.max(np.abs(d.trace_B()))))
        dev["C"] = max(dev["C"], float(np.sqrt(np.sum(d.C ** 2))))
        dev["A"] = max(dev["A"], float(np.max(np.abs(d.A - np.eye(2) / 8))))
        dev["grad_A"] = max(dev["grad_A"], mj.parallel_residual())
        multiplicities.add(tuple(k for _, k in blaschke_eigen(d.A)))
    ok = (max(v for k, v in dev.items() if k != "trace_B") <= 1e-8
          and dev["trace_B"] <= 1e-10 and multiplicities == {(2,)})
    return ok, f"max deviation {max(dev.values()):.2e}", {"deviations": dev}


def criterion_4():
    docs, worst = {}, 0.0
    for name in STRUCTURE_FAMILIES:
        report = verify_structure(make_family(name), sample_count=64, seed=0)
        docs[name] = json.loads(report.to_json())
        worst = max([worst] + [report.residuals[k]["max"] for k in STRUCTURE_IDENTITIES])
    ok = worst <= 1e-6 and all(d["pass"] for d in docs.values())
    return ok, f"{len(docs)} families, worst residual {worst:.2e}", docs


def _ls_instance():
    found = feasibility_scan(LS_M, LS_P, KINDS, SCAN_RANGE)
    if not found:
        return None, None
    params = found[0]
    return params, blocks_for(params, KINDS)


def criterion_5():
    params, blocks = _ls_instance()
    if params is None:
        return False, "feasibility scan found no root", {"feasible": []}
    report = verify_ls(blocks, params, sample_count=20, seed=0)
    r = {k: v["max"] for k, v in report.residuals.items()}
    pred = report.metadata["predicted"]["eigenvalues"]
    limits = {"eigenvalues": 1e-6, "parallel_A": 1e-6, "C_norm": 1e-6, "rho_equals_y0": 1e-6,
              "block_pair_B": 1e-6, "mixed_B": 1e-8, "eigen_multiplicity": 0.0}
    ok = (all(r[k] <= v for k, v in limits.items())
          and sorted(k for _, k in pred) == [1, 1, 3] and report.passed)
    worst = max(r[k] for k in limits)
    return ok, f"r^2 = {[round(v, 6) for v in params.r_sq]}, worst {worst:.2e}", \
        json.loads(report.to_json())


def criterion_6():
    params, blocks = _ls_instance()
    subjects = {"clifford": make_family("clifford")}
    if params is not None:
        subjects["ls"] = assemble_ls(blocks, params)
    docs, worst = {}, 0.0
    for name, spec in subjects.items():
        report = moebius_invariance_test(spec, count_transforms=10, seed=0, sample_count=4)
        docs[name] = json.loads(report.to_json())
        worst = max(worst, report.residuals["eigenvalues"]["max"],
                    report.residuals["norm_B"]["max"])
        if report.residuals["distinct_count"]["max"] != 0:
            worst = math.inf
    ok = len(docs) == 2 and worst <= 1e-6
    return ok, f"{len(docs)} subjects x 10 transforms, worst delta {worst:.2e}", docs


def criterion_7():
    spec = make_family("ellipse_torus")
    values = [MoebiusJets(spec, u).parallel_residual() for u in sample_points(spec, 16, 0)]
    return max(values) > 1e-3, f"max grad A {max(values):.3f}", {"grad_A": values}


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7}


def first_run(n):
    if n not in RESULTS:
        ok, detail, doc = CRITERIA[n]()
        RESULTS[n] = (ok, detail, dump(doc))
    return RESULTS[n]


def criterion_8():
    mismatched = [n for n in CRITERIA if dump(CRITERIA[n]()[2]) != first_run(n)[2]]
    ok = not mismatched
    return ok, "byte-identical reruns" if ok else f"reports differ for {mismatched}", {}


def report_line(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail, _ = first_run(n)
    print(report_line(n, ok, detail))
    assert ok, detail


def test_criterion_8_determinism():
    ok, detail, _ = criterion_8()
    RESULTS[8] = (ok, detail, "")
    print(report_line(8, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        ok, detail, _ = first_run(n)
        print(report_line(n, ok, detail))
    ok, detail, _ = criterion_8()
    print(report_line(8, ok, detail))
