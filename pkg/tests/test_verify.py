import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from blaschke.errors import ConfigurationError, UmbilicPointError
from blaschke.families import make_family
from blaschke.lorentz import LorentzTransform, random_rotation
from blaschke.ls import BLOCK_KINDS, LSParams, blocks_for, feasibility_scan
from blaschke.verify import (INVARIANCE_BATTERY, LS_BATTERY, STRUCTURE_BATTERY, Accumulator,
                             VerificationReport, moebius_invariance_test, sample_points,
                             verify_ls, verify_structure)

KINDS = tuple(BLOCK_KINDS)


@pytest.fixture(scope="module")
def scan_params():
    return feasibility_scan((1, 1, 3), (0, 0, 1), KINDS, (0.5, 30.0))[0]


def test_sample_points_inside_and_deterministic():
    spec = make_family("deformed_product")
    a = sample_points(spec, 32, 5)
    np.testing.assert_array_equal(a, sample_points(spec, 32, 5))
    assert not np.array_equal(a, sample_points(spec, 32, 6))
    assert all(spec.contains(u) for u in a)


def test_structure_report_complete():
    report = verify_structure(make_family("veronese"), sample_count=6)
    assert set(report.residuals) == set(STRUCTURE_BATTERY) == set(report.anchors)
    for name, entry in report.residuals.items():
        assert entry["count"] == 6
        assert len(entry["worst_point"]) == 2
    assert report.passed
    doc = json.loads(report.to_json())
    assert doc["pass"] is True
    assert set(doc) >= {"config", "residuals", "verdicts", "pass", "anchors"}


def test_structure_clifford_tight():
    report = verify_structure(make_family("clifford"), sample_count=50)
    assert report.passed
    assert max(e["max"] for e in report.residuals.values()) <= 1e-8
    assert report.residuals["trace_B"]["max"] <= 1e-10


def test_report_deterministic():
    spec = make_family("twisted_torus")
    a = verify_structure(spec, sample_count=5, seed=3).to_json()
    b = verify_structure(spec, sample_count=5, seed=3).to_json()
    assert a == b


def test_workers_match_serial():
    spec = make_family("ellipse_torus")
    serial = verify_structure(spec, sample_count=8, seed=1).to_json()
    assert verify_structure(spec, sample_count=8, seed=1, workers=4).to_json() == serial


def test_failing_verdict_carries_worst_point():
    spec = make_family("ellipse_torus")
    report = verify_structure(spec, sample_count=4, tol={"gauss": 1e-30})
    assert "gauss" in report.failures()
    assert not report.passed
    worst = report.residuals["gauss"]["worst_point"]
    assert any(np.allclose(worst, u) for u in sample_points(spec, 4, 0))


def test_tolerance_override_errors():
    spec = make_family("clifford")
    with pytest.raises(ConfigurationError):
        verify_structure(spec, sample_count=1, tol={"no_such_identity": 1e-3})
    with pytest.raises(ConfigurationError):
        verify_structure(spec, sample_count=1, tol={"gauss": 0.0})


def test_umbilic_aborts_with_point():
    with pytest.raises(UmbilicPointError) as info:
        verify_structure(make_family("small_sphere"), sample_count=2)
    assert info.value.point is not None


def test_accumulator_semantics():
    acc = Accumulator(["x"])
    acc.add("x", 1.0, [0.0])
    acc.add("x", 1.0, [1.0])
    assert acc.stats["x"]["worst_point"] == [0.0]
    acc.add("x", math.nan, [2.0])
    assert math.isnan(acc.stats["x"]["max"]) and acc.stats["x"]["count"] == 3
    report = VerificationReport({}, {"x": 1.0}, acc.stats, {"x": ""})
    assert report.verdicts == {"x": False}
    json.loads(report.to_json())


def test_verdict_boundary():
    stats = {"x": {"max": 1e-6, "count": 1, "worst_point": [0.0]}}
    assert VerificationReport({}, {"x": 1e-6}, stats, {"x": ""}).passed


def test_verify_ls_scan_instance(scan_params):
    report = verify_ls(blocks_for(scan_params, KINDS), scan_params, sample_count=6)
    assert report.passed, report.failures()
    assert set(LS_BATTERY) <= set(report.residuals)
    assert any(name.startswith("param_") for name in report.residuals)
    assert report.residuals["eigenvalues"]["max"] <= 1e-6


def test_verify_ls_incompatible_blocks():
    params = LSParams.build((1, 1, 1), (0, 0, 0), (F(3), F(1), F(2)))
    report = verify_ls(blocks_for(params, (KINDS[0], KINDS[1], KINDS[1])), params,
                       sample_count=2)
    assert not report.passed
    doc = json.loads(report.to_json())
    assert doc["errors"]["incompatible_blocks"]["type"] == "incompatible-blocks"
    assert doc["verdicts"]["incompatible_blocks"] is False


def test_invariance_identity_exact():
    spec = make_family("ellipse_torus")
    report = moebius_invariance_test(spec, transforms=[LorentzTransform.identity(5)],
                                     sample_count=3)
    assert all(e["max"] == 0.0 for e in report.residuals.values())
    assert set(report.residuals) == set(INVARIANCE_BATTERY)


def test_invariance_rotation():
    spec = make_family("ellipse_torus")
    rot = LorentzTransform.rotation(random_rotation(4, np.random.default_rng(1)))
    report = moebius_invariance_test(spec, transforms=[rot], sample_count=3)
    assert report.residuals["eigenvalues"]["max"] <= 1e-10
    assert report.passed


def test_invariance_random_boosts():
    report = moebius_invariance_test(make_family("twisted_torus"), count_transforms=3,
                                     sample_count=2, seed=4)
    assert report.passed
    assert report.metadata["transforms"] == 3
