"""Batteries of identity checks over sampled chart points, with JSON reports."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import ConfigurationError, GeometryError, IncompatibleBlocksError, ParameterError
from .families import DEFAULT_ORDER
from .lorentz import random_transform
from .ls import (assemble_ls, b0_relation_residuals, lemma31_residuals,
                 predicted_invariants)
from .moebius import CLUSTER_TOL, MoebiusJets, apply_lorentz, blaschke_eigen, transformed_spec

TOL_DEEP = 1e-6
TOL_ALGEBRAIC = 1e-8
TOL_EXACT = 1e-10
SAMPLE_MARGIN = 0.02
PARALLEL_THRESHOLD = 1e-6

# name -> (default tolerance, formula anchor)
STRUCTURE_BATTERY = {
    "trace_B": (TOL_EXACT, "sum_i B^a_ii = 0"),
    "norm_B": (TOL_ALGEBRAIC, "sum (B^a_ij)^2 = (m-1)/m"),
    "trace_A": (TOL_DEEP, "tr A = (1 + m^2 kappa)/(2m), kappa = scal/(m(m-1))"),
    "gauss": (TOL_DEEP, "R_ijkl = sum(B_il B_jk - B_ik B_jl) + A_il d_jk - A_ik d_jl"
                        " + A_jk d_il - A_jl d_ik"),
    "normal_curvature": (TOL_DEEP, "Rn_abij = sum_k (B^a_jk B^b_ik - B^a_ik B^b_jk)"),
    "ricci_A": (TOL_DEEP, "A_ij,k - A_ik,j = sum_a (B^a_ik C^a_j - B^a_ij C^a_k)"),
    "ricci_B": (TOL_DEEP, "B^a_ij,k - B^a_ik,j = d_ij C^a_k - d_ik C^a_j"),
    "ricci_C": (TOL_DEEP, "C^a_i,j - C^a_j,i = sum_k (B^a_ik A_kj - B^a_kj A_ki)"),
    "ricci_traced": (TOL_DEEP, "R_ij = -sum B^a_ik B^a_kj + d_ij tr A + (m-2) A_ij"),
    "divergence_B": (TOL_DEEP, "(m-1) C^a_i = -sum_j B^a_ij,j"),
    "ricci_B_second": (TOL_DEEP, "B^a_ij,kl - B^a_ij,lk = sum B^a_qj R_iqkl"
                                 " + sum B^a_iq R_jqkl - sum B^b_ij Rn_bakl"),
    "lightcone_Y": (TOL_ALGEBRAIC, "<Y,Y> = 0, Y_0 > 0"),
    "laplace_Y": (TOL_DEEP, "<LY,Y> = -m, <LY,dY> = 0, <LY,LY> = 1 + m^2 kappa"),
    "biposition_N": (TOL_ALGEBRAIC, "<N,N> = 0, <Y,N> = 1"),
}

LS_BATTERY = {
    "rho_equals_y0": (TOL_DEEP, "rho = y0"),
    "eigenvalues": (TOL_DEEP, "Blaschke eigenvalues = (lambda_a repeated m_a times)"),
    "eigen_multiplicity": (0.0, "clustered multiplicities = predicted multiplicities"),
    "A_block_pattern": (TOL_DEEP, "A_ij = lambda_a d_ij on block a, 0 across blocks"),
    "trace_A_sum": (TOL_DEEP, "tr A = sum_a m_a lambda_a"),
    "parallel_A": (TOL_DEEP, "max |A_ij,k| = 0"),
    "C_norm": (TOL_DEEP, "C = 0"),
    "mixed_B": (TOL_ALGEBRAIC, "B^a_ij = 0 for i, j in different blocks"),
    "block_pair_B": (TOL_DEEP, "sum_a B^a_ij B^a_kl = -(lambda_a + lambda_b) d_ij d_kl, "
                               "i,j in block a, k,l in block b != a"),
    "B_alpha0_pattern": (TOL_ALGEBRAIC, "<B(E_i,E_j), e_alpha0> = B0_a d_ij on block a"),
}

PARAM_ANCHORS = {
    "radius_1": "2 lambda_1 + (B0_1)^2 = -1/r_1^2",
    "radius_2": "2 lambda_2 + (B0_2)^2 = 1/r_2^2",
    "radius_3": "2 lambda_3 + (B0_3)^2 = 1/r_3^2",
    "block_1_expanded": "-(m_1-1)/r_1^2 + (B0_1)^2 = (m+m_1-2) lambda_1 + m_2 lambda_2 + m_3 lambda_3",
    "block_1_compact": "-(m_1-1)/r_1^2 + (B0_1)^2 = (m-2) lambda_1 + sum m_a lambda_a",
    "block_2_expanded": "(m_2-1)/r_2^2 + (B0_2)^2 = m_1 lambda_1 + (m+m_2-2) lambda_2 + m_3 lambda_3",
    "block_2_compact": "(m_2-1)/r_2^2 + (B0_2)^2 = (m-2) lambda_2 + sum m_a lambda_a",
    "block_3_expanded": "(m_3-1)/r_3^2 + (B0_3)^2 = m_1 lambda_1 + m_2 lambda_2 + (m+m_3-2) lambda_3",
    "block_3_compact": "(m_3-1)/r_3^2 + (B0_3)^2 = (m-2) lambda_3 + sum m_a lambda_a",
    "scalar_sum": "-m_1(m_1-1)/r_1^2 + m_2(m_2-1)/r_2^2 + m_3(m_3-1)/r_3^2"
                  " = sum (2 m_a (m-1) - (m+m_a)) lambda_a",
    "b0_weighted_norm": "sum m_a (B0_a)^2 = sum (m+m_a) lambda_a",
    "b0_radius_linear": "-r_1^2 B0_1 + r_2^2 B0_2 + r_3^2 B0_3 = 0",
    "b0_radius_quadratic": "-r_1^2 (B0_1)^2 + r_2^2 (B0_2)^2 + r_3^2 (B0_3)^2"
                           " = -lambda_1 r_1^2 + lambda_2 r_2^2 + lambda_3 r_3^2",
    "lambda_radius": "-lambda_1 r_1^2 + lambda_2 r_2^2 + lambda_3 r_3^2 = 1",
    "b0_weighted_sum": "m_1 B0_1 + m_2 B0_2 + m_3 B0_3 = 0",
    "b0_pair_12": "B0_1 B0_2 = -(lambda_1 + lambda_2)",
    "b0_pair_13": "B0_1 B0_3 = -(lambda_1 + lambda_3)",
    "b0_pair_23": "B0_2 B0_3 = -(lambda_2 + lambda_3)",
    "b0_square_1": "(B0_1)^2 = ((m_2+m_3) lambda_1 + m_2 lambda_2 + m_3 lambda_3)/m_1",
    "b0_square_2": "(B0_2)^2 = ((m_3+m_1) lambda_2 + m_3 lambda_3 + m_1 lambda_1)/m_2",
    "b0_square_3": "(B0_3)^2 = ((m_1+m_2) lambda_3 + m_1 lambda_1 + m_2 lambda_2)/m_3",
    "radius_recovered_1": "r_1^2 = -1/(2 lambda_1 + (B0_1)^2)",
    "radius_recovered_2": "r_2^2 = 1/(2 lambda_2 + (B0_2)^2)",
    "radius_recovered_3": "r_3^2 = 1/(2 lambda_3 + (B0_3)^2)",
}

INVARIANCE_BATTERY = {
    "eigenvalues": (TOL_DEEP, "Blaschke eigenvalues of T.x = those of x"),
    "norm_B": (TOL_DEEP, "|B|^2 of T.x = that of x"),
    "distinct_count": (0.0, "number of distinct Blaschke eigenvalues unchanged"),
    "parallel_verdict": (0.0, "Blaschke-parallel verdict unchanged"),
    "lift_equivariance": (TOL_DEEP, "canonical lift of T.x = T(Y)"),
}


def sample_points(spec, count, seed):
    """Scrambled Halton points inside the chart box, away from its faces."""
    lo = np.array([d[0] for d in spec.domain], dtype=float)
    hi = np.array([d[1] for d in spec.domain], dtype=float)
    unit = qmc.Halton(d=spec.dim_intrinsic, scramble=True, seed=seed).random(count)
    return lo + (SAMPLE_MARGIN + (1 - 2 * SAMPLE_MARGIN) * unit) * (hi - lo)


class Accumulator:
    """Running maxima; the first worst sample is kept on ties, NaN counts as worst."""

    def __init__(self, names):
        self.stats = {n: {"max": 0.0, "count": 0, "worst_point": None} for n in names}

    def add(self, name, value, point):
        entry = self.stats[name]
        value = float(value)
        current = entry["max"]
        worse = (math.isnan(value) and not math.isnan(current)) or value > current
        if entry["count"] == 0 or worse:
            entry["max"] = value
            entry["worst_point"] = [float(c) for c in point]
        entry["count"] += 1


@dataclass
class VerificationReport:
    subject: dict
    tolerances: dict
    residuals: dict
    anchors: dict
    metadata: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    @property
    def verdicts(self):
        out = {}
        for name, tol in self.tolerances.items():
            value = self.residuals[name]["max"]
            out[name] = value is not None and not math.isnan(value) and value <= tol
        return out

    @property
    def passed(self):
        return bool(self.verdicts) and all(self.verdicts.values()) and not self.errors

    def failures(self):
        return [n for n, ok in self.verdicts.items() if not ok]

    def to_dict(self):
        out = {
            "config": self.config,
            "subject": self.subject,
            "metadata": self.metadata,
            "tolerances": self.tolerances,
            "residuals": self.residuals,
            "verdicts": self.verdicts,
            "pass": self.passed,
            "anchors": self.anchors,
        }
        if self.errors:
            out["errors"] = self.errors
        return out

    def to_json(self):
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True,
                          allow_nan=False) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _tolerances(battery, tol):
    tol = tol or {}
    unknown = set(tol) - set(battery)
    if unknown:
        raise ConfigurationError(f"tolerance override for unknown identities {sorted(unknown)}")
    if any(v <= 0 for v in tol.values()):
        raise ConfigurationError("tolerance overrides must be positive")
    return {name: float(tol.get(name, default)) for name, (default, _) in battery.items()}


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _metadata(order, seed, samples, **extra):
    return dict(jet_order=order, cluster_tol=CLUSTER_TOL, seed=seed, samples=samples, **extra)


def structure_residuals_at(spec, point, order=DEFAULT_ORDER):
    return MoebiusJets(spec, point, order).structure_residuals()


def verify_structure(spec, sample_count=64, tol=None, seed=0, order=DEFAULT_ORDER, workers=None):
    """Run the structure-equation battery over low-discrepancy samples.

    An umbilic sample raises :class:`UmbilicPointError` carrying the point.
    """
    tols = _tolerances(STRUCTURE_BATTERY, tol)
    points = sample_points(spec, sample_count, seed)
    results = _map(lambda u: structure_residuals_at(spec, u, order), points, workers)
    acc = Accumulator(STRUCTURE_BATTERY)
    for u, res in zip(points, results):
        for name in STRUCTURE_BATTERY:
            if name in res:
                acc.add(name, res[name], u)
    return VerificationReport(
        subject=spec.describe(), tolerances=tols, residuals=acc.stats,
        anchors={n: a for n, (_, a) in STRUCTURE_BATTERY.items()},
        metadata=_metadata(order, seed, sample_count))


def _ls_point(spec, params, pred, u, order):
    mj = MoebiusJets(spec, u, order)
    data = mj.data()
    out = dict(mj.structure_residuals())
    ranges = spec.extras["block_ranges"]
    block_of = np.concatenate([[a] * (hi - lo) for a, (lo, hi) in enumerate(ranges)])
    lam = np.array([float(v) for v in params.lam])
    out["rho_equals_y0"] = abs(data.rho - spec.extras["y0"](u))
    values = np.sort(np.linalg.eigvalsh(data.A))
    expected = np.sort(lam[block_of])
    out["eigenvalues"] = float(np.max(np.abs(values - expected)))
    got = [k for _, k in blaschke_eigen(data.A)]
    want = [k for _, k in pred["eigenvalues"]]
    out["eigen_multiplicity"] = 0.0 if got == want else 1.0
    out["A_block_pattern"] = float(np.max(np.abs(data.A - np.diag(lam[block_of]))))
    out["trace_A_sum"] = abs(float(np.trace(data.A)) - pred["trace_A"])
    out["parallel_A"] = mj.parallel_residual()
    out["C_norm"] = float(np.sqrt(np.sum(data.C ** 2)))
    cross = block_of[:, None] != block_of[None, :]
    out["mixed_B"] = float(np.max(np.abs(data.B[:, cross]), initial=0.0))
    pair = np.einsum("aij,akl->ijkl", data.B, data.B)
    d = np.eye(len(block_of))
    lb = lam[block_of]
    target = -(lb[:, None, None, None] + lb[None, None, :, None]) * np.einsum("ij,kl->ijkl", d, d)
    same = ~cross
    mask = same[:, :, None, None] & same[None, None, :, :] & cross[:, None, :, None]
    out["block_pair_B"] = float(np.max(np.abs((pair - target)[mask]), initial=0.0))
    e0 = spec.extras["e_alpha0"](u)
    b_alpha0 = np.einsum("k,kij->ij", e0, mj.B_ambient())
    b0 = np.array(pred["b_alpha0"])
    out["B_alpha0_pattern"] = float(np.max(np.abs(b_alpha0 - np.diag(b0[block_of]))))
    return out


def verify_ls(blocks, params, sample_count=64, tol=None, seed=0, order=DEFAULT_ORDER,
              workers=None):
    """Check the LS predictions on the assembled immersion.

    Parameter identities are evaluated once; the geometric battery runs on
    every sample.  Incompatible blocks yield a failing report instead of an
    exception.
    """
    battery = dict(STRUCTURE_BATTERY)
    battery.update(LS_BATTERY)
    param_res = dict(lemma31_residuals(params))
    param_res.update(b0_relation_residuals(params))
    for name in param_res:
        battery[f"param_{name}"] = (TOL_EXACT, PARAM_ANCHORS[name])
    tols = _tolerances(battery, tol)
    anchors = {n: a for n, (_, a) in battery.items()}
    subject = {"family": "ls", "params": params.to_json(),
               "blocks": [{"kind": b.kind, "slot": b.slot, "r_sq": float(b.r_sq), "m": b.m,
                           "k": b.k} for b in blocks]}
    meta = _metadata(order, seed, sample_count, exact_parameters=params.exact)
    acc = Accumulator(battery)
    for name, value in param_res.items():
        acc.add(f"param_{name}", value, [])
    try:
        spec = assemble_ls(blocks, params)
    except (ParameterError, GeometryError) as exc:
        return _assembly_failure(exc, subject, meta, param_res, tols, anchors)
    params = spec.extras["params"]
    subject["params"] = params.to_json()
    pred = predicted_invariants(params)
    points = sample_points(spec, sample_count, seed)
    results = _map(lambda u: _ls_point(spec, params, pred, u, order), points, workers)
    for u, res in zip(points, results):
        for name, value in res.items():
            acc.add(name, value, u)
    meta["predicted"] = {k: pred[k] for k in ("eigenvalues", "trace_A", "distinct")}
    return VerificationReport(subject=subject, tolerances=tols, residuals=acc.stats,
                              anchors=anchors, metadata=meta)


def _assembly_failure(exc, subject, meta, param_res, tols, anchors):
    """Report carrying the parameter identities plus one failing assembly verdict."""
    key = "incompatible_blocks" if isinstance(exc, IncompatibleBlocksError) else "assembly"
    kind = "incompatible-blocks" if key == "incompatible_blocks" else type(exc).__name__
    names = [f"param_{n}" for n in param_res]
    acc = Accumulator(names)
    for name, value in param_res.items():
        acc.add(f"param_{name}", value, [])
    stats = dict(acc.stats)
    stats[key] = {"max": None, "count": 0, "worst_point": None}
    tolerances = {n: tols[n] for n in names}
    tolerances[key] = 0.0
    anchor_map = {n: anchors[n] for n in names}
    anchor_map[key] = "blocks realize the scalar curvatures required by mu, sum mu = 1"
    return VerificationReport(subject=subject, tolerances=tolerances, residuals=stats,
                              anchors=anchor_map, metadata=meta,
                              errors={key: {"type": kind, "message": str(exc)}})


def invariants_at(spec, point, order=DEFAULT_ORDER, cluster_tol=CLUSTER_TOL):
    """Eigenvalues, |B|^2, distinct count and parallel residual at one point."""
    mj = MoebiusJets(spec, point, order)
    data = mj.data()
    clusters = blaschke_eigen(data.A, cluster_tol)
    return {
        "eigenvalues": np.sort(np.linalg.eigvalsh(data.A)),
        "norm_B": data.norm_B_sq(),
        "distinct": len(clusters),
        "parallel": mj.parallel_residual() if order >= 5 else math.nan,
        "Y": data.Y,
        "data": data,
        "jets": mj,
    }


def moebius_invariance_test(spec, count_transforms=10, tol=None, seed=0, sample_count=4,
                            order=DEFAULT_ORDER, max_rapidity=1.0, transforms=None,
                            workers=None):
    """Compare invariants of ``x`` and ``T.x`` for random ``T`` in O+.

    ``transforms`` overrides the random draw (used for identity and pure
    rotation checks).
    """
    tols = _tolerances(INVARIANCE_BATTERY, tol)
    rng = np.random.default_rng(seed)
    size = spec.output_dim + 1
    if transforms is None:
        transforms = [random_transform(size, rng, max_rapidity) for _ in range(count_transforms)]
    points = sample_points(spec, sample_count, seed)
    base = _map(lambda u: invariants_at(spec, u, order), points, workers)
    acc = Accumulator(INVARIANCE_BATTERY)
    for T in transforms:
        moved = transformed_spec(spec, T)
        after = _map(lambda u: invariants_at(moved, u, order), points, workers)
        for u, b, a in zip(points, base, after):
            acc.add("eigenvalues", np.max(np.abs(a["eigenvalues"] - b["eigenvalues"])), u)
            acc.add("norm_B", abs(a["norm_B"] - b["norm_B"]), u)
            acc.add("distinct_count", abs(a["distinct"] - b["distinct"]), u)
            acc.add("parallel_verdict",
                    float((a["parallel"] <= PARALLEL_THRESHOLD) != (b["parallel"] <= PARALLEL_THRESHOLD)), u)
            ty, _ = apply_lorentz(T, b["Y"])
            acc.add("lift_equivariance",
                    float(np.max(np.abs(ty[0] - a["Y"])) / np.max(np.abs(a["Y"]))), u)
    return VerificationReport(
        subject=spec.describe(), tolerances=tols, residuals=acc.stats,
        anchors={n: a for n, (_, a) in INVARIANCE_BATTERY.items()},
        metadata=_metadata(order, seed, sample_count, transforms=len(transforms),
                           max_rapidity=max_rapidity))
