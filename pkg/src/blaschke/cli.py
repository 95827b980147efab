"""Command-line front end: ``blaschke <group> <command> [options]``.

Exit status: 0 when every verdict passes, 1 on a verification failure,
2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from .conformal import sigma_map, tau_map
from .errors import (ConfigurationError, DomainError, GeometryError, ParameterError)
from .families import DEFAULT_ORDER, FAMILIES, make_family
from .ls import (BLOCK_KINDS, LSParams, assemble_ls, b0_relation_residuals,
                 feasibility_scan, lemma31_residuals, make_block,
                 solve_B0)
from .moebius import MoebiusJets
from .verify import (TOL_EXACT, moebius_invariance_test, sample_points, verify_ls,
                     verify_structure)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CONFIG_KEYS = {
    "subcommand", "family", "family_params", "blocks", "m", "p", "r_sq", "mu", "lambda",
    "jet_order", "samples", "seed", "tol", "out", "format", "transforms", "steps",
    "r3sq_range", "r2sq", "distinct", "workers",
}
DEFAULTS = {"jet_order": DEFAULT_ORDER, "samples": 64, "seed": 0, "format": "json"}
# invariance runs recompute every sample once per transform
COMMAND_DEFAULTS = {
    "verify invariance": {"samples": 8, "transforms": 10},
    "scan feasibility": {"steps": 200, "r2sq": [2.0], "distinct": False},
}
KIND_ALIASES = {"h": "totally-geodesic-hyperbolic", "s": "totally-geodesic-sphere",
                "clifford": "clifford-torus"}
INVARIANT_RESIDUALS = ("tr_B", "norm_B", "gauss", "ricci_2_17", "C_norm", "gradA_norm")


class UsageError(ValueError):
    pass


# -- parsing helpers ---------------------------------------------------------

def _number(text):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def _triple(text):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    return [_number(p) for p in parts]


def _pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated numbers, got {text!r}")
    return [float(_number(p)) for p in parts]


def _assignment(text):
    if "=" not in text:
        raise UsageError(f"expected NAME=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    num = _number(value)
    return key.strip(), int(num) if num.denominator == 1 and "." not in value else float(num)


def _intlike(values, name):
    out = []
    for v in values:
        if isinstance(v, bool) or not float(v).is_integer():
            raise UsageError(f"{name} entries must be integers")
        out.append(int(v))
    return out


def _exactish(v):
    """JSON ints and CLI decimals stay exact; JSON floats stay floats."""
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return Fraction(v)
    if isinstance(v, float):
        return v
    raise UsageError(f"not a number: {v!r}")


def _parse_blocks(spec):
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    if not isinstance(spec, list) or len(spec) != 3:
        raise UsageError("blocks must name three block kinds")
    out = []
    for item in spec:
        if isinstance(item, dict):
            unknown = set(item) - {"kind", "k"}
            if unknown:
                raise UsageError(f"unknown block key {sorted(unknown)[0]!r}")
            kind, k = item.get("kind"), item.get("k")
        else:
            kind, _, k = str(item).strip().partition(":")
            k = int(k) if k else None
        kind = KIND_ALIASES.get(kind, kind)
        if kind not in BLOCK_KINDS:
            raise UsageError(f"unknown block kind {kind!r}")
        out.append((kind, k))
    return out


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    for key in doc:
        if key not in CONFIG_KEYS:
            raise UsageError(f"unknown config key {key!r}")
    return doc


def effective_config(args, command):
    """Config file values overridden by explicit flags."""
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    if "subcommand" in cfg and cfg["subcommand"] != command:
        raise UsageError(f"config subcommand {cfg['subcommand']!r} does not match {command!r}")
    cfg["subcommand"] = command
    flags = {
        "family": getattr(args, "family", None),
        "blocks": getattr(args, "blocks", None),
        "m": getattr(args, "m", None), "p": getattr(args, "p", None),
        "r_sq": getattr(args, "r_sq", None), "mu": getattr(args, "mu", None),
        "lambda": getattr(args, "lam", None),
        "jet_order": getattr(args, "jet_order", None), "samples": getattr(args, "samples", None),
        "seed": getattr(args, "seed", None), "out": getattr(args, "out", None),
        "format": getattr(args, "format", None), "transforms": getattr(args, "transforms", None),
        "steps": getattr(args, "steps", None), "r3sq_range": getattr(args, "r3sq_range", None),
        "r2sq": getattr(args, "r2sq", None), "workers": getattr(args, "workers", None),
    }
    for key, value in flags.items():
        if value is not None:
            cfg[key] = value
    if getattr(args, "distinct", False):
        cfg["distinct"] = True
    if getattr(args, "family_param", None):
        cfg.setdefault("family_params", {}).update(dict(args.family_param))
    if getattr(args, "tol", None):
        cfg.setdefault("tol", {}).update(dict(args.tol))
    for key, value in {**DEFAULTS, **COMMAND_DEFAULTS.get(command, {})}.items():
        cfg.setdefault(key, value)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if not isinstance(cfg["jet_order"], int) or cfg["jet_order"] < 2:
        raise UsageError("jet_order must be an integer >= 2")
    if not isinstance(cfg["samples"], int) or cfg["samples"] < 1:
        raise UsageError("samples must be an integer >= 1")
    if not isinstance(cfg["seed"], int):
        raise UsageError("seed must be an integer")
    if cfg["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    tol = cfg.get("tol", {})
    if not isinstance(tol, dict):
        raise UsageError("tol must map identity names to numbers")
    for key, value in tol.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            raise UsageError(f"tolerance override {key!r} must be a positive number")
    for key in ("m", "p", "r_sq", "mu", "lambda"):
        if key in cfg and cfg[key] is not None:
            if not isinstance(cfg[key], list) or len(cfg[key]) != 3:
                raise UsageError(f"{key} must be a list of three numbers")
            cfg[key] = [_exactish(v) for v in cfg[key]]
    for key in ("m", "p"):
        if key in cfg:
            cfg[key] = _intlike(cfg[key], key)
    if isinstance(cfg.get("r2sq"), (int, float)):
        cfg["r2sq"] = [cfg["r2sq"]]


def _json_config(cfg):
    out = {}
    for key, value in sorted(cfg.items()):
        if isinstance(value, list):
            value = [float(v) if isinstance(v, Fraction) else v for v in value]
        out[key] = value
    return out


# -- subjects ----------------------------------------------------------------

def _family(cfg):
    name = cfg.get("family")
    if not name:
        raise UsageError("a family is required (choices: " + ", ".join(sorted(FAMILIES)) + ")")
    try:
        return make_family(name, **cfg.get("family_params", {}))
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None


def _ls_inputs(cfg):
    for key in ("m", "p", "r_sq", "blocks"):
        if cfg.get(key) is None:
            raise UsageError(f"LS runs need {key!r}")
    params = _build_params(cfg["m"], cfg["p"], cfg["r_sq"], cfg.get("mu"))
    parsed = _parse_blocks(cfg["blocks"])
    try:
        blocks = tuple(make_block(kind, a + 1, params.r_sq[a], params.m[a], k)
                       for a, (kind, k) in enumerate(parsed))
    except (ConfigurationError, DomainError) as exc:
        raise UsageError(str(exc)) from None
    return blocks, params


def _build_params(m, p, r_sq, mu=None):
    try:
        return LSParams.build(m, p, r_sq, mu)
    except ParameterError as exc:
        if type(exc) is ParameterError:
            raise UsageError(str(exc)) from None
        raise


def _subject_spec(cfg):
    if cfg.get("blocks") is not None:
        blocks, params = _ls_inputs(cfg)
        return assemble_ls(blocks, params)
    return _family(cfg)


# -- output ------------------------------------------------------------------

def _emit(text, cfg):
    if cfg.get("out"):
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _dump_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _report_out(report, cfg):
    report.config = _json_config(cfg)
    if cfg["format"] == "json":
        _emit(report.to_json(), cfg)
    else:
        verdicts = report.verdicts
        rows = []
        for name in sorted(report.tolerances):
            res = report.residuals[name]
            point = res["worst_point"]
            rows.append([name, res["max"] if res["max"] is not None else "", res["count"],
                         report.tolerances[name], verdicts[name],
                         " ".join(repr(c) for c in point) if point else ""])
        _emit(_csv_text(["identity", "max", "count", "tolerance", "pass", "worst_point"], rows),
              cfg)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _table_out(header, rows, cfg, extra=None):
    if cfg["format"] == "csv":
        _emit(_csv_text(header, rows), cfg)
    else:
        doc = {"config": _json_config(cfg), "columns": header, "rows": rows}
        doc.update(extra or {})
        _emit(_dump_json(doc), cfg)


# -- commands ----------------------------------------------------------------

def _param_doc(params):
    lemma = lemma31_residuals(params)
    rel = b0_relation_residuals(params)
    doc = params.to_json()
    doc["exact"] = params.exact
    if params.exact:
        doc["lambda_exact"] = [str(v) for v in params.lam]
        doc["b0_exact"] = {"coeffs": [str(q) for q in params.b0.coeffs],
                           "radicand": str(params.b0.radicand)}
    doc["distinct_eigenvalues"] = params.distinct_count()
    doc["lemma31_residuals"] = {k: float(v) for k, v in lemma.items()}
    doc["b0_residuals"] = {k: float(v) for k, v in rel.items()}
    ok = all(float(v) <= TOL_EXACT for v in list(lemma.values()) + list(rel.values()))
    return doc, ok


def cmd_params_solve(cfg):
    if cfg.get("m") is None or cfg.get("r_sq") is None:
        raise UsageError("params solve needs --m and --r-sq")
    params = _build_params(cfg["m"], cfg.get("p") or [0, 0, 0], cfg["r_sq"], cfg.get("mu"))
    doc, ok = _param_doc(params)
    if cfg["format"] == "csv":
        keys = ["lambda", "b0"]
        rows = [[k, a + 1, doc[k][a]] for k in keys for a in range(3)]
        rows += [["lemma31", name, v] for name, v in doc["lemma31_residuals"].items()]
        rows += [["b0_relation", name, v] for name, v in doc["b0_residuals"].items()]
        _emit(_csv_text(["quantity", "index", "value"], rows), cfg)
    else:
        doc["config"] = _json_config(cfg)
        doc["pass"] = ok
        _emit(_dump_json(doc), cfg)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_params_b0(cfg):
    if cfg.get("m") is None or cfg.get("lambda") is None:
        raise UsageError("params b0 needs --m and --lambda")
    lam = cfg["lambda"]
    if not all(isinstance(v, Fraction) for v in lam):
        lam = [float(v) for v in lam]
    b0 = solve_B0(cfg["m"], lam)
    rows = [[a + 1, v] for a, v in enumerate(b0.values)]
    extra = {"b0": list(b0.values), "convention": "first nonzero B0 entry positive"}
    if b0.exact:
        extra["b0_exact"] = {"coeffs": [str(q) for q in b0.coeffs], "radicand": str(b0.radicand)}
    _table_out(["index", "b0"], rows, cfg, extra)
    return EXIT_PASS


def cmd_params_lemma31(cfg):
    if cfg.get("m") is None or cfg.get("r_sq") is None:
        raise UsageError("params lemma31 needs --m and --r-sq")
    params = _build_params(cfg["m"], cfg.get("p") or [0, 0, 0], cfg["r_sq"])
    res = lemma31_residuals(params)
    rows = [[name, float(v)] for name, v in res.items()]
    ok = all(float(v) <= TOL_EXACT for v in res.values())
    _table_out(["identity", "residual"], rows, cfg, {"pass": ok, "exact": params.exact})
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_scan(cfg):
    for key in ("m", "p", "blocks", "r3sq_range"):
        if cfg.get(key) is None:
            raise UsageError(f"scan feasibility needs {key!r}")
    kinds = [kind for kind, _ in _parse_blocks(cfg["blocks"])]
    found = feasibility_scan(cfg["m"], cfg["p"], kinds, cfg["r3sq_range"], cfg["steps"],
                             cfg["r2sq"], cfg["distinct"], cfg.get("workers"))
    docs = [f.to_json() for f in found]
    if cfg["format"] == "csv":
        rows = [[i] + d["r_sq"] + d["mu"] + d["lambda"] + d["b0"] for i, d in enumerate(docs)]
        header = (["index"] + [f"r_sq_{a}" for a in (1, 2, 3)] + [f"mu_{a}" for a in (1, 2, 3)]
                  + [f"lambda_{a}" for a in (1, 2, 3)] + [f"b0_{a}" for a in (1, 2, 3)])
        _emit(_csv_text(header, rows), cfg)
    else:
        _emit(_dump_json({"config": _json_config(cfg), "feasible": docs,
                          "pass": bool(docs)}), cfg)
    return EXIT_PASS if docs else EXIT_FAIL


def cmd_invariants(cfg):
    spec = _subject_spec(cfg)
    order = cfg["jet_order"]
    m = spec.dim_intrinsic
    header = (["sample"] + [f"u{i + 1}" for i in range(m)] + ["rho"]
              + [f"eig{i + 1}" for i in range(m)] + list(INVARIANT_RESIDUALS))
    rows = []
    for idx, u in enumerate(sample_points(spec, cfg["samples"], cfg["seed"])):
        mj = MoebiusJets(spec, u, order)
        data = mj.data()
        res = mj.structure_residuals()
        eig = np.sort(np.linalg.eigvalsh(data.A))
        grad = mj.parallel_residual() if order >= 5 else float("nan")
        vals = [res["trace_B"], res["norm_B"], res["gauss"], res.get("ricci_A", float("nan")),
                float(np.sqrt(np.sum(data.C ** 2))), grad]
        rows.append([idx] + [float(c) for c in u] + [data.rho] + [float(e) for e in eig]
                    + [float(v) for v in vals])
    _table_out(header, rows, cfg)
    return EXIT_PASS


def cmd_verify_structure(cfg):
    spec = _family(cfg) if cfg.get("blocks") is None else _subject_spec(cfg)
    report = verify_structure(spec, cfg["samples"], cfg.get("tol"), cfg["seed"],
                              cfg["jet_order"], cfg.get("workers"))
    return _report_out(report, cfg)


def cmd_verify_ls(cfg):
    blocks, params = _ls_inputs(cfg)
    report = verify_ls(blocks, params, cfg["samples"], cfg.get("tol"), cfg["seed"],
                       cfg["jet_order"], cfg.get("workers"))
    return _report_out(report, cfg)


def cmd_verify_invariance(cfg):
    spec = _subject_spec(cfg)
    report = moebius_invariance_test(spec, cfg["transforms"], cfg.get("tol"), cfg["seed"],
                                     cfg["samples"], cfg["jet_order"], workers=cfg.get("workers"))
    return _report_out(report, cfg)


def cmd_map(cfg, which, stream):
    out = []
    for lineno, line in enumerate(stream, 1):
        text = line.replace(",", " ").split()
        if not text:
            continue
        try:
            point = [float(t) for t in text]
        except ValueError:
            raise UsageError(f"line {lineno}: not a list of numbers") from None
        image = sigma_map(point) if which == "sigma" else tau_map(point)
        out.append([float(v) for v in image])
    width = max((len(r) for r in out), default=0)
    _table_out([f"x{i}" for i in range(width)], out, cfg)
    return EXIT_PASS


# -- argument parser -----------------------------------------------------------

def _common(p, report=True):
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    if report:
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--jet-order", type=int, dest="jet_order")
        p.add_argument("--workers", type=int)
        p.add_argument("--tol", action="append", type=_assignment, metavar="NAME=VALUE",
                       help="tolerance override for one identity")


def _subject(p):
    p.add_argument("--family", help="built-in family: " + ", ".join(sorted(FAMILIES)))
    p.add_argument("--family-param", action="append", type=_assignment, dest="family_param",
                   metavar="NAME=VALUE")
    _ls_flags(p)


def _ls_flags(p, blocks=True):
    p.add_argument("--m", type=_triple)
    p.add_argument("--p", type=_triple)
    p.add_argument("--r-sq", type=_triple, dest="r_sq")
    p.add_argument("--mu", type=_triple)
    if blocks:
        p.add_argument("--blocks", help="three kinds, e.g. h,s,clifford:1")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="blaschke", description="Moebius invariants of submanifolds of the sphere.")
    groups = parser.add_subparsers(dest="group", required=True)

    params = groups.add_parser("params", help="LS parameter algebra")
    psub = params.add_subparsers(dest="command", required=True)
    for name in ("solve", "lemma31"):
        p = psub.add_parser(name)
        _ls_flags(p, blocks=False)
        _common(p, report=False)
    p = psub.add_parser("b0")
    p.add_argument("--m", type=_triple)
    p.add_argument("--lambda", type=_triple, dest="lam")
    _common(p, report=False)

    scan = groups.add_parser("scan", help="search feasible LS parameters")
    ssub = scan.add_subparsers(dest="command", required=True)
    p = ssub.add_parser("feasibility")
    _ls_flags(p)
    p.add_argument("--r3sq-range", type=_pair, dest="r3sq_range")
    p.add_argument("--r2sq", type=lambda s: [float(_number(v)) for v in s.split(",")])
    p.add_argument("--steps", type=int)
    p.add_argument("--distinct", action="store_true",
                   help="drop candidates with two equal Blaschke eigenvalues")
    p.add_argument("--workers", type=int)
    _common(p, report=False)

    p = groups.add_parser("invariants", help="per-sample Moebius invariants")
    _subject(p)
    _common(p)

    verify = groups.add_parser("verify", help="identity batteries")
    vsub = verify.add_subparsers(dest="command", required=True)
    for name in ("structure", "ls", "invariance"):
        p = vsub.add_parser(name)
        _subject(p)
        _common(p)
        if name == "invariance":
            p.add_argument("--transforms", type=int)

    mapper = groups.add_parser("map", help="apply sigma or tau to points read from stdin")
    msub = mapper.add_subparsers(dest="command", required=True)
    for name in ("sigma", "tau"):
        _common(msub.add_parser(name), report=False)
    return parser


COMMANDS = {
    ("params", "solve"): cmd_params_solve,
    ("params", "b0"): cmd_params_b0,
    ("params", "lemma31"): cmd_params_lemma31,
    ("scan", "feasibility"): cmd_scan,
    ("invariants", None): cmd_invariants,
    ("verify", "structure"): cmd_verify_structure,
    ("verify", "ls"): cmd_verify_ls,
    ("verify", "invariance"): cmd_verify_invariance,
}


def run(argv=None, stdin=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    command = getattr(args, "command", None)
    name = f"{args.group} {command}" if command else args.group
    try:
        cfg = effective_config(args, name)
        if args.group == "map":
            return cmd_map(cfg, args.command, stdin or sys.stdin)
        return COMMANDS[(args.group, command)](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryError as exc:
        point = getattr(exc, "point", None)
        where = f" at chart point {[float(c) for c in point]}" if point is not None else ""
        print(f"verification failed: {type(exc).__name__}: {exc}{where}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
