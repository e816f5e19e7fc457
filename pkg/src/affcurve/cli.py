"""Command-line front end.

Every subcommand reads a JSON config (``--config``), lets a few flags
override it, validates the result against a JSON schema and writes a JSON
report.  Exit codes: 0 success, 2 config error, 3 numeric error,
4 analysis finished but the curve fails a hypothesis.
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import time
from fractions import Fraction

import jsonschema
import numpy as np

from . import __version__
from .boxes import IndicatorSet
from .curves import curve_from_dict
from .errors import AffcurveError, InputError
from .geometry import jacobian_direct, jacobian_recursive, ratio_functions, torsion_profile
from .gi import _inner_monomial, gi_scan, operational_tau
from .hypotheses import FunctionSamples, check_almost_log_concave, check_almost_monotone, convex_hull_probe
from .operators import ExponentPair, WeightSpec, pairing, rwt_diagnostics, rwt_ratio
from .poly import decompose, exponent_region, poly_torsion, real_parts_of_roots
from .quadrature import QuadOpts
from .sampling import sample_box
from .search import extremizer_search
from .xray import XrayMapSpec, injectivity_probe, xray_gi_ratios

log = logging.getLogger("affcurve")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_HYPOTHESIS = 0, 2, 3, 4

# ---------------------------------------------------------------------------
# schemas

_NUM_OR_NULL = {"type": ["number", "null"]}
_REGION = {"type": "array", "items": _NUM_OR_NULL, "minItems": 2, "maxItems": 2}
_FINITE_REGION = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_CURVE = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["monomial", "polynomial", "monomial_like", "builtin", "reparam", "affine_image"]},
        "domain": _REGION,
    },
}
_QUAD = {
    "type": "object",
    "properties": {
        "abs_tol": {"type": "number", "exclusiveMinimum": 0},
        "rel_tol": {"type": "number", "exclusiveMinimum": 0},
        "max_depth": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
_SET = {
    "type": "object",
    "required": ["boxes"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "boxes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
    },
}
_MAP = {
    "type": "object",
    "required": ["kind", "base_scalar", "base_point"],
    "properties": {
        "kind": {"enum": ["Phi", "Psi"]},
        "base_scalar": {"type": "number"},
        "base_point": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "parity": {"enum": ["even", "odd", None]},
    },
}
_WEIGHT = {
    "oneOf": [
        {"enum": list(WeightSpec.VARIANTS)},
        {
            "type": "object",
            "required": ["variant"],
            "properties": {
                "variant": {"enum": list(WeightSpec.VARIANTS)},
                "theta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "t0": {"type": "number"},
            },
        },
    ]
}
_SEED = {"type": "integer", "minimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}
_EXPONENT = {"type": "number", "exclusiveMinimum": 1}
_PARAM_BOX = {"type": "array", "minItems": 1, "items": _FINITE_REGION}


def _schema(required, props):
    base = {"command": {"type": "string"}, "curve": _CURVE, "seed": _SEED, "quad": _QUAD, "threads": {"type": "integer", "minimum": 0}}
    base.update(props)
    return {"type": "object", "required": ["curve", *required], "properties": base}


SCHEMAS = {
    "analyze": _schema(["region"], {
        "region": _FINITE_REGION, "n": {"type": "integer", "minimum": 3},
        "M": {"type": "number", "minimum": 1}, "C": {"type": "number", "minimum": 1},
        "tau": {"type": "object", "required": ["t_max"], "properties": {"t_max": {"type": "number"}, "window": {"type": "number", "exclusiveMinimum": 0}}},
    }),
    "gi": _schema(["region", "seed"], {
        "region": _FINITE_REGION, "n": _POS_INT, "sampler": {"enum": ["grid", "random", "sobol"]},
        "refine": {"type": "integer", "minimum": 0},
    }),
    "xray-gi": _schema(["map", "box", "seed"], {"map": _MAP, "box": _PARAM_BOX, "n": _POS_INT}),
    "injectivity": _schema(["map", "box", "seed"], {
        "map": _MAP, "box": _PARAM_BOX, "n": _POS_INT, "tol": {"type": "number", "exclusiveMinimum": 0},
        "ordered": {"type": "boolean"},
    }),
    "identity-check": _schema(["region", "seed"], {"region": _FINITE_REGION, "n": _POS_INT}),
    "norms": _schema(["p", "q"], {
        "weight": _WEIGHT, "p": _EXPONENT, "q": _EXPONENT, "t_range": _FINITE_REGION,
        "sets": {"type": "object", "required": ["E", "F"], "properties": {"E": _SET, "F": _SET}},
        "budget": _POS_INT,
    }),
    "hull-probe": _schema(["intervals"], {"intervals": {"type": "array", "minItems": 1, "items": _FINITE_REGION}, "n": {"type": "integer", "minimum": 4}}),
    "decompose": _schema(["region"], {"region": _REGION, "n": _POS_INT}),
    "exponent-region": _schema([], {}),
}

RANDOMIZED = {"gi", "xray-gi", "injectivity", "identity-check", "norms"}

# ---------------------------------------------------------------------------
# helpers


def _clean(x):
    """JSON-ready copy: numpy scalars unwrapped, non-finite floats to ``None``, fractions to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _dumps(obj):
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"))


def config_hash(cfg):
    """SHA-256 of the canonical config; thread count is excluded since it cannot change the output."""
    return hashlib.sha256(_dumps({k: v for k, v in cfg.items() if k != "threads"}).encode()).hexdigest()


def _region(r):
    lo, hi = r
    return (-math.inf if lo is None else lo, math.inf if hi is None else hi)


def _interior_grid(curve, lo, hi, n):
    t = np.linspace(lo, hi, n)
    nudge = 1e-9 * (hi - lo)
    if not curve.contains(t[0]):
        t[0] += nudge
    if not curve.contains(t[-1]):
        t[-1] -= nudge
    return t


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in r])
    return buf.getvalue()


class ConfigError(Exception):
    def __init__(self, pointer, message):
        super().__init__(message)
        self.pointer = pointer
        self.message = message


def _build_curve(cfg):
    try:
        return curve_from_dict(cfg["curve"])
    except (InputError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError("/curve", str(exc)) from exc


def _quad(cfg, default=None):
    return QuadOpts.from_dict(cfg["quad"]) if "quad" in cfg else (default or QuadOpts())


# ---------------------------------------------------------------------------
# commands; each returns (payload, csv_text, hypothesis_ok)


def cmd_analyze(cfg, curve, workers):
    lo, hi = cfg["region"]
    t = _interior_grid(curve, lo, hi, cfg.get("n", 201))
    prof = torsion_profile(curve, t)
    d = curve.dim
    M, C = cfg.get("M", 1.0 + 1e-9), cfg.get("C", 1.0 + 1e-9)
    ratios, ok = {}, True
    for k in range(1, d + 1):
        _, B = ratio_functions(curve, t, k)
        absB = np.abs(B)
        lc = check_almost_log_concave(FunctionSamples(t, absB, nonnegative=True), M)
        mono = check_almost_monotone(FunctionSamples(t, absB, nonnegative=True), C)
        ok &= lc.passed
        ratios[f"B{k}"] = {
            "log_concave": lc.to_dict(),
            "monotone": mono.to_dict(),
            "min": float(absB.min()),
            "max": float(absB.max()),
            "constant": bool(np.ptp(absB) <= 1e-9 * max(1.0, float(absB.max()))),
        }
    lam = prof.lam
    payload = {
        "grid": {"lo": float(t[0]), "hi": float(t[-1]), "n": int(t.size)},
        "lambda": {"min": float(lam.min()), "max": float(lam.max()),
                   "constant": bool(np.ptp(lam) <= 1e-9 * max(1.0, float(lam.max())))},
        "ratio_functions": ratios,
        "M": M,
        "C": C,
        "verdict": "pass" if ok else "fail",
    }
    if "tau" in cfg:
        _inner_monomial(curve)
        payload["operational_tau"] = operational_tau(curve, cfg["tau"]["t_max"], window=cfg["tau"].get("window", 0.01))
    return payload, prof.to_csv(), ok


def cmd_gi(cfg, curve, workers):
    rep = gi_scan(curve, cfg["region"], cfg.get("sampler", "random"), cfg.get("n", 1000), cfg["seed"],
                  refine=cfg.get("refine", 5), workers=workers)
    rows = [[b["lo"], b["hi"], b["count"]] for b in rep.histogram]
    return rep.to_dict(), _csv(["lo", "hi", "count"], rows), True


def _map_spec(cfg):
    try:
        return XrayMapSpec.from_dict(cfg["map"])
    except InputError as exc:
        raise ConfigError("/map", str(exc)) from exc


def cmd_xray_gi(cfg, curve, workers):
    spec = _map_spec(cfg)
    box = np.asarray(cfg["box"], dtype=float)
    n = cfg.get("n", 10_000)
    parts = sample_box(box[:, 0], box[:, 1], n, "random", cfg["seed"])
    r = np.concatenate([xray_gi_ratios(spec, curve, P, check=False) for P in parts])
    P = np.concatenate(parts)
    good = np.isfinite(r)
    i = int(np.argmin(np.where(good, r, np.inf)))
    edges = np.geomspace(r[good & (r > 0)].min(), r[good].max(), 21) if np.any(good & (r > 0)) else None
    hist = []
    if edges is not None and edges[0] < edges[-1]:
        counts, _ = np.histogram(r[good & (r > 0)], edges)
        hist = [[float(edges[j]), float(edges[j + 1]), int(c)] for j, c in enumerate(counts)]
    payload = {"map": spec.to_dict(), "n": int(n), "valid": int(good.sum()), "inf_ratio": float(r[i]),
               "argmin": P[i].tolist(), "histogram": hist}
    return payload, _csv(["lo", "hi", "count"], hist), True


def cmd_injectivity(cfg, curve, workers):
    spec = _map_spec(cfg)
    rep = injectivity_probe(spec, curve, cfg["box"], cfg.get("n", 10_000), cfg.get("tol", 1e-2),
                            cfg["seed"], cfg.get("ordered", False))
    payload = rep.to_dict()
    payload["within_bound"] = rep.max_multiplicity <= rep.bound
    return payload, None, True


def cmd_identity_check(cfg, curve, workers):
    lo, hi = cfg["region"]
    n = cfg.get("n", 100)
    d = curve.dim
    T = np.sort(np.concatenate(sample_box(np.full(d, lo), np.full(d, hi), n, "random", cfg["seed"])), axis=1)
    T = T[np.all(np.diff(T, axis=1) > 0, axis=1)]
    Jr = jacobian_recursive(curve, T, _quad(cfg))
    Jd = jacobian_direct(curve, T)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(Jr - Jd) / np.abs(Jd)
    i = int(np.nanargmax(rel))
    payload = {"n": int(T.shape[0]), "max_rel_error": float(rel[i]), "worst_tuple": T[i].tolist(),
               "quad": _quad(cfg).to_dict()}
    rows = [[*T[j].tolist(), float(Jr[j]), float(Jd[j])] for j in range(T.shape[0])]
    return payload, _csv([*[f"t{j + 1}" for j in range(d)], "J_recursive", "J_direct"], rows), True


def _indicator(data, d, pointer):
    try:
        return IndicatorSet(data.get("dim", d), data["boxes"]).canonicalize()
    except InputError as exc:
        raise ConfigError(pointer, str(exc)) from exc


def cmd_norms(cfg, curve, workers):
    try:
        w = WeightSpec.from_dict(cfg.get("weight", "affine"))
        w.validate(curve)
        pq = ExponentPair(cfg["p"], cfg["q"])
    except InputError as exc:
        raise ConfigError("/weight", str(exc)) from exc
    t_range = cfg.get("t_range")
    d = curve.dim
    payload = {"weight": w.to_dict(), "pq": pq.to_dict()}
    csv_text = None
    if "sets" in cfg:
        E = _indicator(cfg["sets"]["E"], d, "/sets/E")
        F = _indicator(cfg["sets"]["F"], d, "/sets/F")
        lam, err = pairing(curve, E, F, w, _quad(cfg), t_range, return_error=True)
        payload["pairing"] = {
            "Lambda": lam, "error": err, "measE": E.measure, "measF": F.measure,
            "ratio": rwt_ratio(lam, E.measure, F.measure, pq),
            "diagnostics": rwt_diagnostics(lam, E.measure, F.measure, d).to_dict(),
        }
    if "budget" in cfg:
        rep = extremizer_search(curve, w, pq, cfg["budget"], cfg.get("seed", 0), t_range, workers=workers)
        payload["search"] = rep.to_dict(records=False)
        csv_text = _csv(["index", "stage", "ratio", "Lambda", "measE", "measF", "slack"],
                        [[r["index"], r["stage"], r["ratio"], r["Lambda"], r["measE"], r["measF"], r["slack"]]
                         for r in rep.records])
    if "sets" not in cfg and "budget" not in cfg:
        raise ConfigError("", "norms needs 'sets', 'budget' or both")
    return payload, csv_text, True


def cmd_hull_probe(cfg, curve, workers):
    n = cfg.get("n", 256)
    rows = [[a, b, convex_hull_probe(curve, (a, b), n)] for a, b in cfg["intervals"]]
    payload = {"n": n, "probes": [{"interval": [a, b], "ratio": r} for a, b, r in rows]}
    return payload, _csv(["a", "b", "ratio"], rows), True


def cmd_decompose(cfg, curve, workers):
    try:
        L = poly_torsion(curve)
    except InputError as exc:
        raise ConfigError("/curve", str(exc)) from exc
    Z = real_parts_of_roots(L) if L.degree() > 0 else np.zeros(0)
    pieces = decompose(L, Z, _region(cfg["region"]), cfg.get("n", 1000))
    payload = {"torsion": L.coef.tolist(), "Z": Z.tolist(), "pieces": [p.to_dict() for p in pieces],
               "worst_factor": max(p.factor for p in pieces)}
    rows = [[p.interval[0], p.interval[1], p.anchor, p.k, p.C, p.factor] for p in pieces]
    return payload, _csv(["lo", "hi", "anchor", "k", "C", "factor"], rows), True


def cmd_exponent_region(cfg, curve, workers):
    try:
        reg = exponent_region(curve)
    except InputError as exc:
        raise ConfigError("/curve", str(exc)) from exc
    rows = [[str(x), str(y), float(x), float(y)] for x, y in reg.vertices]
    return reg.to_dict(), _csv(["inv_p", "inv_q", "inv_p_float", "inv_q_float"], rows), True


COMMANDS = {
    "analyze": cmd_analyze,
    "gi": cmd_gi,
    "xray-gi": cmd_xray_gi,
    "injectivity": cmd_injectivity,
    "identity-check": cmd_identity_check,
    "norms": cmd_norms,
    "hull-probe": cmd_hull_probe,
    "decompose": cmd_decompose,
    "exponent-region": cmd_exponent_region,
}

# ---------------------------------------------------------------------------
# driver


def _load_json_arg(value, what):
    """A JSON document given inline or as a path."""
    try:
        if os.path.exists(value):
            with open(value, encoding="utf-8") as fh:
                return json.load(fh)
        return json.loads(value)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("", f"cannot read {what}: {exc}") from exc


def build_config(args):
    cfg = _load_json_arg(args.config, "config") if args.config else {}
    if not isinstance(cfg, dict):
        raise ConfigError("", "config must be a JSON object")
    if args.curve is not None:
        cfg["curve"] = _load_json_arg(args.curve, "curve")
    for key in ("seed", "p", "q", "budget", "n"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if args.weight is not None:
        cfg["weight"] = _load_json_arg(args.weight, "weight") if args.weight.strip().startswith("{") else args.weight
    if args.region is not None:
        cfg["region"] = list(args.region)
    if args.command in RANDOMIZED and "seed" not in cfg:
        cfg["seed"] = 0
    cfg["command"] = args.command
    return cfg


def validate(cfg, command):
    """Raise :class:`ConfigError` with a JSON pointer if ``cfg`` violates the command schema."""
    validator = jsonschema.Draft202012Validator(SCHEMAS[command])
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        pointer = "".join(f"/{p}" for p in err.absolute_path)
        raise ConfigError(pointer, err.message)


def run(cfg, threads=1):
    """Execute a validated config; returns ``(report, csv_text, exit_code)``."""
    command = cfg["command"]
    validate(cfg, command)
    workers = (os.cpu_count() or 1) if threads == 0 else max(1, int(threads))
    report = {
        "command": command,
        "version": __version__,
        "config_hash": config_hash(cfg),
        "seed": cfg.get("seed"),
        "config": cfg,
    }
    t0 = time.perf_counter()
    curve = _build_curve(cfg)
    try:
        payload, csv_text, ok = COMMANDS[command](cfg, curve, workers)
    except ConfigError:
        raise
    except InputError as exc:
        raise ConfigError("", str(exc)) from exc
    except AffcurveError as exc:
        log.error("numeric failure: %s", exc)
        report["status"] = "numeric_error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        report["timings"] = {"total_s": time.perf_counter() - t0}
        return report, None, EXIT_NUMERIC
    report["payload"] = payload
    report["payload_sha256"] = hashlib.sha256(_dumps(payload).encode()).hexdigest()
    report["status"] = "ok" if ok else "hypothesis_violated"
    report["timings"] = {"total_s": time.perf_counter() - t0}
    return report, csv_text, EXIT_OK if ok else EXIT_HYPOTHESIS


def make_parser():
    parser = argparse.ArgumentParser(prog="affcurve", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"affcurve {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file or inline JSON")
        p.add_argument("--out", help="write the JSON report here (default: stdout)")
        p.add_argument("--csv", help="write plot data as CSV here")
        p.add_argument("--format", choices=("json", "csv"), default="json", help="what goes to stdout when --out is absent")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int, default=1, help="0 means one per CPU; output does not depend on it")
        p.add_argument("--curve", help="curve JSON file or inline JSON")
        p.add_argument("--weight", help="weight variant name or JSON object")
        p.add_argument("--p", type=float)
        p.add_argument("--q", type=float)
        p.add_argument("--budget", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--region", type=float, nargs=2, metavar=("LO", "HI"))
    return parser


def _setup_logging():
    level = os.environ.get("AFFCURVE_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    _setup_logging()
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        report, csv_text, code = run(cfg, args.threads)
    except ConfigError as exc:
        err = {"command": args.command, "status": "config_error",
               "error": {"pointer": exc.pointer, "message": exc.message}}
        sys.stderr.write(_dumps(err) + "\n")
        return EXIT_CONFIG
    text = json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"
    if args.out:
        _emit(text, args.out)
    if args.csv and csv_text is not None:
        _emit(csv_text, args.csv)
    if not args.out:
        _emit((csv_text or "") if args.format == "csv" else text, None)
    log.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
