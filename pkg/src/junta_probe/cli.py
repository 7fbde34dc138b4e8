"""Command-line front end: ``junta-probe <subcommand> [options]``.

Every option can also come from a config file (``--config``, one
``key = value`` per line, ``#`` comments) or from an environment variable
``JUNTA_PROBE_<KEY>`` (upper case, dashes as underscores). Precedence is
flags, then environment, then config file, then built-in defaults.

Seeds: the master seed ``--seed`` builds one :class:`GaussianSampler`;
its first spawned child generates zoo functions, its second drives the
algorithm. Nothing else draws randomness.

Reports are JSON objects, one per line. ``payload`` holds the result and
is reproducible bit for bit from config and seed; wall-clock data sits in
``timings`` outside the payload.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from typing import Any, Dict, Optional

import numpy as np

from . import __version__, kernels
from .errors import BudgetExceeded, CoverTooLarge, InvalidArgument, JuntaProbeError
from .oracle import (Constant, FunctionOracle, GaussianSampler, Halfspace, QueryLedger,
                     RotatedJunta, SignLiftedJunta, and_table, parity_table,
                     random_halfspace_intersection, zoo_from_dict)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


# ---------------------------------------------------------------------------
# option table: name -> (type, default, help)

COMMON = {
    "seed": (int, 0, "master seed"),
    "out": (str, None, "output path (JSONL report; CSV for lowerbound)"),
    "max-queries": (int, None, "query budget cap"),
}
ALGO = {
    "k": (int, 1, "junta dimension"),
    "s": (float, 2.0, "surface-area bound"),
    "eps": (float, 0.25, "accuracy parameter"),
    "dim": (int, 16, "ambient dimension"),
    "function": (str, None, "zoo function: JSON file, inline JSON, or gen:NAME"),
    "preset": (str, "practical", "parameter preset: practical or paper"),
}
SUBCOMMANDS = {
    "test": dict(ALGO, **{"skip-gate": (bool, False, "run the rank test only")}),
    "learn": dict(ALGO, **{
        "hypotheses": (str, "thresholds:200", "hypothesis family or 'cover'"),
        "fresh": (int, 1000, "fresh points for the agreement check"),
        "max-cover": (int, 10 ** 6, "cover size cap"),
    }),
    "structure-test": dict(ALGO, **{
        "hypotheses": (str, "signed-thresholds:200", "hypothesis family"),
        "class": (str, "thresholds", "class checker (thresholds)"),
    }),
    "lowerbound": {
        "s": (str, "10000", "comma-separated stripe counts"),
        "design": (str, "spread:5", "grid:AxB, spread:N, gaussian:N or clusters:N"),
        "trials": (int, 100_000, "trials per distribution"),
        "bootstrap": (int, 200, "bootstrap resamples"),
        "report": (str, None, "optional JSONL report path"),
    },
    "bench-estimators": {
        "dim": (int, 16, "ambient dimension"),
        "function": (str, "gen:halfspace", "function (halfspace or constant)"),
        "theta": (float, 1.0, "threshold of the generated halfspace"),
        "t": (float, 0.5, "noise parameter"),
        "eta": (float, 0.1, "degree-1 parameter"),
        "eps": (float, 0.05, "accuracy of the scalar estimators"),
        "delta": (float, 0.05, "failure probability"),
    },
}
POSITIVE = {"k": 0, "s": 1, "eps": 1, "dim": 1, "trials": 1, "fresh": 1, "max-queries": 0,
            "max-cover": 1, "bootstrap": 1, "t": 1, "eta": 1, "delta": 1}


class UsageError(Exception):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="junta-probe",
                                     description="Testers and learners for linear juntas.")
    parser.add_argument("--version", action="version", version=f"junta-probe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in SUBCOMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key = value config file")
        for key, (typ, default, help_) in {**COMMON, **opts}.items():
            if typ is bool:
                p.add_argument(f"--{key}", action="store_const", const=True, default=None,
                               help=help_)
            else:
                p.add_argument(f"--{key}", default=None, help=f"{help_} (default {default})")
    return parser


def read_config_file(path) -> Dict[str, str]:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError("config", f"line {lineno} is not key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("_", "-")] = value
    return out


def _convert(key, typ, raw):
    if raw is None or isinstance(raw, typ):
        return raw
    try:
        if typ is bool:
            return str(raw).lower() in ("1", "true", "yes", "on")
        if typ is int:
            return int(float(raw)) if "e" in str(raw).lower() else int(raw)
        return typ(raw)
    except ValueError:
        raise UsageError(key, f"cannot read {raw!r} as {typ.__name__}") from None


def resolve_config(args: argparse.Namespace, environ=None) -> Dict[str, Any]:
    """Merge flags > environment > config file > defaults, then validate."""
    environ = os.environ if environ is None else environ
    table = {**COMMON, **SUBCOMMANDS[args.command]}
    from_file = read_config_file(args.config) if args.config else {}
    unknown = set(from_file) - set(table)
    if unknown:
        raise UsageError(sorted(unknown)[0], "unknown key in config file")
    cfg = {"command": args.command}
    for key, (typ, default, _) in table.items():
        value = getattr(args, key.replace("-", "_"))
        if value is None:
            value = environ.get("JUNTA_PROBE_" + key.upper().replace("-", "_"))
        if value is None:
            value = from_file.get(key)
        cfg[key] = default if value is None else _convert(key, typ, value)
    for key, strict in POSITIVE.items():
        v = cfg.get(key)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            if not math.isfinite(v) or v < 0 or (strict and v == 0):
                raise UsageError(key, "must be positive")
    if "eps" in cfg and not cfg["eps"] < 1:
        raise UsageError("eps", "must be below 1")
    if "preset" in cfg and cfg["preset"] not in ("practical", "paper"):
        raise UsageError("preset", "must be 'practical' or 'paper'")
    return cfg


# ---------------------------------------------------------------------------
# functions


def generate_function(name: str, dim: int, sampler: GaussianSampler, theta=0.0):
    """Built-in generators: halfspace, constant, parity3, intersection2, rotated-sign."""
    if name == "halfspace":
        u = np.zeros(dim)
        u[0] = 1.0
        return Halfspace(u, theta)
    if name == "constant":
        return Constant(1.0, dim)
    if name == "parity3":
        return SignLiftedJunta(parity_table(3), [0, 1, 2], dim)
    if name == "and2":
        return SignLiftedJunta(and_table(2), [0, 1], dim)
    if name == "intersection2":
        return random_halfspace_intersection(2, dim, sampler)
    if name == "rotated-sign":
        e1 = np.zeros(1)
        e1[0] = 1.0
        return RotatedJunta(Halfspace(e1, 0.0), sampler.orthonormal_rows(1, dim))
    raise UsageError("function", f"unknown generator {name!r}")


def load_function(spec: Optional[str], dim: int, sampler: GaussianSampler, theta=0.0):
    if not spec:
        raise UsageError("function", "a function is required")
    if spec.startswith("gen:"):
        return generate_function(spec[4:], dim, sampler, theta)
    try:
        text = spec if spec.lstrip().startswith("{") else open(spec).read()
        return zoo_from_dict(json.loads(text))
    except (OSError, json.JSONDecodeError, KeyError, InvalidArgument) as exc:
        raise UsageError("function", str(exc)) from None


# ---------------------------------------------------------------------------
# reports


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def make_report(cfg, status, payload, queries, timings) -> dict:
    return _jsonable({"config": {k: v for k, v in cfg.items()}, "status": status,
                      "payload": payload, "queries": queries, "timings": timings,
                      "seed": cfg.get("seed"), "version": __version__,
                      "backend": kernels.BACKEND})


def serialize_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True)


def parse_report(line: str) -> dict:
    return json.loads(line)


def payload_bytes(report: dict) -> bytes:
    """Canonical bytes of the reproducible part of a report."""
    return json.dumps(report["payload"], sort_keys=True).encode()


def write_report(report, path):
    line = serialize_report(report) + "\n"
    if path:
        with open(path, "a") as fh:
            fh.write(line)
    else:
        sys.stdout.write(line)


# ---------------------------------------------------------------------------
# subcommands. Each returns (payload, stage timings); oracle queries go
# through ``ledger``.


def _setup(cfg, ledger):
    master = GaussianSampler(cfg["seed"])
    fn_sampler = master.child()
    algo_sampler = master.child()
    fn = load_function(cfg.get("function"), cfg["dim"], fn_sampler, cfg.get("theta", 0.0))
    if getattr(fn, "dim", cfg["dim"]) != cfg["dim"]:
        raise UsageError("dim", f"function has dimension {fn.dim}, --dim says {cfg['dim']}")
    return FunctionOracle(fn, cfg["dim"], ledger), algo_sampler, fn


def cmd_test(cfg, ledger, timings):
    from .junta import RankTestParams, test_linear_junta, test_rank
    f, sampler, fn = _setup(cfg, ledger)
    params = RankTestParams.derive(cfg["k"], cfg["s"], cfg["eps"], cfg["preset"])
    t0 = time.perf_counter()
    if cfg["skip-gate"]:
        verdict = test_rank(f, params, sampler)
        result = {"verdict": "yes" if verdict.answer else "no", "rank": verdict.to_dict(),
                  "gate": None}
    else:
        verdict = test_linear_junta(f, cfg["k"], cfg["s"], cfg["eps"], sampler,
                                    preset=cfg["preset"], rank_params=params)
        result = verdict.to_dict()
        result["verdict"] = result.pop("answer")
    timings["test"] = time.perf_counter() - t0
    rank = result.get("rank") or {}
    result.update({"function": fn.to_dict(), "preset": cfg["preset"],
                   "sigma_values": rank.get("singular_values"),
                   "threshold": params.threshold, "derivations": params.to_dict()})
    return result


def _family(spec):
    from .hypotheses import parse_family
    return None if spec == "cover" else parse_family(spec)


def cmd_learn(cfg, ledger, timings):
    from .learner import LearnerParams, evaluate_learned, find_invariant_structure
    f, sampler, fn = _setup(cfg, ledger)
    params = LearnerParams.derive(cfg["k"], cfg["s"], cfg["eps"], cfg["preset"])
    t0 = time.perf_counter()
    learned = find_invariant_structure(f, cfg["k"], cfg["s"], cfg["eps"], sampler.child(),
                                       hypotheses=_family(cfg["hypotheses"]),
                                       params=params, cover_cap=cfg["max-cover"])
    timings["learn"] = time.perf_counter() - t0
    learn_queries = ledger.total_queries
    t0 = time.perf_counter()
    fresh = sampler.child()
    X = fresh.normal((cfg["fresh"], cfg["dim"]))
    truth = fn(X)  # direct evaluation: the agreement check is not part of the algorithm
    pred = evaluate_learned(learned, f, X, fresh)
    timings["fresh"] = time.perf_counter() - t0
    b = learned.bundle
    return {"function": fn.to_dict(), "preset": cfg["preset"],
            "anchors": b.anchors.tolist(), "alpha": None if b.alpha is None else b.alpha.tolist(),
            "ell": b.ell, "g": learned.g.describe(), "O_g": learned.score,
            "fresh_l1_error": float(np.mean(np.abs(truth - pred))),
            "fresh_agreement": float(np.mean(np.sign(pred) == truth)),
            "learning_queries": learn_queries, "derivations": params.to_dict(),
            "J": learned.J, "n_hypotheses": learned.n_hypotheses}


def cmd_structure_test(cfg, ledger, timings):
    from .hypotheses import ThresholdClassChecker, parse_family
    from .learner import test_structure_class
    if cfg["class"] != "thresholds":
        raise UsageError("class", "only 'thresholds' is available")
    f, sampler, fn = _setup(cfg, ledger)
    t0 = time.perf_counter()
    verdict = test_structure_class(f, ThresholdClassChecker(), cfg["k"], cfg["s"], cfg["eps"],
                                   sampler, hypotheses=parse_family(cfg["hypotheses"]),
                                   preset=cfg["preset"])
    timings["structure"] = time.perf_counter() - t0
    out = verdict.to_dict()
    out["verdict"] = out.pop("answer")
    out.update({"function": fn.to_dict(), "preset": cfg["preset"]})
    return out


def cmd_lowerbound(cfg, ledger, timings):
    from .lowerbound import event_a_failure_rate, estimate_tv_distance, parse_design
    try:
        s_values = [int(float(v)) for v in str(cfg["s"]).split(",") if v.strip()]
    except ValueError:
        raise UsageError("s", "expected comma-separated integers") from None
    if not s_values or min(s_values) < 1:
        raise UsageError("s", "must be positive")
    try:
        design = parse_design(cfg["design"], cfg["seed"])
    except (InvalidArgument, ValueError) as exc:
        raise UsageError("design", str(exc)) from None
    rows = []
    for s in s_values:
        t0 = time.perf_counter()
        tv = estimate_tv_distance(design, s, cfg["trials"], cfg["seed"], cfg["bootstrap"])
        fail = event_a_failure_rate(design, s, cfg["trials"], cfg["seed"])
        timings[f"s={s}"] = time.perf_counter() - t0
        rows.append({"s": s, "n": design.n, "tv": tv.tv, "tv_ci": tv.half_width,
                     "eventA_fail_rate": fail, "tv_raw": tv.tv_raw,
                     "tv_debiased": tv.tv_debiased})
    return {"design": design.name, "points": design.points.tolist(), "rows": rows}


def _bench_rows(cfg, f, sampler, fn):
    from . import closedform as cf
    from .hermite import (EstimatorConfig, estimate_degree1_eval, estimate_grad_inner,
                          estimate_mean, estimate_noise_sensitivity, estimate_pt)
    t, eta, eps, delta, n = cfg["t"], cfg["eta"], cfg["eps"], cfg["delta"], cfg["dim"]
    y1 = np.zeros(n)
    y1[0] = 0.5
    y2 = np.zeros(n)
    y2[0], y2[1] = 1.0, -0.5
    x = np.zeros(n)
    x[0] = 1.0
    if isinstance(fn, Halfspace):
        u, th = fn.u, fn.theta
        targets = {"mean": cf.halfspace_mean(th), "pt": cf.halfspace_pt(u, th, t, y1),
                   "degree1_eval": cf.halfspace_degree1_eval(u, th, eta, x),
                   "grad_inner_diag": cf.halfspace_grad_inner(u, th, t, y1, y1),
                   "grad_inner": cf.halfspace_grad_inner(u, th, t, y1, y2),
                   "noise_sensitivity": cf.halfspace_noise_sensitivity(th, t)}
    elif isinstance(fn, Constant):
        targets = {"mean": fn.c, "pt": fn.c, "degree1_eval": 0.0, "grad_inner_diag": 0.0,
                   "grad_inner": 0.0, "noise_sensitivity": 0.0}
    else:
        raise UsageError("function", "bench-estimators needs a halfspace or a constant")
    base = EstimatorConfig(epsilon=eps, delta=delta, t=t)
    # the J-estimator's width grows like 1/(rho^2 D), and the degree-1 one like
    # 1/eta; Hoeffding sizing is far too conservative for both, so fix the batch
    gram_cfg = EstimatorConfig(epsilon=0.1, delta=delta, t=t, batch=20000, blocks=15)
    runs = {
        "mean": lambda: estimate_mean(f, base, sampler.child()),
        "pt": lambda: estimate_pt(f, t, y1, base, sampler.child()),
        "degree1_eval": lambda: estimate_degree1_eval(f, eta, x, gram_cfg, sampler.child()),
        "grad_inner_diag": lambda: estimate_grad_inner(f, t, y1, y1, gram_cfg, sampler.child()),
        "grad_inner": lambda: estimate_grad_inner(f, t, y1, y2, gram_cfg, sampler.child()),
        "noise_sensitivity": lambda: estimate_noise_sensitivity(f, t, base, sampler.child()),
    }
    rows = []
    for name, run in runs.items():
        est = run()
        rows.append({"quantity": name, "target": targets[name], "estimate": est.value,
                     "error": abs(est.value - targets[name]), "samples": est.samples_used,
                     "queries": est.queries})
    return rows


def cmd_bench_estimators(cfg, ledger, timings):
    f, sampler, fn = _setup(cfg, ledger)
    t0 = time.perf_counter()
    rows = _bench_rows(cfg, f, sampler, fn)
    timings["bench"] = time.perf_counter() - t0
    return {"function": fn.to_dict(), "rows": rows}


COMMANDS = {"test": cmd_test, "learn": cmd_learn, "structure-test": cmd_structure_test,
            "lowerbound": cmd_lowerbound, "bench-estimators": cmd_bench_estimators}


def write_lowerbound_csv(payload, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "n", "tv", "tv_ci", "eventA_fail_rate"])
        for r in payload["rows"]:
            w.writerow([r["s"], r["n"], repr(r["tv"]), repr(r["tv_ci"]),
                        repr(r["eventA_fail_rate"])])


def run(cfg) -> tuple:
    """Execute a resolved config; returns (report, exit code)."""
    ledger = QueryLedger(max_queries=cfg.get("max-queries"))
    timings: Dict[str, float] = {}
    start = time.perf_counter()
    try:
        payload = COMMANDS[cfg["command"]](cfg, ledger, timings)
        status, code = "ok", EXIT_OK
    except BudgetExceeded as exc:
        payload = {"error": "budget_exceeded", "limit": exc.limit, "attempted": exc.attempted,
                   "partial": {"queries": ledger.total_queries}}
        status, code = "budget_exceeded", EXIT_BUDGET
    except CoverTooLarge as exc:
        payload = {"error": "cover_too_large", "message": str(exc)}
        status, code = "error", EXIT_ERROR
    except JuntaProbeError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        status, code = "error", EXIT_ERROR
    timings["total"] = time.perf_counter() - start
    report = make_report(cfg, status, payload, {"total": ledger.total_queries}, timings)
    return report, code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        report, code = run(cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"junta-probe: error: {exc}\n")
        return EXIT_USAGE
    if cfg["command"] == "lowerbound":
        if cfg["out"] and code == EXIT_OK:
            write_lowerbound_csv(report["payload"], cfg["out"])
        if cfg["report"] or not cfg["out"]:
            write_report(report, cfg["report"])
    else:
        write_report(report, cfg["out"])
    if code == EXIT_BUDGET:
        sys.stderr.write("junta-probe: query budget exceeded\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
