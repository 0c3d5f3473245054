"""Command-line interface: channel files, experiment runs and report emission.

Exit codes: 0 on success, 2 when an optimizer stopped before meeting its
tolerance, 1 on errors (including bad arguments).
"""
import argparse
import inspect
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import jsonschema
import numpy as np

from . import __version__
from . import channels as C
from .capacity import OptimizerConfig, blahut_arimoto, ea_capacity, holevo_capacity, restricted_capacity
from .exceptions import FileNotFound, InvalidChannel, InvalidParameter, QcapError, SchemaError
from .linalg import schatten_norm
from .psumming import (DEFAULT_Q_GRID, capacity_upper_from_norm, channel_norm_1p_d, check_covariance,
                       classical_adjoint, classical_psumming_norm, covariant_psumming, nonadditivity_demo,
                       sandwich)
from .report import dumps, format_float

EXIT_OK, EXIT_ERROR, EXIT_SOFT = 0, 1, 2
SEED_ENV = "QCAP_SEED"
# constructors whose parameters are all scalars, so they can be built from flags
NAMED_KINDS = ["amplitude_damping", "bsc", "classical_identity", "depolarizing", "identity"]

_MATRIX = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1, "items": {"type": "number"}}}

CHANNEL_SCHEMA = {
    "type": "object",
    "required": ["kind", "dim_in", "dim_out"],
    "properties": {
        "kind": {"enum": ["kraus", "classical"]},
        "dim_in": {"type": "integer", "minimum": 1},
        "dim_out": {"type": "integer", "minimum": 1},
        "label": {"type": "string"},
        "kraus": {"type": "array", "minItems": 1,
                  "items": {"type": "object", "required": ["re"], "additionalProperties": False,
                            "properties": {"re": _MATRIX, "im": _MATRIX}}},
        "matrix": _MATRIX,
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "kraus"}}}, "then": {"required": ["kraus"]}},
        {"if": {"properties": {"kind": {"const": "classical"}}}, "then": {"required": ["matrix"]}},
    ],
}


# ---------------------------------------------------------------------------
# channel files

def _as_array(rows, what):
    try:
        return np.array(rows, dtype=float)
    except ValueError:
        raise SchemaError(f"{what} is ragged") from None


def _detect_weyl_symmetry(ch, tol=1e-9):
    """Attach the Heisenberg-Weyl group when N commutes with the shift and clock unitaries."""
    n = ch.dim_in
    if n != ch.dim_out or n < 2:
        return ch
    W = C.heisenberg_weyl(n)
    X, Z = W[1], W[n]  # generators of the group
    if check_covariance(ch, [(X, X), (Z, Z)])["intertwining"] is not True:
        return ch
    return C.QuantumChannel(ch.kraus, ch.label, symmetry=[(w, w) for w in W])


def channel_from_dict(doc):
    """Build and validate a channel from a decoded JSON document."""
    try:
        jsonschema.validate(doc, CHANNEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"channel file does not match schema at {path}: {exc.message}") from None
    n, m, label = doc["dim_in"], doc["dim_out"], doc.get("label", "")
    if doc["kind"] == "classical":
        M = _as_array(doc["matrix"], "matrix")
        if M.shape != (m, n):
            raise SchemaError(f"matrix has shape {M.shape}, expected ({m}, {n}) from dim_out x dim_in")
        ch = C.ClassicalChannel(M, label)
    else:
        mats = []
        for i, op in enumerate(doc["kraus"]):
            re = _as_array(op["re"], f"kraus[{i}].re")
            im = _as_array(op["im"], f"kraus[{i}].im") if "im" in op else np.zeros_like(re)
            if re.shape != (m, n) or im.shape != (m, n):
                raise SchemaError(f"kraus[{i}] has shape {re.shape}/{im.shape}, expected ({m}, {n})")
            mats.append(re + 1j * im)
        ch = C.QuantumChannel(np.array(mats), label)
    rep = C.validate(ch)
    if not rep.valid:
        raise InvalidChannel(f"channel {label!r} failed validation: {rep.as_dict()}", rep.as_dict())
    if isinstance(ch, C.QuantumChannel):
        ch = _detect_weyl_symmetry(ch)
    return ch


def parse_channel_file(path):
    """Read a channel JSON file; raises FileNotFound, SchemaError or InvalidChannel."""
    if not os.path.isfile(path):
        raise FileNotFound(f"channel file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path} is not valid JSON: {exc}") from None
    return channel_from_dict(doc)


def channel_to_dict(ch):
    if isinstance(ch, C.ClassicalChannel):
        return {"kind": "classical", "dim_in": ch.dim_in, "dim_out": ch.dim_out, "label": ch.label,
                "matrix": ch.matrix.tolist()}
    return {"kind": "kraus", "dim_in": ch.dim_in, "dim_out": ch.dim_out, "label": ch.label,
            "kraus": [{"re": K.real.tolist(), "im": K.imag.tolist()} for K in ch.kraus]}


def write_channel_file(ch, path):
    """Write ch as JSON with full float precision, so parsing it back reproduces ch."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_dict(ch), fh, indent=1)
        fh.write("\n")


def named_channel(kind, **params):
    """construct() with only the parameters the chosen factory accepts; None values are dropped."""
    factory = C._KINDS.get(kind)
    if factory is None:
        return C.construct(kind)  # raises with the list of kinds
    accepted = inspect.signature(factory).parameters
    kw = {k: v for k, v in params.items() if v is not None and k in accepted}
    return C.construct(kind, **kw)


# ---------------------------------------------------------------------------
# configuration and reports

@dataclass
class ExperimentConfig:
    command: str
    kind: Optional[str] = None
    channel: Optional[str] = None
    named: Optional[str] = None
    params: dict = field(default_factory=dict)
    d: int = 1
    q_grid: List[float] = field(default_factory=lambda: list(DEFAULT_Q_GRID))
    p: Optional[float] = None
    q: Optional[float] = None
    n: Optional[int] = None
    matrix: Optional[str] = None
    seed: int = 0
    restarts: int = 8
    max_iters: int = 1000
    rel_tol: float = 1e-10
    ensemble_cap: Optional[int] = None
    n_jobs: int = 1
    output: Optional[str] = None
    format: str = "json"
    timing: bool = False

    def optimizer(self):
        return OptimizerConfig(restarts=self.restarts, max_iters=self.max_iters, rel_tol=self.rel_tol,
                               rng_seed=self.seed, ensemble_cap=self.ensemble_cap, n_jobs=self.n_jobs)

    def echo(self):
        out = asdict(self)
        for key in ("output", "timing", "n_jobs"):
            out.pop(key)
        return {k: v for k, v in out.items() if v is not None and v != {}}


@dataclass
class Report:
    command: dict
    results: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    curve: object = None  # NormCurve, emitted as CSV in csv format
    exit_code: int = EXIT_OK

    def as_dict(self):
        out = {"command": self.command, "provenance": self.provenance, "warnings": self.warnings}
        if self.results:
            out["results"] = self.results
        return out


def _provenance(cfg, seed_source):
    return {"version": __version__, "seed": cfg.seed, "seed_source": seed_source, "restarts": cfg.restarts,
            "max_iters": cfg.max_iters, "rel_tol": cfg.rel_tol, "ensemble_cap": cfg.ensemble_cap,
            "tp_tol": C.TP_TOL, "cp_tol": C.CP_TOL}


def load_channel(cfg):
    if cfg.channel and cfg.named:
        raise InvalidParameter("give either --channel or --named, not both")
    if cfg.channel:
        return parse_channel_file(cfg.channel)
    if cfg.named:
        return named_channel(cfg.named, **cfg.params)
    raise InvalidParameter(f"command {cfg.command!r} needs a channel (--channel FILE or --named KIND)")


def _load_matrix(path):
    if not os.path.isfile(path):
        raise FileNotFound(f"matrix file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        re = _as_array(doc.get("re"), "re")
        im = _as_array(doc["im"], "im") if "im" in doc else 0.0
        return re + 1j * im
    return _as_array(doc, "matrix")


def _capacity_result(res, r):
    r.results.update(res.summary())
    if not res.converged:
        r.warnings.append(f"optimizer stopped after {res.iterations} iterations without meeting rel_tol")
        r.exit_code = EXIT_SOFT


def _run_validate(cfg, r):
    try:
        ch = load_channel(cfg)
    except InvalidChannel as exc:
        r.results = {"valid": False, "residuals": exc.residuals}
        r.warnings.append(str(exc))
        r.exit_code = EXIT_ERROR
        return
    r.results = {"label": ch.label, "dim_in": ch.dim_in, "dim_out": ch.dim_out, **C.validate(ch).as_dict()}
    if isinstance(ch, C.QuantumChannel):
        r.results["n_kraus"] = ch.n_kraus
        r.results["covariant"] = ch.symmetry is not None


def _run_capacity(cfg, r):
    ch = load_channel(cfg)
    opt = cfg.optimizer()
    kind = cfg.kind
    if kind == "classical":
        if not isinstance(ch, C.ClassicalChannel) and getattr(ch, "classical", None) is None:
            raise InvalidParameter("--kind classical needs a classical channel")
        res = blahut_arimoto(ch, opt)
    elif kind == "holevo":
        res = holevo_capacity(ch, opt)
    elif kind == "ea":
        res = ea_capacity(ch, opt)
    else:
        res = restricted_capacity(ch, cfg.d, opt)
    _capacity_result(res, r)


def _require(value, flag):
    if value is None:
        raise InvalidParameter(f"{flag} is required for this command")
    return value


def _run_norm(cfg, r):
    kind = cfg.kind
    if kind == "schatten":
        p = _require(cfg.p, "--p")
        if cfg.matrix:
            A, source = _load_matrix(cfg.matrix), "matrix"
        else:
            A, source = C.choi(C.as_quantum(load_channel(cfg))), "choi"
        r.results = {"value": schatten_norm(A, p), "p": p, "source": source}
        return
    ch = load_channel(cfg)
    opt = cfg.optimizer()
    if kind == "one-to-p":
        est = channel_norm_1p_d(C.as_quantum(ch), _require(cfg.p, "--p"), cfg.d, opt)
    elif kind == "psumming-classical":
        est = classical_psumming_norm(classical_adjoint(ch), _require(cfg.q, "--q"))
    else:
        est = covariant_psumming(ch, _require(cfg.q, "--q"), cfg.d, opt)
    diag = {k: v for k, v in est.diagnostics.items() if k not in ("psi", "restart_values")}
    r.results = {"value": est.value, "method": est.method, "certified": est.certified, **diag}
    if not est.certified:
        r.warnings.append("norm value is a lower estimate from a pure-state search, not certified")


def _curve_dict(curve):
    return {"label": curve.label, "d": curve.d, "method": curve.method, "certified": curve.certified,
            "monotone": curve.is_monotone(), "upper": curve.upper,
            "samples": [asdict(s) for s in curve.samples]}


def _run_curve(cfg, r):
    ch = load_channel(cfg)
    curve, _ = capacity_upper_from_norm(ch, cfg.d, cfg.q_grid, cfg.optimizer())
    r.curve = curve
    r.results = {"curve": _curve_dict(curve)}
    if not curve.certified:
        r.warnings.append("curve values rest on a pure-state search and are not certified upper bounds")


def _run_sandwich(cfg, r):
    ch = load_channel(cfg)
    sw = sandwich(ch, cfg.d, cfg.optimizer(), cfg.q_grid)
    r.curve = sw.curve
    r.results = {"lower": sw.lower.summary(), "upper": sw.upper, "gap": sw.gap, "q_grid": list(sw.q_grid),
                 "curve": _curve_dict(sw.curve)}
    if sw.warning:
        r.warnings.append("upper bound is not certified")
    if sw.gap < 0:
        r.warnings.append(f"upper bound lies below the lower bound by {-sw.gap:.3e}")
    if not sw.lower.converged:
        r.warnings.append("lower-bound optimizer stopped without meeting rel_tol")
        r.exit_code = EXIT_SOFT


def _run_demo(cfg, r):
    out = nonadditivity_demo(_require(cfg.n, "--n"), cfg.optimizer(), cfg.q_grid)
    r.warnings.extend(out.pop("warnings"))
    r.results = out


def _run_selftest(cfg, r):
    from .selftest import run_all
    checks = [c.as_dict() for c in run_all(cfg.seed)]
    if not cfg.timing:
        for c in checks:
            c.pop("seconds")
    r.results = {"checks": checks, "passed": all(c["passed"] for c in checks)}
    if not r.results["passed"]:
        r.exit_code = EXIT_ERROR
        r.warnings.extend(f"check {c['name']} failed" for c in checks if not c["passed"])


def _run_export(cfg, r):
    ch = load_channel(cfg)
    if cfg.output is None:
        raise InvalidParameter("export needs --output")
    write_channel_file(ch, cfg.output)
    r.results = {"written": cfg.output, "label": ch.label}


_COMMANDS = {"validate": _run_validate, "capacity": _run_capacity, "norm": _run_norm, "curve": _run_curve,
             "sandwich": _run_sandwich, "demo": _run_demo, "selftest": _run_selftest, "export": _run_export}


def run(cfg):
    """Execute one command and return its Report (exceptions propagate)."""
    seed_source = "flag"
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            cfg.seed = int(env)
        except ValueError:
            raise InvalidParameter(f"{SEED_ENV} must be an integer, got {env!r}") from None
        seed_source = SEED_ENV
    t0 = time.perf_counter()
    r = Report(cfg.echo())
    _COMMANDS[cfg.command](cfg, r)
    r.command = cfg.echo()
    r.provenance = _provenance(cfg, seed_source)
    if cfg.timing:
        r.provenance["wall_time_s"] = time.perf_counter() - t0
    return r


def _csv_rows(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _csv_rows(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _csv_rows(v, f"{prefix}[{i}]")
    elif isinstance(obj, bool):
        yield prefix, "true" if obj else "false"
    elif isinstance(obj, (float, np.floating)):
        yield prefix, format_float(obj)
    elif obj is not None:
        yield prefix, str(obj)


def emit_report(r, fmt="json", sink=None):
    """Write a report as JSON, or as CSV (the curve when there is one, else key,value rows)."""
    sink = sys.stdout if sink is None else sink
    if fmt == "csv":
        if r.curve is not None:
            sink.write(r.curve.to_csv())
            return
        from .report import to_jsonable
        rows = ["key,value"] + [f"{k},{v}" for k, v in _csv_rows(to_jsonable(r.results))]
        sink.write("\n".join(rows) + "\n")
        return
    sink.write(dumps(r.as_dict()))


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _qgrid(values):
    out = []
    for v in values:
        out.extend(float(x) for x in v.split(",") if x.strip())
    return out


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("run options")
    g.add_argument("--seed", type=int, default=0, help=f"random seed (the {SEED_ENV} variable overrides it)")
    g.add_argument("--restarts", type=int, default=8)
    g.add_argument("--max-iters", type=int, default=1000)
    g.add_argument("--rel-tol", type=float, default=1e-10)
    g.add_argument("--ensemble-cap", type=int, default=None)
    g.add_argument("--n-jobs", type=int, default=1)
    g.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    g.add_argument("--format", choices=["json", "csv"], default="json")
    g.add_argument("--timing", action="store_true", help="add wall time to the provenance block")

    source = _Parser(add_help=False)
    s = source.add_argument_group("channel source")
    s.add_argument("--channel", help="channel JSON file")
    s.add_argument("--named", choices=NAMED_KINDS, help="named channel constructor")
    s.add_argument("--n", type=int, help="dimension for named channels")
    s.add_argument("--lam", type=float, help="depolarizing parameter")
    s.add_argument("--eps", type=float, help="bit-flip probability")
    s.add_argument("--gamma", type=float, help="damping probability")

    grid = _Parser(add_help=False)
    grid.add_argument("--qgrid", nargs="+", default=None, help="q values, space or comma separated")

    parser = _Parser(prog="qcap", description="Capacities and summing norms of quantum and classical channels.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[common, source], help="check a channel is CPTP / stochastic")
    p = sub.add_parser("capacity", parents=[common, source], help="capacity lower bound from an optimizer")
    p.add_argument("--kind", choices=["classical", "holevo", "ea", "restricted"], required=True)
    p.add_argument("--d", type=int, default=1)
    p = sub.add_parser("norm", parents=[common, source], help="a single norm value")
    p.add_argument("--kind", choices=["schatten", "one-to-p", "psumming-classical", "psumming-covariant"],
                   required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--matrix", help="JSON matrix file for --kind schatten (default: the channel's Choi matrix)")
    p = sub.add_parser("curve", parents=[common, source, grid], help="f(q) = q ln pi_q on a q grid")
    p.add_argument("--d", type=int, default=1)
    p = sub.add_parser("sandwich", parents=[common, source, grid], help="lower and upper capacity bounds")
    p.add_argument("--d", type=int, default=1)
    p = sub.add_parser("demo", parents=[common, grid], help="worked examples")
    p.add_argument("name", choices=["nonadditivity"])
    p.add_argument("--n", type=int, default=16)
    sub.add_parser("selftest", parents=[common], help="run the bundled property suites")
    sub.add_parser("export", parents=[common, source], help="write a named channel to a JSON file")
    return parser


def config_from_args(ns):
    params = {k: getattr(ns, k, None) for k in ("n", "lam", "eps", "gamma")}
    cfg = ExperimentConfig(
        command=ns.command, kind=getattr(ns, "kind", None), channel=getattr(ns, "channel", None),
        named=getattr(ns, "named", None), d=getattr(ns, "d", 1), p=getattr(ns, "p", None),
        q=getattr(ns, "q", None), matrix=getattr(ns, "matrix", None), seed=ns.seed, restarts=ns.restarts,
        max_iters=ns.max_iters, rel_tol=ns.rel_tol, ensemble_cap=ns.ensemble_cap, n_jobs=ns.n_jobs,
        output=ns.output, format=ns.format, timing=ns.timing)
    if ns.command == "demo":
        cfg.n = ns.n
    else:
        cfg.params = {k: v for k, v in params.items() if v is not None}
    if getattr(ns, "qgrid", None):
        cfg.q_grid = _qgrid(ns.qgrid)
    if cfg.d < 1:
        raise InvalidParameter("--d must be at least 1")
    return cfg


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        report = run(cfg)
    except QcapError as exc:
        print(f"qcap: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"qcap: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.output and cfg.command != "export":
        with open(cfg.output, "w", encoding="utf-8") as fh:
            emit_report(report, cfg.format, fh)
    else:
        emit_report(report, cfg.format)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
