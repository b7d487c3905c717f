"""Command-line interface: ``forward``, ``spectrum``, ``inverse`` and ``roundtrip``.

Exit codes: 0 success, 1 usage or schema error, 2 regime error,
3 convergence error, 4 reconstruction error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, KNdSError, ReconstructionError, RegimeError, TailModelError
from .geometry import MetricProfile, curvature_extrema
from .inverse import reconstruct
from .reports import (
    SCHEMA_VERSION,
    SchemaError,
    dumps,
    spectrum_csv,
    traces_from_doc,
    traces_to_doc,
)
from .spacetime import SpacetimeParams, validate_regime
from .spectrum import DEFAULT_GRID, default_trace_count, spectra_over_k, spectral_traces
from .traces import TraceSet, forward_traces, gamma0_closed, gamma0_integral, gammak_closed, horizon_geometries

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_CONVERGENCE, EXIT_RECONSTRUCTION = 0, 1, 2, 3, 4

#: parameter box for randomized round-trip batches
DRAW_BOX = {"spin": (0.02, 0.5), "charge": (0.0, 0.4), "cosmological_constant": (0.005, 0.1)}


@dataclass
class JobConfig:
    command: str
    params: SpacetimeParams | None = None
    traces: TraceSet | None = None
    ks: list = field(default_factory=lambda: [1, 2, 3])
    grid_size: int = DEFAULT_GRID
    count: int | None = None
    profile: str = "horizon"
    horizon: str = "event"
    xi: float | None = None
    beta_sq: float | None = None
    output_format: str = "json"
    output: str | None = None
    seed: int | None = None
    draws: int = 0
    use_numerical_traces: bool = False
    workers: int | None = None


class JobFailed(Exception):
    """Carries a partial report and the exit code to finish with."""

    def __init__(self, report, code):
        super().__init__(report.get("error", {}).get("message", ""))
        self.report = report
        self.code = code


def _error_doc(exc, stage=None):
    doc = {"type": type(exc).__name__, "message": str(exc)}
    stage = stage or getattr(exc, "stage", None)
    if stage:
        doc["stage"] = stage
    return doc


def params_doc(p: SpacetimeParams) -> dict:
    return {
        "mass": p.mass,
        "spin": p.spin,
        "charge": p.charge,
        "cosmological_constant": p.cosmological_constant,
        "chi": p.chi,
        "xi": p.xi,
    }


def _result_doc(res) -> dict:
    return {
        "mass": res.mass,
        "spin": res.spin,
        "spin_sq": res.spin_sq,
        "charge": res.charge,
        "charge_sq": res.charge_sq,
        "cosmological_constant": res.cosmological_constant,
        "xi": res.xi,
        "r_event": res.r_event,
        "r_cosmo": res.r_cosmo,
    }


def run_forward(config: JobConfig) -> dict:
    p = config.params
    report = validate_regime(p)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "forward",
        "params": params_doc(p),
        "regime": report.as_dict(),
        "flags": list(report.flags),
    }
    if not report.physical:
        doc["error"] = {"type": "RegimeError", "message": report.message}
        raise JobFailed(doc, EXIT_REGIME)

    hs = report.horizons
    doc["horizons"] = {
        "negative_root": hs.negative_root,
        "cauchy": hs.cauchy,
        "event": hs.event,
        "cosmological": hs.cosmological,
        "residuals": hs.residuals,
        "complex_roots": [[z.real, z.imag] for z in hs.complex_roots],
    }
    geoms = dict(zip(("event", "cosmo"), horizon_geometries(p)))
    doc["geometry"] = {}
    for side, g in geoms.items():
        kmin, kmax = curvature_extrema(g)
        doc["geometry"][side] = {
            "radius": g.radius,
            "eta": g.eta,
            "beta": g.beta,
            "xi": g.xi,
            "area": g.area,
            "curvature_min": kmin,
            "curvature_max": kmax,
        }
    ks = [k for k in config.ks if k != 0] or [1]
    traces = forward_traces(p, k_max=max(abs(k) for k in ks))
    doc["traces"] = traces_to_doc(traces)
    doc["flags"].extend(n for n in traces.notes if n not in doc["flags"])
    return doc


def _spectrum_profile(config: JobConfig):
    if config.profile == "round":
        return "round", MetricProfile.round(), 1.0, None
    if config.profile == "explicit":
        if config.xi is None or config.beta_sq is None:
            raise SchemaError("--profile explicit needs --xi and --beta-sq")
        return "explicit", MetricProfile(config.xi, config.beta_sq), 1.0, None
    if config.params is None:
        raise SchemaError("--profile horizon needs --mass --spin --charge --lambda")
    event, cosmo = horizon_geometries(config.params)
    geom = event if config.horizon == "event" else cosmo
    return f"{config.horizon} horizon", geom.profile, geom.homothety, geom


def run_spectrum(config: JobConfig) -> dict:
    source, profile, homothety, geom = _spectrum_profile(config)
    count = config.count if config.count is not None else default_trace_count(config.grid_size)
    results = spectra_over_k(profile, config.ks, count, config.grid_size, homothety, config.workers)

    modes = []
    for k in config.ks:
        table, tr = results[k]
        if geom is not None:
            closed = gamma0_closed(geom) if k == 0 else gammak_closed(geom, k)
        else:
            closed = gamma0_integral(profile) if k == 0 else 1.0 / abs(k)
        mode = {
            "k": k,
            "eigenvalues": table.values,
            "errors": table.errors,
            "trace_partial": tr.trace_partial if tr else None,
            "trace_tail_estimate": tr.trace_tail_estimate if tr else None,
            "trace_total": tr.trace_total if tr else None,
            "error_bound": tr.error_bound if tr else None,
            "closed_form": closed,
            "relative_difference": abs(tr.trace_total - closed) / closed if tr else None,
        }
        modes.append(mode)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "spectrum",
        "profile": {"source": source, "xi": profile.xi, "beta_sq": profile.beta_sq, "homothety": homothety},
        "grid_size": config.grid_size,
        "count": count,
        "modes": modes,
    }


def run_inverse(config: JobConfig) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "inverse",
        "input": traces_to_doc(config.traces),
    }
    try:
        res = reconstruct(config.traces)
    except ReconstructionError as exc:
        doc["error"] = _error_doc(exc)
        raise JobFailed(doc, EXIT_RECONSTRUCTION) from exc
    doc["result"] = _result_doc(res)
    doc["diagnostics"] = res.diagnostics
    return doc


def _relative_errors(p: SpacetimeParams, res) -> dict:
    def rel(recovered, true):
        if true == 0:
            return abs(recovered)
        return abs(recovered - true) / abs(true)

    return {
        "mass": rel(res.mass, p.mass),
        "spin": rel(res.spin, p.spin),
        "charge": rel(res.charge, p.charge) if res.charge_sq >= 0 else math.inf,
        "cosmological_constant": rel(res.cosmological_constant, p.cosmological_constant),
    }


def _roundtrip_case(p: SpacetimeParams, config: JobConfig) -> dict:
    provenance = "numerical-spectrum" if config.use_numerical_traces else "closed-form"
    case = {"original": params_doc(p), "traces_provenance": provenance}
    if config.use_numerical_traces:
        traces, _ = spectral_traces(p, ks=(1,), grid_size=config.grid_size, count=config.count, workers=config.workers)
    else:
        traces = forward_traces(p)
    res = reconstruct(traces)
    errs = _relative_errors(p, res)
    case["recovered"] = _result_doc(res)
    case["relative_errors"] = errs
    case["max_relative_error"] = max(errs.values())
    return case


def draw_params(rng: np.random.Generator, mass: float = 1.0) -> SpacetimeParams:
    """One draw from ``DRAW_BOX``; spin, charge, Lambda are drawn in that order."""
    a = rng.uniform(*DRAW_BOX["spin"])
    q = rng.uniform(*DRAW_BOX["charge"])
    lam = rng.uniform(*DRAW_BOX["cosmological_constant"])
    return SpacetimeParams(mass, a, q, lam)


def run_roundtrip(config: JobConfig) -> dict:
    if config.draws:
        rng = np.random.default_rng(config.seed)
        candidates = [draw_params(rng) for _ in range(config.draws)]
    else:
        candidates = [config.params]

    cases, skipped = [], 0
    for p in candidates:
        report = validate_regime(p)
        if not report.physical:
            if not config.draws:
                doc = {"type": "RegimeError", "message": report.message}
                raise JobFailed({"schema_version": SCHEMA_VERSION, "command": "roundtrip", "error": doc}, EXIT_REGIME)
            log.info("skipping draw outside regime: %s (%s)", p, report.message)
            skipped += 1
            continue
        try:
            cases.append(_roundtrip_case(p, config))
        except ReconstructionError as exc:
            if not config.draws:
                raise
            provenance = "numerical-spectrum" if config.use_numerical_traces else "closed-form"
            cases.append({"original": params_doc(p), "traces_provenance": provenance, "error": _error_doc(exc)})

    errors = [c["max_relative_error"] for c in cases if "max_relative_error" in c]
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "roundtrip",
        "seed": config.seed,
        "cases": cases,
        "summary": {
            "evaluated": len(cases),
            "skipped": skipped,
            "failed": sum(1 for c in cases if "error" in c),
            "max_relative_error": max(errors) if errors else None,
        },
    }


RUNNERS = {
    "forward": run_forward,
    "spectrum": run_spectrum,
    "inverse": run_inverse,
    "roundtrip": run_roundtrip,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _finite(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return x


def _add_params(p, required=False):
    p.add_argument("--mass", type=_finite, required=required)
    p.add_argument("--spin", type=_finite, required=required)
    p.add_argument("--charge", type=_finite, required=required)
    p.add_argument("--lambda", dest="lam", type=_finite, required=required, help="cosmological constant")


def _add_output(p):
    p.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write to this path instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="knds-spectral", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fwd = sub.add_parser("forward", help="horizons, geometry and closed-form traces")
    _add_params(fwd, required=True)
    fwd.add_argument("--k", type=_int_list, default=[1, 2, 3])
    _add_output(fwd)

    spec = sub.add_parser("spectrum", help="numerical eigenvalues and traces of L_k")
    spec.add_argument("--profile", choices=("horizon", "round", "explicit"), default=None)
    _add_params(spec)
    spec.add_argument("--horizon", choices=("event", "cosmological"), default="event")
    spec.add_argument("--xi", type=_finite)
    spec.add_argument("--beta-sq", type=_finite)
    spec.add_argument("--k", type=_int_list, default=[0, 1])
    spec.add_argument("--count", type=int)
    spec.add_argument("--grid", type=int, default=DEFAULT_GRID)
    spec.add_argument("--workers", type=int)
    _add_output(spec)

    inv = sub.add_parser("inverse", help="reconstruct parameters from traces")
    inv.add_argument("--traces", help="trace file (JSON) or a forward report")
    for name in ("gamma0-event", "gamma1-event", "gamma0-cosmo", "gamma1-cosmo"):
        inv.add_argument(f"--{name}", type=_finite)
    _add_output(inv)

    rt = sub.add_parser("roundtrip", help="forward then inverse; compare parameters")
    _add_params(rt)
    rt.add_argument("--seed", type=int)
    rt.add_argument("--draws", type=int, default=0, help="random draws from the default box")
    rt.add_argument("--use-numerical-traces", action="store_true")
    rt.add_argument("--grid", type=int, default=DEFAULT_GRID)
    rt.add_argument("--count", type=int)
    rt.add_argument("--workers", type=int)
    _add_output(rt)
    return parser


def _config_from_args(args) -> JobConfig:
    cfg = JobConfig(command=args.command, output_format=args.output_format, output=args.output)
    if hasattr(args, "mass") and None not in (args.mass, args.spin, args.charge, args.lam):
        cfg.params = SpacetimeParams(args.mass, args.spin, args.charge, args.lam)
    elif hasattr(args, "mass") and any(v is not None for v in (args.mass, args.spin, args.charge, args.lam)):
        raise SchemaError("--mass, --spin, --charge and --lambda must be given together")

    if args.command == "forward":
        cfg.ks = args.k
    elif args.command == "spectrum":
        cfg.ks = args.k
        cfg.profile = args.profile or ("horizon" if cfg.params else "round")
        cfg.horizon = args.horizon
        cfg.xi, cfg.beta_sq = args.xi, args.beta_sq
        cfg.count, cfg.grid_size, cfg.workers = args.count, args.grid, args.workers
        if cfg.grid_size < 64:
            raise SchemaError(f"--grid must be at least 64, got {cfg.grid_size}")
    elif args.command == "inverse":
        inline = (args.gamma0_event, args.gamma1_event, args.gamma0_cosmo, args.gamma1_cosmo)
        if args.traces:
            try:
                with open(args.traces) as fh:
                    doc = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise SchemaError(f"cannot read trace file: {exc}") from exc
        elif None not in inline:
            doc = dict(zip(("gamma0_event", "gamma1_event", "gamma0_cosmo", "gamma1_cosmo"), inline))
            doc["schema_version"] = SCHEMA_VERSION
        else:
            raise SchemaError("inverse needs --traces FILE or all four --gamma* values")
        cfg.traces = traces_from_doc(doc)
    elif args.command == "roundtrip":
        cfg.seed, cfg.draws = args.seed, args.draws
        cfg.use_numerical_traces = args.use_numerical_traces
        cfg.grid_size, cfg.count, cfg.workers = args.grid, args.count, args.workers
        if not cfg.draws and cfg.params is None:
            raise SchemaError("roundtrip needs --mass --spin --charge --lambda, or --draws N")
    if cfg.command == "forward" and cfg.params is None:
        raise SchemaError("forward needs --mass --spin --charge --lambda")
    return cfg


def _emit(config: JobConfig, doc: dict) -> None:
    if config.output_format == "csv":
        if doc.get("command") != "spectrum" or "modes" not in doc:
            raise SchemaError("csv output is only available for the spectrum command")
        text = spectrum_csv(doc["modes"])
    else:
        text = dumps(doc)
    if config.output:
        with open(config.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        config = _config_from_args(args)
    except (SchemaError, ValueError) as exc:
        print(f"knds-spectral: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        doc = RUNNERS[config.command](config)
    except JobFailed as exc:
        sys.stdout.write(dumps(exc.report))
        stage = exc.report.get("error", {}).get("stage")
        print(f"knds-spectral: {f'stage {stage}: ' if stage else ''}{exc}", file=sys.stderr)
        return exc.code
    except RegimeError as exc:
        print(f"knds-spectral: regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ConvergenceError, TailModelError) as exc:
        print(f"knds-spectral: convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ReconstructionError as exc:
        sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "command": config.command, "error": _error_doc(exc)}))
        print(f"knds-spectral: reconstruction failed at stage {exc.stage}: {exc}", file=sys.stderr)
        return EXIT_RECONSTRUCTION
    except (SchemaError, ValueError) as exc:
        print(f"knds-spectral: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KNdSError as exc:
        print(f"knds-spectral: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        _emit(config, doc)
    except SchemaError as exc:
        print(f"knds-spectral: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
