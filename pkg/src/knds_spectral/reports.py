"""JSON/CSV serialization and the schemas of every emitted document."""

from __future__ import annotations

import csv
import io
import json
import math

import jsonschema
import numpy as np

from .errors import KNdSError
from .traces import EXTERNAL, PROVENANCES, TraceSet

SCHEMA_VERSION = "1"

_num = {"type": "number"}
_opt_num = {"type": ["number", "null"]}
_pos = {"type": "number", "exclusiveMinimum": 0}
_gammak_map = {
    "type": "object",
    "patternProperties": {"^-?[1-9][0-9]*$": _pos},
    "additionalProperties": False,
}

TRACE_FILE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "trace file",
    "type": "object",
    "required": ["schema_version", "gamma0_event", "gamma1_event", "gamma0_cosmo", "gamma1_cosmo"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "gamma0_event": _pos,
        "gamma1_event": _pos,
        "gamma0_cosmo": _pos,
        "gamma1_cosmo": _pos,
        "optional_gammak": {
            "type": "object",
            "properties": {"event": _gammak_map, "cosmo": _gammak_map},
            "additionalProperties": False,
        },
        "provenance": {"enum": list(PROVENANCES)},
    },
}

_params = {
    "type": "object",
    "required": ["mass", "spin", "charge", "cosmological_constant"],
    "properties": {k: _num for k in ("mass", "spin", "charge", "cosmological_constant", "chi", "xi")},
}
_geometry = {
    "type": "object",
    "required": ["radius", "eta", "beta", "xi", "area", "curvature_min", "curvature_max"],
    "properties": {k: _num for k in ("radius", "eta", "beta", "xi", "area", "curvature_min", "curvature_max")},
}
_error = {
    "type": "object",
    "required": ["type", "message"],
    "properties": {"type": {"type": "string"}, "message": {"type": "string"}, "stage": {"type": "string"}},
}

FORWARD_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "params", "regime", "flags"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"const": "forward"},
        "params": _params,
        "regime": {"type": "object", "required": ["checks", "flags"]},
        "horizons": {
            "type": "object",
            "required": ["event", "cosmological", "cauchy", "negative_root", "residuals", "complex_roots"],
            "properties": {"event": _num, "cosmological": _num, "cauchy": _opt_num, "negative_root": _opt_num},
        },
        "geometry": {
            "type": "object",
            "required": ["event", "cosmo"],
            "properties": {"event": _geometry, "cosmo": _geometry},
        },
        "traces": TRACE_FILE_SCHEMA,
        "flags": {"type": "array", "items": {"type": "string"}},
        "error": _error,
    },
}

_mode = {
    "type": "object",
    "required": ["k", "eigenvalues", "errors", "closed_form"],
    "properties": {
        "k": {"type": "integer"},
        "eigenvalues": {"type": "array", "items": _num},
        "errors": {"type": "array", "items": _num},
        "trace_partial": _opt_num,
        "trace_tail_estimate": _opt_num,
        "trace_total": _opt_num,
        "error_bound": _opt_num,
        "closed_form": _opt_num,
        "relative_difference": _opt_num,
    },
}

SPECTRUM_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "profile", "grid_size", "count", "modes"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"const": "spectrum"},
        "profile": {
            "type": "object",
            "required": ["source", "xi", "beta_sq", "homothety"],
        },
        "grid_size": {"type": "integer"},
        "count": {"type": "integer"},
        "modes": {"type": "array", "items": _mode},
        "error": _error,
    },
}

_recovered = {
    "type": "object",
    "required": ["mass", "spin_sq", "charge_sq", "cosmological_constant", "xi", "r_event", "r_cosmo"],
    "properties": {k: _opt_num for k in ("mass", "spin_sq", "charge_sq", "cosmological_constant", "xi", "r_event", "r_cosmo", "spin", "charge")},
}

INVERSE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "input"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"const": "inverse"},
        "input": TRACE_FILE_SCHEMA,
        "result": _recovered,
        "diagnostics": {"type": "object"},
        "error": _error,
    },
}

_case = {
    "type": "object",
    "required": ["original", "traces_provenance"],
    "properties": {
        "original": _params,
        "recovered": _recovered,
        "relative_errors": {"type": "object"},
        "max_relative_error": _opt_num,
        "error": _error,
    },
}

ROUNDTRIP_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "cases", "summary"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"const": "roundtrip"},
        "seed": {"type": ["integer", "null"]},
        "cases": {"type": "array", "items": _case},
        "summary": {"type": "object", "required": ["evaluated", "skipped", "max_relative_error"]},
    },
}

SCHEMAS = {
    "forward": FORWARD_SCHEMA,
    "spectrum": SPECTRUM_SCHEMA,
    "inverse": INVERSE_SCHEMA,
    "roundtrip": ROUNDTRIP_SCHEMA,
}


class SchemaError(KNdSError, ValueError):
    pass


def clean(obj):
    """Convert numpy scalars/arrays to plain Python and non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(doc: dict) -> str:
    """Deterministic JSON: insertion-ordered keys, shortest round-trip floats."""
    return json.dumps(clean(doc), indent=2, allow_nan=False) + "\n"


def validate(doc: dict, schema: dict) -> None:
    try:
        jsonschema.validate(clean(doc), schema)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"schema validation failed: {exc.message}") from exc


def traces_to_doc(traces: TraceSet) -> dict:
    def extra(modes):
        return {str(k): v for k, v in sorted(modes.items()) if k not in (1, -1)}

    doc = {
        "schema_version": SCHEMA_VERSION,
        "gamma0_event": traces.gamma0_event,
        "gamma1_event": traces.gamma1_event,
        "gamma0_cosmo": traces.gamma0_cosmo,
        "gamma1_cosmo": traces.gamma1_cosmo,
        "optional_gammak": {"event": extra(traces.gammak_event), "cosmo": extra(traces.gammak_cosmo)},
        "provenance": traces.provenance,
    }
    return doc


def traces_from_doc(doc: dict) -> TraceSet:
    """Parse a trace file; a full ``forward`` report is accepted via its "traces" key."""
    if isinstance(doc, dict) and "traces" in doc and "gamma0_event" not in doc:
        doc = doc["traces"]
    validate(doc, TRACE_FILE_SCHEMA)
    opt = doc.get("optional_gammak", {})
    event = {1: doc["gamma1_event"], **{int(k): v for k, v in opt.get("event", {}).items()}}
    cosmo = {1: doc["gamma1_cosmo"], **{int(k): v for k, v in opt.get("cosmo", {}).items()}}
    # anything read from disk is external input; the producer's tag is kept as a note
    notes = (f"source provenance: {doc['provenance']}",) if "provenance" in doc else ()
    return TraceSet(doc["gamma0_event"], event, doc["gamma0_cosmo"], cosmo, provenance=EXTERNAL, notes=notes)


def spectrum_csv(modes: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "j", "lambda", "error_estimate"])
    for mode in modes:
        for j, (lam, err) in enumerate(zip(mode["eigenvalues"], mode["errors"]), start=1):
            writer.writerow([mode["k"], j, repr(float(lam)), repr(float(err))])
    return buf.getvalue()
