"""JSON documents for curves, worldlines and jobs.

Every object is validated against the shipped schema by its ``kind`` (or,
for jobs, the presence of ``command``) so errors can name the offending
field.  Floats are written with ``repr``, the shortest string that reads
back to the same double.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from .conformal import InversionMap, invert_curve
from .curves import (Circle, CurveError, CurveSpec, Ellipse, FourierLoop, Line, OpenBump,
                     Reparameterized, Similarity, Spline)
from .photon import Boosted, Inertial, Moved, Wiggle, WorldLine, WorldLineError

CURVE_KINDS = ("circle", "ellipse", "line", "fourier-loop", "open-bump", "spline",
               "similarity", "reparameterized", "inverted")
WORLDLINE_KINDS = ("inertial", "wiggle", "boosted", "moved")
COMMANDS = ("eval", "eval-open", "table", "invert", "anomaly", "photon", "boost",
            "minimize", "export")


class SpecError(ValueError):
    """A document that is not valid JSON or violates the schema."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("curvn").joinpath("data/spec.schema.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _validator(name: str):
    root = schema()
    sub = {"$schema": root["$schema"], "$defs": root["$defs"], "$ref": f"#/$defs/{name}"}
    return jsonschema.Draft202012Validator(sub)


def _bounds(sch: dict) -> str:
    lo = "[" if "minimum" in sch else "("
    hi = "]" if "maximum" in sch else ")"
    a = sch.get("minimum", sch.get("exclusiveMinimum", "-inf"))
    b = sch.get("maximum", sch.get("exclusiveMaximum", "inf"))
    return f"{lo}{a}, {b}{hi}"


def _describe(err: jsonschema.ValidationError, where: str) -> SpecError:
    path = [p for p in err.absolute_path]
    name = next((p for p in reversed(path) if isinstance(p, str)), None)
    loc = where + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)
    if err.validator == "additionalProperties":
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        key = extra[0] if extra else "?"
        return SpecError(f'unknown field "{key}" in {loc}; allowed fields: '
                         f"{', '.join(sorted(allowed))}", key)
    if err.validator == "required":
        key = err.message.split("'")[1]
        return SpecError(f'missing required field "{key}" in {loc}', key)
    if err.validator in ("minimum", "maximum", "exclusiveMinimum", "exclusiveMaximum"):
        return SpecError(f'field "{name}" = {err.instance!r} is out of range; '
                         f"allowed {_bounds(err.schema)}", name)
    if err.validator in ("enum", "const"):
        options = err.validator_value if err.validator == "enum" else [err.validator_value]
        return SpecError(f'field "{name}" = {err.instance!r} is not one of '
                         f"{', '.join(map(repr, options))}", name)
    return SpecError(f'field "{name or loc}": {err.message}', name)


def _check(doc, name: str, where: str):
    v = _validator(name)
    errors = sorted(v.iter_errors(doc), key=lambda e: (len(e.absolute_path), e.validator != "additionalProperties"))
    if errors:
        raise _describe(errors[0], where)


def _kind(doc, where, allowed):
    if not isinstance(doc, dict):
        raise SpecError(f"{where} must be a JSON object", None)
    kind = doc.get("kind")
    if kind not in allowed:
        raise SpecError(f'field "kind" = {kind!r} in {where} is not one of {", ".join(allowed)}', "kind")
    _check(doc, kind, where)
    return kind


def _arr(x):
    return None if x is None else np.asarray(x, dtype=float)


def build_curve(doc: dict, where: str = "document") -> CurveSpec:
    kind = _kind(doc, where, CURVE_KINDS)
    try:
        if kind == "circle":
            return Circle(_arr(doc.get("center", [0.0, 0.0])), float(doc.get("radius", 1.0)))
        if kind == "ellipse":
            return Ellipse(float(doc.get("a", 1.0)), float(doc.get("ecc", 0.0)),
                           _arr(doc.get("center", [0.0, 0.0])), float(doc.get("angle", 0.0)))
        if kind == "line":
            dim = len(doc["direction"])
            return Line(_arr(doc.get("point", [0.0] * dim)), _arr(doc["direction"]))
        if kind == "fourier-loop":
            return FourierLoop(_arr(doc["a"]), _arr(doc["b"]), _arr(doc.get("center")))
        if kind == "open-bump":
            return OpenBump(float(doc.get("amplitude", 1.0)), float(doc.get("width", 1.0)))
        if kind == "spline":
            return Spline(_arr(doc["points"]), bool(doc.get("closed", True)))
        if kind == "similarity":
            return Similarity(build_curve(doc["base"], where + ".base"), _arr(doc.get("rotation")),
                              float(doc.get("scale", 1.0)), _arr(doc.get("shift")))
        if kind == "reparameterized":
            return Reparameterized(build_curve(doc["base"], where + ".base"), int(doc.get("sign", 1)),
                                   float(doc.get("amplitude", 0.0)), int(doc.get("harmonic", 1)))
        source = build_curve(doc["source"], where + ".source")
        return invert_curve(source, InversionMap(_arr(doc["center"]), float(doc.get("radius", 1.0))))
    except CurveError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"{where} ({kind}): {exc}") from exc


def build_worldline(doc: dict, where: str = "document") -> WorldLine:
    kind = _kind(doc, where, WORLDLINE_KINDS)
    try:
        if kind == "inertial":
            return Inertial(_arr(doc.get("velocity", [0.0] * 3)), _arr(doc.get("origin", [0.0] * 3)))
        if kind == "wiggle":
            kw = {k: doc[k] for k in ("amplitude", "omega", "half_width", "detune") if k in doc}
            for k in ("axis", "velocity", "origin", "detune_axis"):
                if k in doc:
                    kw[k] = _arr(doc[k])
            return Wiggle(**kw)
        if kind == "boosted":
            beta = _arr(doc["beta"])
            if not np.linalg.norm(beta) < 1:
                raise SpecError(f'field "beta" has |beta| = {float(np.linalg.norm(beta))!r}; allowed [0, 1)', "beta")
            return Boosted(build_worldline(doc["base"], where + ".base"), beta)
        return Moved(build_worldline(doc["base"], where + ".base"), _arr(doc.get("rotation")),
                     float(doc.get("time_shift", 0.0)), _arr(doc.get("shift")))
    except WorldLineError as exc:
        raise SpecError(f"{where} ({kind}): {exc}") from exc


@dataclass
class JobSpec:
    """One CLI invocation: a command, its input and its overrides."""

    command: str
    input: str | None = None
    spec: dict | None = None
    tol: float | None = None
    max_grid: int | None = None
    window: float | None = None
    out: str | None = None
    format: str = "text"
    center: list | None = None
    radius: float = 1.0
    beta: list | None = None
    plot: str | None = None
    harmonics: int = 8
    max_iter: int = 200
    seed: int = 0

    def to_dict(self) -> dict:
        defaults = JobSpec(self.command)
        out = {"command": self.command}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name != "command" and value != getattr(defaults, f.name):
                out[f.name] = value
        return out


def build_job(doc: dict) -> JobSpec:
    _check(doc, "job", "job")
    return JobSpec(**doc)


def from_dict(doc) -> CurveSpec | WorldLine | JobSpec:
    if isinstance(doc, dict) and "command" in doc and "kind" not in doc:
        return build_job(doc)
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind in WORLDLINE_KINDS:
        return build_worldline(doc)
    if kind is None and isinstance(doc, dict):
        raise SpecError('missing required field "kind" (or "command" for a job)', "kind")
    return build_curve(doc)


def parse_spec(text: str) -> CurveSpec | WorldLine | JobSpec:
    """Parse a JSON document into a curve, a worldline or a job."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON: {exc}") from exc
    return from_dict(doc)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


def serialize(obj, indent: int | None = 2) -> str:
    """JSON text for a curve, worldline, job or plain report dictionary."""
    doc = obj.to_dict() if hasattr(obj, "to_dict") else obj
    return json.dumps(_plain(doc), indent=indent, allow_nan=True) + "\n"


__all__ = ["SpecError", "JobSpec", "parse_spec", "serialize", "from_dict", "build_curve",
           "build_worldline", "build_job", "schema", "CURVE_KINDS", "WORLDLINE_KINDS", "COMMANDS"]
