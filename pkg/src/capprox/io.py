"""JSON load/save with schema validation.

Floats are written by Python's ``repr`` (the shortest decimal that reads
back to the same double), so a load/save round trip is byte-stable.
Infinities are written as the strings ``"inf"``/``"-inf"``; NaN is refused.
"""

import json
import math
import sys

import jsonschema
import numpy as np

from .errors import ArgumentError, CapproxIOError, SchemaError

_NUM = {"type": "number"}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_LABEL = {"type": ["string", "integer"]}

COMPACT_NET = {
    "type": "object",
    "required": ["dim", "mesh", "points"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "mesh": {"type": "number", "exclusiveMinimum": 0},
        "points": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _NUM, "minItems": 2}},
    },
    "additionalProperties": False,
}

POLYNOMIAL = {
    "type": "object",
    "required": ["dim", "terms"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["alpha", "re", "im"],
                "properties": {
                    "alpha": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "re": _NUM,
                    "im": _NUM,
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

CONTOUR = {
    "type": "object",
    "required": ["cycles"],
    "properties": {
        "cycles": {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 3, "items": _PAIR}},
        "cell": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

PARTIAL_FRACTION = {
    "type": "object",
    "required": ["poles", "coeffs"],
    "properties": {"poles": {"type": "array", "items": _PAIR}, "coeffs": {"type": "array", "items": _PAIR}},
    "additionalProperties": False,
}

SAMPLE_SPACE = {
    "type": "object",
    "required": ["outcomes"],
    "properties": {
        "outcomes": {"type": "array", "minItems": 1, "items": _LABEL},
        "atoms": {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _LABEL}},
        "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
    },
    "additionalProperties": False,
}

RANDOM_COMPACT = {
    "type": "object",
    "required": ["space", "values"],
    "properties": {
        "space": SAMPLE_SPACE,
        "values": {"type": "object", "additionalProperties": COMPACT_NET},
    },
    "additionalProperties": False,
}

RANDOM_FUNCTION = {
    "type": "object",
    "required": ["space", "values"],
    "properties": {
        "space": SAMPLE_SPACE,
        "dim": {"type": "integer", "minimum": 1},
        "values": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    {"type": "string"},
                    {"type": "object", "required": ["expr"], "properties": {"expr": {"type": "string"}},
                     "additionalProperties": False},
                    {"type": "object", "required": ["polynomial"], "properties": {"polynomial": POLYNOMIAL},
                     "additionalProperties": False},
                ]
            },
        },
    },
    "additionalProperties": False,
}

SCHEMAS = {
    "compact_net": COMPACT_NET,
    "polynomial": POLYNOMIAL,
    "contour": CONTOUR,
    "partial_fraction": PARTIAL_FRACTION,
    "sample_space": SAMPLE_SPACE,
    "random_compact": RANDOM_COMPACT,
    "random_function": RANDOM_FUNCTION,
}


def _path(error):
    out = ""
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    if error.validator == "required":
        # name the missing field itself
        missing = error.message.split("'")[1] if "'" in error.message else ""
        out += f".{missing}"
    return out or "."


def validate(obj, schema):
    """Raise `SchemaError` whose ``path`` names the offending field (``.mesh``, ``.points[3]``)."""
    if isinstance(schema, str):
        try:
            schema = SCHEMAS[schema]
        except KeyError:
            raise ArgumentError(f"unknown schema {schema!r}") from None
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        e = jsonschema.exceptions.best_match(errors)
        raise SchemaError(_path(e), e.message)
    return obj


def _encode(x):
    if isinstance(x, dict):
        return {str(k): _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, np.ndarray):
        return _encode(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            raise ArgumentError("NaN cannot be serialized")
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (complex, np.complexfloating)):
        return [_encode(x.real), _encode(x.imag)]
    if hasattr(x, "to_json"):
        return _encode(x.to_json())
    return x


def dumps(obj, indent=None):
    """Serialize with shortest-roundtrip floats and sorted keys."""
    return json.dumps(_encode(obj), indent=indent, sort_keys=True, allow_nan=False)


def loads(text, schema=None):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(".", f"invalid JSON: {exc}") from exc
    if schema is not None:
        validate(obj, schema)
    return obj


def load(path, schema=None):
    """Read and validate JSON from ``path`` (``-`` reads stdin)."""
    try:
        if str(path) == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise CapproxIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return loads(text, schema)


def save(obj, path, indent=None):
    text = dumps(obj, indent) + "\n"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CapproxIOError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def load_net(path):
    from .compactset import CompactNet

    obj = load(path, COMPACT_NET)
    for i, p in enumerate(obj["points"]):
        if len(p) != 2 * obj["dim"]:
            raise SchemaError(f".points[{i}]", f"expected {2 * obj['dim']} reals (re, im per coordinate)")
    return CompactNet.from_json(obj)


def load_random_compact(path):
    from .randomness import RandomCompactSet

    obj = load(path, RANDOM_COMPACT)
    return RandomCompactSet.from_json(obj)


def load_random_function(path):
    from .randomness import RandomFunctionTable

    return RandomFunctionTable.from_json(load(path, RANDOM_FUNCTION))
