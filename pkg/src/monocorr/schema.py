"""JSON schemas for the documents written by the command-line tool."""

import jsonschema

from .cli import SCHEMA_VERSION

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_STR = {"type": "string"}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["command", "params", "seed", "workers", "out", "format"],
    "properties": {
        "command": _STR,
        "params": {"type": "object"},
        "seed": _INT,
        "workers": {"type": "integer", "minimum": 1},
        "out": {"type": ["string", "null"]},
        "format": {"enum": ["json", "csv", None]},
    },
    "additionalProperties": False,
}

_FIELDS = {
    "exponents": {
        "d": _INT,
        "n": _INT,
        "m": _INT,
        "L": {"type": "string", "pattern": r"^-?\d+/\d+$"},
        "phi": _STR,
        "argmax_s": _INT,
        "d_ell_for_n": _INT,
        "threshold": {"type": "boolean"},
    },
    "sequence": {"alpha": _STR, "N": _INT, "precision": _INT, "values_file": _STR},
    "correlate": {
        "alpha": _STR,
        "value": _NUM,
        "expectation": _NUM,
        "tuple_count": _INT,
        "N": _INT,
        "ell": _INT,
        "runtime_ms": _NUM,
    },
    "gaps": {
        "alpha": _STR,
        "N": _INT,
        "K": _INT,
        "columns": {"type": "array", "items": _STR},
        "rows": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 5, "maxItems": 5}},
    },
    "count": {
        "B": _INT,
        "total": _INT,
        "m": _INT,
        "strata": {"type": "object"},
        "exponents": {"type": "object"},
        "log_B": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
    },
    "fourier-check": {
        "alpha": _STR,
        "lhs": _NUM,
        "rhs": _NUM,
        "abs_diff": _NUM,
        "tail_bound": _NUM,
        "tolerance": _NUM,
        "n_frequencies": _INT,
        "passed": {"type": "boolean"},
    },
    "mc-mean": {"mean": _NUM, "stderr": _NUM, "expectation": _NUM, "values": {"type": "array", "items": _NUM}},
    "mc-var": {
        "second_moment": _NUM,
        "mean_squared": _NUM,
        "excess": _NUM,
        "values": {"type": "array", "items": _NUM},
    },
}


def _schema(command, fields):
    props = {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"const": command},
        "config": CONFIG_SCHEMA,
    }
    props.update(fields)
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": sorted(props),
        "properties": props,
    }


OUTPUT_SCHEMAS = {
    key: _schema("mc" if key.startswith("mc-") else key, fields) for key, fields in _FIELDS.items()
}


def schema_for(doc) -> dict:
    command = doc.get("command")
    if command == "mc":
        command = "mc-" + doc.get("config", {}).get("params", {}).get("mode", "mean")
    return OUTPUT_SCHEMAS[command]


def validate_document(doc):
    """Raise ``jsonschema.ValidationError`` if ``doc`` does not match its command's schema."""
    jsonschema.validate(doc, schema_for(doc))
