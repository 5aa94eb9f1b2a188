"""JSON schemas for scenario files and every payload the engines emit."""
from typing import Any, Dict

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from bosonctx.errors import ScenarioValidationError

_NUMBER_ROW = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_MATRIX = {"type": "array", "items": _NUMBER_ROW, "minItems": 1}
_PROBABILITY = {"type": "number", "minimum": 0, "maximum": 1}
_SIGN = {"enum": [1, -1]}

DEFINITIONS: Dict[str, Any] = {
    "matrix": {
        "type": "object",
        "required": ["re"],
        "properties": {"re": _MATRIX, "im": _MATRIX},
    },
    "vector": {
        "type": "object",
        "required": ["re"],
        "properties": {"re": _NUMBER_ROW, "im": _NUMBER_ROW},
    },
    "interferometer": {
        "oneOf": [
            {
                "type": "object",
                "required": ["dim", "re"],
                "properties": {
                    "dim": {"type": "integer", "minimum": 1},
                    "re": _MATRIX,
                    "im": _MATRIX,
                },
                "not": {"required": ["preset"]},
            },
            {
                "type": "object",
                "required": ["preset"],
                "properties": {
                    "preset": {"enum": ["balanced_beam_splitter", "identity", "beam_splitter"]},
                    "dim": {"type": "integer", "minimum": 1},
                    "transmissivity": _PROBABILITY,
                    "phase": {"type": "number"},
                },
            },
        ],
    },
    "occupations": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
    "context": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
    "scenario": {
        "type": "object",
        "required": ["observables", "contexts"],
        "properties": {
            "observables": {"type": "integer", "minimum": 1},
            "contexts": {"type": "array", "items": {"$ref": "#/$defs/context"}, "minItems": 1},
        },
    },
    "law": {
        "type": "object",
        "required": ["name"],
        "properties": {
            "name": {"enum": ["uniform", "beta", "ordered"]},
            "a": {"type": "number", "exclusiveMinimum": 0},
            "b": {"type": "number", "exclusiveMinimum": 0},
        },
    },
    "behavior": {
        "type": "array",
        "minItems": 1,
        "items": {
            "type": "object",
            "required": ["context", "pp", "pm", "mp", "mm"],
            "properties": {
                "context": {"$ref": "#/$defs/context"},
                "pp": _PROBABILITY,
                "pm": _PROBABILITY,
                "mp": _PROBABILITY,
                "mm": _PROBABILITY,
            },
        },
    },
    "distribution": {
        "type": "array",
        "minItems": 1,
        "items": {
            "type": "object",
            "required": ["occupations", "p"],
            "properties": {"occupations": {"$ref": "#/$defs/occupations"}, "p": _PROBABILITY},
        },
    },
    "event": {
        "type": "object",
        "required": ["context", "values"],
        "properties": {
            "context": {"$ref": "#/$defs/context"},
            "values": {
                "type": "object",
                "minProperties": 1,
                "patternProperties": {"^[0-9]+$": _SIGN},
                "additionalProperties": False,
            },
        },
    },
    "expect": {
        "type": "object",
        "additionalProperties": {
            "type": "object",
            "required": ["value"],
            "properties": {
                "value": {"type": ["number", "boolean"]},
                "tolerance": {"type": "number", "minimum": 0},
                "provenance": {"type": "string"},
            },
        },
    },
    "quantum": {
        "type": "object",
        "required": ["interferometer"],
        "properties": {
            "interferometer": {"$ref": "#/$defs/interferometer"},
            "inputs": {"type": "array", "items": {"$ref": "#/$defs/occupations"}},
            "transitions": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["input", "output"],
                    "properties": {
                        "input": {"$ref": "#/$defs/occupations"},
                        "output": {"$ref": "#/$defs/occupations"},
                    },
                },
            },
            "no_signalling": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["base", "added", "mode"],
                    "properties": {
                        "base": {"$ref": "#/$defs/occupations"},
                        "added": {"$ref": "#/$defs/occupations"},
                        "mode": {"type": "integer", "minimum": 0},
                    },
                },
            },
            "permanents": {"type": "array", "items": {"$ref": "#/$defs/matrix"}},
            "projectors": {
                "type": "object",
                "required": ["state", "projectors"],
                "properties": {
                    "state": {"$ref": "#/$defs/vector"},
                    "projectors": {"type": "array", "items": {"$ref": "#/$defs/matrix"}, "minItems": 1},
                },
            },
        },
    },
    "hidden-variable": {
        "type": "object",
        "required": ["scenario"],
        "properties": {
            "scenario": {"$ref": "#/$defs/scenario"},
            "law": {"$ref": "#/$defs/law"},
            "samples": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "lambdas": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            "witnesses": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["observable", "contexts"],
                    "properties": {
                        "observable": {"type": "integer", "minimum": 1},
                        "contexts": {
                            "type": "array",
                            "items": {"$ref": "#/$defs/context"},
                            "minItems": 2,
                            "maxItems": 2,
                        },
                    },
                },
            },
            "assignments": {"type": "array", "items": {"type": "array", "items": _SIGN, "minItems": 1}},
        },
    },
    "bounds": {
        "type": "object",
        "anyOf": [{"required": ["scenario"]}, {"required": ["cycle"]}],
        "properties": {
            "scenario": {"$ref": "#/$defs/scenario"},
            "cycle": {"type": "integer", "minimum": 3},
            "inequality": {
                "oneOf": [
                    {"const": "cycle-sum"},
                    {
                        "type": "object",
                        "properties": {
                            "terms": {
                                "type": "array",
                                "items": {
                                    "type": "object",
                                    "required": ["context"],
                                    "properties": {
                                        "context": {"$ref": "#/$defs/context"},
                                        "coefficient": {"type": "number"},
                                    },
                                },
                            },
                            "offset": {"type": "number"},
                        },
                    },
                ],
            },
            "behavior": {
                "type": "object",
                "required": ["source"],
                "properties": {
                    "source": {"enum": ["lambda-exact", "lambda-sample", "deterministic", "table"]},
                    "samples": {"type": "integer", "minimum": 1},
                    "seed": {"type": "integer", "minimum": 0},
                    "law": {"$ref": "#/$defs/law"},
                    "values": {"type": "array", "items": _SIGN, "minItems": 1},
                    "tables": {"$ref": "#/$defs/behavior"},
                },
            },
            "events": {
                "oneOf": [
                    {"const": "reflection"},
                    {"type": "array", "items": {"$ref": "#/$defs/event"}, "minItems": 1},
                ],
            },
        },
    },
    "full-report": {
        "type": "object",
        "properties": {
            "samples": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
        },
    },
}

KINDS = ("quantum", "hidden-variable", "bounds", "full-report")

SCENARIO_FILE_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": DEFINITIONS,
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": list(KINDS)}, "expect": {"$ref": "#/$defs/expect"}},
    "allOf": [
        {"if": {"properties": {"kind": {"const": kind}}}, "then": {"$ref": f"#/$defs/{kind}"}}
        for kind in KINDS
    ],
}


def _schema_for(name: str) -> Dict[str, Any]:
    if name == "scenario-file":
        return SCENARIO_FILE_SCHEMA
    if name not in DEFINITIONS:
        raise KeyError(f"Unknown schema {name!r}")
    return {"$defs": DEFINITIONS, "$ref": f"#/$defs/{name}"}


def validate(payload: Any, name: str = "scenario-file") -> None:
    """Validate ``payload`` against the named schema.

    Args:
        payload: Decoded JSON value
        name: ``scenario-file`` or any key of DEFINITIONS (``behavior``, ``distribution``, ...)

    Raises:
        ScenarioValidationError: with the most relevant schema violation
    """
    validator = Draft202012Validator(_schema_for(name))
    error = best_match(validator.iter_errors(payload))
    if error is not None:
        location = "/".join(str(part) for part in error.absolute_path) or "<root>"
        raise ScenarioValidationError(f"{name} invalid at {location}: {error.message}")
