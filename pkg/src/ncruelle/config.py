"""Run configuration: JSON schema, validation and object construction."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any

import jsonschema
import numpy as np

from . import potential as pot
from .algebra import Algebra
from .cylfun import CylinderFunction
from .errors import NCRuelleError
from .sft import DEFAULT_CAPACITY, TransitionMatrix

FAMILIES = ("trace_type", "depolarizing", "kraus_split", "kraus_channel", "vector_table", "custom")

_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_word_table = {
    "type": "object",
    "patternProperties": {r"^[0-9]+(,[0-9]+)*$": {}},
    "additionalProperties": False,
    "minProperties": 1,
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["potential"],
    "properties": {
        "shift": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "transition_rows": {"type": "array", "minItems": 1,
                                    "items": {"type": "array", "items": {"enum": [0, 1]}}},
            },
        },
        "theta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "algebra": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "size"],
            "properties": {
                "kind": {"enum": ["matrix", "vector"]},
                "size": {"type": "integer", "minimum": 1},
            },
        },
        "potential": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": list(FAMILIES)},
                "params": {"type": "object"},
                "depth": {"type": "integer", "minimum": 1},
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["check", "iterate", "spectrum", "eigenstate", "entropy", "mc"]},
                "cylinder_depth": {"type": "integer", "minimum": 0},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "samples": {"type": "integer", "minimum": 1},
                "workers": {"type": "integer", "minimum": 1},
                "capacity_cap": {"type": "integer", "minimum": 1},
                "g": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["random", "constant", "table"]},
                        "depth": {"type": "integer", "minimum": 0},
                        "seed": {"type": "integer", "minimum": 0},
                        "value": {},
                        "values": _word_table,
                    },
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"report_path": {"type": "string"}, "csv_path": {"type": "string"}},
        },
    },
}

_p01 = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_stochastic = {"type": "array", "minItems": 2, "maxItems": 2,
               "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}}

PARAM_SCHEMAS: dict[str, dict] = {
    "trace_type": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "preset": {"enum": ["first_coordinate", "maximal_entropy"]},
            "p": _p01,
            "d": {"type": "integer", "minimum": 1},
            "factors": _word_table,
        },
        "oneOf": [{"required": ["preset"]}, {"required": ["factors"]}],
    },
    "depolarizing": {
        "type": "object",
        "additionalProperties": False,
        "required": ["p"],
        "properties": {"p": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
    },
    "kraus_split": {
        "type": "object", "additionalProperties": False, "required": ["P"],
        "properties": {"P": _stochastic},
    },
    "kraus_channel": {
        "type": "object", "additionalProperties": False, "required": ["P"],
        "properties": {"P": _stochastic},
    },
    "vector_table": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "tables": _word_table,
            "constant": _matrix,
            "uniform": {
                "type": "object", "additionalProperties": False, "required": ["N"],
                "properties": {"N": {"type": "integer", "minimum": 1},
                               "p": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
            },
        },
        "oneOf": [{"required": ["tables"]}, {"required": ["constant"]}, {"required": ["uniform"]}],
    },
    "custom": {
        "type": "object", "additionalProperties": False, "required": ["maps"],
        "properties": {"maps": _word_table},
    },
}


class ConfigError(NCRuelleError, ValueError):
    """The configuration is malformed; carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path


def _path(prefix: str, err: jsonschema.ValidationError) -> str:
    parts = [prefix] if prefix else []
    parts += [str(p) for p in err.absolute_path]
    return ".".join(parts)


def _validate(instance, schema, prefix=""):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(_path(prefix, err), err.message)


def validate(cfg: dict) -> None:
    _validate(cfg, SCHEMA)
    params = cfg["potential"].get("params", {})
    _validate(params, PARAM_SCHEMAS[cfg["potential"]["family"]], "potential.params")


def load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from exc
    validate(cfg)
    return cfg


@dataclass
class RunSettings:
    theta: float = 0.5
    cylinder_depth: int | None = None
    tol: float = 1e-10
    max_iter: int = 10_000
    seed: int = 0
    samples: int = 100_000
    workers: int = 1


def settings(cfg: dict) -> RunSettings:
    run = cfg.get("run", {})
    return RunSettings(
        theta=float(cfg.get("theta", 0.5)),
        cylinder_depth=run.get("cylinder_depth"),
        tol=float(run.get("tol", 1e-10)),
        max_iter=int(run.get("max_iter", 10_000)),
        seed=int(run.get("seed", 0)),
        samples=int(run.get("samples", 100_000)),
        workers=int(run.get("workers", 1)),
    )


def _word(key: str) -> tuple:
    return tuple(int(s) for s in key.split(","))


def _words(table: dict) -> dict:
    return {_word(key): np.asarray(v, dtype=np.float64) for key, v in table.items()}


def build_shift(cfg: dict) -> TransitionMatrix:
    block = cfg.get("shift", {})
    cap = int(cfg.get("run", {}).get("capacity_cap", DEFAULT_CAPACITY))
    try:
        if "transition_rows" in block:
            shift = TransitionMatrix(block["transition_rows"], capacity_cap=cap)
            if "k" in block and block["k"] != shift.k:
                raise ConfigError("shift.k", f"k = {block['k']} but transition_rows has {shift.k} rows")
            return shift
        return TransitionMatrix.full(int(block.get("k", 2)), capacity_cap=cap)
    except ConfigError:
        raise
    except NCRuelleError as exc:
        raise ConfigError("shift.transition_rows", str(exc)) from exc


def build_potential(cfg: dict, shift: TransitionMatrix | None = None) -> pot.Potential:
    shift = build_shift(cfg) if shift is None else shift
    block = cfg["potential"]
    fam = block["family"]
    params = block.get("params", {})
    try:
        if fam == "trace_type":
            if "preset" in params:
                if params["preset"] == "first_coordinate":
                    if "p" not in params:
                        raise ConfigError("potential.params.p", "first_coordinate needs p")
                    if not shift.is_full or shift.k != 2:
                        raise ConfigError("shift", "first_coordinate needs the full 2-shift")
                    phi = pot.make_first_coordinate(params["p"])
                    phi = replace(phi, shift=shift)
                else:
                    phi = pot.make_maximal_entropy(shift, int(params.get("d", 2)))
            else:
                phi = pot.make_trace_type(_words(params["factors"]), shift)
        elif fam == "depolarizing":
            d = cfg.get("algebra", {}).get("size", 2)
            phi = pot.make_depolarizing(params["p"], shift, d)
        elif fam in ("kraus_split", "kraus_channel"):
            if fam == "kraus_split":
                if not (shift.is_full and shift.k == 2):
                    raise ConfigError("shift", "kraus_split is defined on the full 2-shift")
                phi = replace(pot.make_kraus_split(params["P"]), shift=shift)
            else:
                phi = pot.make_kraus_channel(params["P"], shift)
        elif fam == "vector_table":
            if "tables" in params:
                phi = pot.make_vector_table(_words(params["tables"]), shift)
            elif "constant" in params:
                phi = pot.make_vector_table(np.asarray(params["constant"], dtype=np.float64), shift)
            else:
                u = params["uniform"]
                table = pot.uniform_vector_table(u["N"], u.get("p", 1.0), 1)
                depth, w = pot.preimage_weights(shift)
                phi = pot.make_vector_table(w[:, None, None] * table[None], shift)
        else:
            alg_block = cfg.get("algebra")
            if alg_block is None:
                raise ConfigError("algebra", "custom potentials need an algebra block")
            alg = Algebra(alg_block["kind"], alg_block["size"])
            phi = pot.make_custom(_words(params["maps"]), alg, shift)
    except ConfigError:
        raise
    except NCRuelleError as exc:
        raise ConfigError("potential.params", str(exc)) from exc
    alg_block = cfg.get("algebra")
    if alg_block is not None and (alg_block["kind"], alg_block["size"]) != (phi.algebra.kind,
                                                                          phi.algebra.size):
        raise ConfigError("algebra", f"potential acts on {phi.algebra}, config declares "
                                     f"{alg_block['kind']}({alg_block['size']})")
    depth = block.get("depth")
    if depth is not None:
        if depth < phi.depth:
            raise ConfigError("potential.depth", f"family needs depth >= {phi.depth}")
        phi = phi.lift_depth(depth)
    return phi


def build_function(cfg: dict, phi: pot.Potential, seed: int) -> CylinderFunction:
    """The test function g named by run.g (default: seeded random depth-2 symmetric)."""
    spec = cfg.get("run", {}).get("g", {"kind": "random"})
    alg, shift = phi.algebra, phi.shift
    try:
        if spec["kind"] == "constant":
            if "value" not in spec:
                raise ConfigError("run.g.value", "constant g needs a value")
            return CylinderFunction.constant(np.asarray(spec["value"], dtype=np.float64), alg, shift)
        if spec["kind"] == "table":
            if "values" not in spec:
                raise ConfigError("run.g.values", "table g needs values")
            return CylinderFunction.from_mapping(alg, shift, _words(spec["values"]))
        rng = np.random.default_rng(int(spec.get("seed", seed)))
        return CylinderFunction.random(alg, shift, int(spec.get("depth", 2)), rng, symmetric=True)
    except ConfigError:
        raise
    except (NCRuelleError, KeyError) as exc:
        raise ConfigError("run.g", str(exc)) from exc
