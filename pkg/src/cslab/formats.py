"""JSON formats for algebras, elements, maps, correspondences, actions and covariances."""
import json
import os
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from .algebra import AlgElement, LinearMapOnA, MatrixBlockAlgebra
from .bimodule import Correspondence
from .crossed import FiniteGroup, GroupAction
from .semicircular import Covariance
from .tolerances import SchemaError

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_CMATRIX = {"type": "array", "items": {"type": "array", "items": _COMPLEX}}
_ALGEBRA = {
    "type": "object",
    "properties": {"label": {"type": "string"},
                   "blocks": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}},
    "required": ["blocks"],
}
_ALGEBRA_REF = {"anyOf": [{"type": "string"}, _ALGEBRA]}

SCHEMAS = {
    "algebra": _ALGEBRA,
    "element": {
        "type": "object",
        "properties": {"algebra": _ALGEBRA_REF, "blocks": {"type": "array", "items": _CMATRIX}},
        "required": ["algebra", "blocks"],
    },
    "linear_map": {
        "type": "object",
        "properties": {"matrix": _CMATRIX, "domain": _ALGEBRA_REF, "codomain": _ALGEBRA_REF},
        "required": ["matrix", "domain", "codomain"],
    },
    "correspondence": {
        "type": "object",
        "properties": {
            "label": {"type": "string"},
            "algebra": _ALGEBRA,
            "carrier_dim": {"type": "integer", "minimum": 0},
            "trace_weights": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
            "left_action": {"type": "array", "items": _CMATRIX},
            "right_action": {"type": "array", "items": _CMATRIX},
            "inner_product": {"type": "array", "items": _CMATRIX},
            "distinguished": {"type": "array", "items": {"type": "array", "items": _COMPLEX}},
        },
        "required": ["algebra", "carrier_dim", "left_action", "right_action", "inner_product"],
    },
    "action": {
        "type": "object",
        "properties": {
            "group": {"type": "object",
                      "properties": {"order": {"type": "integer", "minimum": 1},
                                     "mul": {"type": "array", "items": {"type": "array",
                                                                        "items": {"type": "integer"}}}},
                      "required": ["order", "mul"]},
            "algebra": _ALGEBRA_REF,
            "automorphisms": {"type": "array", "items": {
                "type": "object",
                "properties": {"perm": {"type": "array", "items": {"type": "integer"}},
                               "unitaries": {"type": "array", "items": _CMATRIX}},
                "required": ["perm"]}},
        },
        "required": ["group", "algebra", "automorphisms"],
    },
    "covariance": {
        "type": "object",
        "properties": {
            "algebra": _ALGEBRA_REF,
            "I": {"type": "integer", "minimum": 1},
            "eta": {"type": "array", "items": {"type": "array", "items": _CMATRIX}},
            "elements": {"type": "object", "additionalProperties": {"type": "array", "items": _CMATRIX}},
        },
        "required": ["algebra", "I", "eta"],
    },
    "config": {
        "type": "object",
        "properties": {
            "kind": {"enum": ["crossed", "galois", "freeness", "simplicity", "fock", "mostow", "fusion"]},
            "inputs": {"type": "object", "additionalProperties": {
                "anyOf": [{"type": "string"}, {"type": "array", "items": {"type": "string"}}]}},
            "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
            "tolerances": {"type": "object", "properties": {"eps": {"type": "number", "exclusiveMinimum": 0},
                                                            "eps_psd": {"type": "number",
                                                                        "exclusiveMinimum": 0}},
                           "additionalProperties": False},
            "params": {"type": "object"},
            "output": {"type": "string"},
        },
        "required": ["kind", "inputs"],
        "additionalProperties": False,
    },
}


def validate(data, kind):
    if kind not in SCHEMAS:
        raise SchemaError(f"unknown schema kind {kind!r}; choose from {sorted(SCHEMAS)}")
    try:
        jsonschema.validate(data, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{kind}: {exc.message} at {path}") from None


def load_json(path):
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"missing file {path}")
    with open(path) as fh:
        return json.load(fh)


def dump_json(data, path):
    """Write JSON atomically with sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def decode_matrix(data):
    arr = np.asarray(data, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 0), dtype=complex)
    return arr[..., 0] + 1j * arr[..., 1]


def encode_matrix(mat):
    mat = np.asarray(mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def algebra_from(ref, base=None):
    """Resolve an algebra given inline, as a path relative to ``base`` or as a label."""
    if isinstance(ref, dict):
        validate(ref, "algebra")
        return MatrixBlockAlgebra(ref["blocks"], ref.get("label"))
    if base is not None and ref.endswith(".json"):
        return algebra_from(load_json(Path(base) / ref))
    return MatrixBlockAlgebra.from_label(ref)


def element_from(data, algebra=None, base=None):
    validate(data, "element") if "algebra" in data else None
    algebra = algebra or algebra_from(data["algebra"], base)
    return AlgElement(algebra, [decode_matrix(b).reshape(n, n) for b, n in zip(data["blocks"], algebra.block_sizes)])


def linear_map_from(data, base=None):
    validate(data, "linear_map")
    dom = algebra_from(data["domain"], base)
    cod = algebra_from(data["codomain"], base)
    return LinearMapOnA(dom, cod, decode_matrix(data["matrix"]))


def correspondence_from(data):
    validate(data, "correspondence")
    return Correspondence.from_json(data)


def action_from(data, base=None):
    validate(data, "action")
    group = FiniteGroup(data["group"]["mul"])
    if group.order != data["group"]["order"]:
        raise SchemaError("group order does not match the multiplication table")
    A = algebra_from(data["algebra"], base)
    perms, units = [], []
    for aut in data["automorphisms"]:
        perms.append(aut["perm"])
        us = aut.get("unitaries")
        units.append([decode_matrix(u).reshape(n, n) for u, n in zip(us, A.block_sizes)] if us
                     else [np.eye(n) for n in A.block_sizes])
    return GroupAction(group, A, perms, units)


def covariance_from(data, base=None):
    validate(data, "covariance")
    A = algebra_from(data["algebra"], base)
    n = data["I"]
    if len(data["eta"]) != n or any(len(row) != n for row in data["eta"]):
        raise SchemaError(f"eta must be an {n} x {n} grid")
    entries = [[LinearMapOnA(A, A, decode_matrix(m)) for m in row] for row in data["eta"]]
    elements = {k: AlgElement(A, [decode_matrix(b).reshape(s, s) for b, s in zip(v, A.block_sizes)])
                for k, v in data.get("elements", {}).items()}
    return Covariance(A, entries, elements)


def covariance_to_json(cov):
    return {"algebra": cov.algebra.to_json(), "I": cov.index_count,
            "eta": [[encode_matrix(m.matrix) for m in row] for row in cov.entries],
            "elements": {k: [encode_matrix(b) for b in v.blocks] for k, v in cov.elements.items()}}
