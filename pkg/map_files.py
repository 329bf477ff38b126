#!/usr/bin/env python3
"""
Map files: JSON-compatible (json5) descriptions of linear maps

    {
      "in_dim": 2, "out_dim": 2,
      "repr": "choi" | "kraus" | "builtin",
      "data": [[re, im], ...]          # choi: (in_dim*out_dim)^2 pairs, row-major
                                       # kraus: list of out_dim*in_dim pair lists
      "name": "reduction",             # builtin only
      "params": {"mu": 0.5}            # builtin only
    }
"""

import logging
from typing import Any, Dict

import json5
import numpy as np

from errors import MapFileError, PosmapError
from map_calculus import (
    SuperMap,
    Structure,
    from_kraus,
    identity_map,
    lambda_mu_map,
    reduction_map,
    transpose_map,
)
from matrix_core import hermitian_deviation
from positivity import random_sp_k
from utils import complex_to_pairs, pairs_to_complex

logger = logging.getLogger(__name__)

REPR_KINDS = ("choi", "kraus", "builtin")
BUILTIN_NAMES = ("identity", "transpose", "reduction", "lambda_mu", "sp_k_random")


def _positive_int(doc: Dict[str, Any], key: str, path: str) -> int:
    if key not in doc:
        raise MapFileError(key, "missing field", path)
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise MapFileError(key, f"must be a positive integer, got {value!r}", path)
    return value


def _param(params: Dict[str, Any], key: str, kind, path: str):
    if key not in params:
        raise MapFileError(f"params.{key}", "missing parameter", path)
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, kind):
        raise MapFileError(f"params.{key}", f"wrong type {type(value).__name__}", path)
    return value


def _build_builtin(doc: Dict[str, Any], in_dim: int, out_dim: int, path: str) -> SuperMap:
    name = doc.get("name")
    if name not in BUILTIN_NAMES:
        raise MapFileError("name", f"unknown builtin {name!r}; expected one of {', '.join(BUILTIN_NAMES)}", path)
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise MapFileError("params", "must be an object", path)

    if name == "sp_k_random":
        k = _param(params, "k", int, path)
        terms = _param(params, "terms", int, path)
        seed = _param(params, "seed", int, path)
        try:
            return random_sp_k(k, in_dim, out_dim, terms, seed)
        except (PosmapError, ValueError) as e:
            raise MapFileError("params", str(e), path)

    if in_dim != out_dim:
        raise MapFileError("out_dim", f"builtin {name!r} needs in_dim == out_dim, got {in_dim} and {out_dim}", path)
    if name == "identity":
        return identity_map(in_dim)
    if name == "transpose":
        return transpose_map(in_dim)
    if name == "reduction":
        return reduction_map(in_dim)
    mu = _param(params, "mu", (int, float), path)
    return lambda_mu_map(in_dim, float(mu))


def map_from_document(doc: Any, path: str = "") -> SuperMap:
    """
    Validate a parsed map document and build the SuperMap

    Raises:
        MapFileError: naming the offending field
    """
    if not isinstance(doc, dict):
        raise MapFileError("<root>", "expected an object", path)
    in_dim = _positive_int(doc, "in_dim", path)
    out_dim = _positive_int(doc, "out_dim", path)
    kind = doc.get("repr")
    if kind not in REPR_KINDS:
        raise MapFileError("repr", f"expected one of {', '.join(REPR_KINDS)}, got {kind!r}", path)

    if kind == "builtin":
        phi = _build_builtin(doc, in_dim, out_dim, path)
    else:
        data = doc.get("data")
        if not isinstance(data, list):
            raise MapFileError("data", "missing or not a list", path)
        try:
            if kind == "choi":
                size = (in_dim * out_dim) ** 2
                if len(data) != size:
                    raise MapFileError("data", f"choi data needs {size} entries, got {len(data)}", path)
                choi = pairs_to_complex(data, "data").reshape(in_dim * out_dim, in_dim * out_dim)
                phi = SuperMap(in_dim, out_dim, choi, Structure.UNKNOWN, "choi")
            else:
                if not data:
                    raise MapFileError("data", "kraus data needs at least one operator", path)
                ops = []
                for idx, op in enumerate(data):
                    if not isinstance(op, list) or len(op) != out_dim * in_dim:
                        raise MapFileError(f"data[{idx}]", f"Kraus operator needs {out_dim * in_dim} entries", path)
                    ops.append(pairs_to_complex(op, f"data[{idx}]").reshape(out_dim, in_dim))
                phi = from_kraus(ops)
        except ValueError as e:
            if isinstance(e, MapFileError):
                raise
            raise MapFileError("data", str(e), path)

    deviation = hermitian_deviation(phi.choi)
    if deviation > 1e-10 * (1.0 + float(np.max(np.abs(phi.choi)))):
        logger.warning("%s: Choi matrix is not Hermitian (deviation %.3e)", path or "map", deviation)
    label = doc.get("label")
    return phi.relabel(label) if isinstance(label, str) and label else phi


def parse_map_text(text: str, path: str = "") -> SuperMap:
    try:
        doc = json5.loads(text)
    except ValueError as e:
        # json5 reports <string>:line:column in its message
        raise MapFileError("<syntax>", str(e), path)
    return map_from_document(doc, path)


def parse_map_file(path: str) -> SuperMap:
    """
    Load a map file

    Args:
        path: Path to the map file

    Returns:
        SuperMap with validated dimensions
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise MapFileError("<file>", f"cannot read: {e.strerror or e}", path)
    return parse_map_text(text, path)


def map_to_document(phi: SuperMap) -> Dict[str, Any]:
    """Choi-form map document, loadable by parse_map_file"""
    doc = {
        "in_dim": phi.in_dim,
        "out_dim": phi.out_dim,
        "repr": "choi",
        "data": complex_to_pairs(phi.choi),
    }
    if phi.label:
        doc["label"] = phi.label
    return doc


def describe_map(phi: SuperMap) -> Dict[str, Any]:
    return {
        "label": phi.label,
        "in_dim": phi.in_dim,
        "out_dim": phi.out_dim,
        "structure": phi.structure.name,
        "hermitian_deviation": hermitian_deviation(phi.choi),
    }
