"""Matrix files: ``{"d": int, "re": [[...]], "im": [[...]]}``, row-major ``d^2 x d^2``."""

from __future__ import annotations

import json
import math

import numpy as np

from .gates import GateFamilySpec
from .linalg import BipartiteGate, DomainError, ShapeError


def matrix_to_dict(u, d):
    u = np.asarray(u, dtype=complex)
    return {"d": int(d), "re": u.real.tolist(), "im": u.imag.tolist()}


def matrix_from_dict(obj):
    try:
        d = int(obj["d"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed matrix object: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2 or re.shape[0] != re.shape[1]:
        raise ShapeError(f"matrix parts must be equal square arrays, got {re.shape} and {im.shape}")
    if re.shape[0] != d * d:
        raise ShapeError(f"matrix size {re.shape[0]} does not match d={d}")
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise DomainError("matrix has non-finite entries")
    return re + 1j * im, d


def write_matrix(path, u, d):
    with open(path, "w") as fh:
        json.dump(matrix_to_dict(u, d), fh)
        fh.write("\n")


def read_matrix(path):
    """Read and validate a matrix file as a BipartiteGate."""
    with open(path) as fh:
        obj = json.load(fh)
    u, d = matrix_from_dict(obj)
    return BipartiteGate(u, d)


def load_gate_source(text_or_path):
    """Resolve a CLI gate argument.

    Accepts a path to a matrix file or gate-spec JSON file, or inline JSON.
    Returns ``(gate, spec_or_None)``.
    """
    text = text_or_path.strip()
    if not text.startswith(("{", "[")):
        with open(text_or_path) as fh:
            text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ShapeError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ShapeError("gate JSON must be an object")
    if "family" in obj:
        spec = GateFamilySpec.from_dict(obj)
        return spec.build(), spec
    u, d = matrix_from_dict(obj)
    return BipartiteGate(u, d), None


def json_safe(x):
    """Convert numpy scalars/arrays and non-finite floats for ``json.dumps``."""
    if isinstance(x, dict):
        return {k: json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [json_safe(v) for v in x]
    if isinstance(x, np.ndarray):
        return json_safe(x.tolist())
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x
