"""JSON encoding of operators, grid functions, boundary tables and result files."""
import json
import math

import numpy as np

from semigroup_calculus.errors import BackendError, HalfPlaneError
from semigroup_calculus.hardy import BoundaryTable


def _pair(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _number(x):
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if math.isnan(x):
        return "nan"
    return x


def operator_to_json(op):
    op = np.asarray(op, dtype=complex)
    return {"dim": int(op.shape[0]), "entries": [_pair(z) for z in op.ravel()]}


def operator_from_json(obj):
    try:
        dim = int(obj["dim"])
        entries = np.array([complex(re, im) for re, im in obj["entries"]], dtype=complex)
    except (KeyError, TypeError, ValueError) as e:
        raise BackendError(f"malformed matrix JSON: {e}") from e
    if dim < 1 or entries.size != dim * dim:
        raise BackendError(f"matrix JSON has {entries.size} entries for dim {dim}")
    return entries.reshape(dim, dim)


def read_operator(path):
    with open(path, "r", encoding="utf-8") as f:
        try:
            return operator_from_json(json.load(f))
        except json.JSONDecodeError as e:
            raise BackendError(f"matrix file {path} is not valid JSON: {e}") from e


def grid_function_to_json(f):
    return {"step": float(f.grid.step), "values": [_pair(z) for z in f.values]}


def boundary_table_to_json(table):
    """[[y, re, im], ...] rows of a boundary table."""
    return [[float(y), *_pair(v)] for y, v in zip(table.y, table.values)]


def read_boundary_table(path, alpha):
    """Boundary table from a JSON file of [y, re, im] rows with increasing y.

    The file carries no tail information, so the tail bound is infinite.
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            rows = np.asarray(json.load(f), dtype=float)
        except json.JSONDecodeError as e:
            raise HalfPlaneError(f"boundary table {path} is not valid JSON: {e}") from e
        except (TypeError, ValueError) as e:
            raise HalfPlaneError(f"boundary table {path} has non-numeric rows: {e}") from e
    if rows.ndim != 2 or rows.shape[1] != 3 or rows.shape[0] < 2:
        raise HalfPlaneError(f"boundary table {path} needs at least two [y, re, im] rows")
    if np.any(np.diff(rows[:, 0]) <= 0):
        raise HalfPlaneError(f"boundary table {path} is not sorted by y")
    return BoundaryTable(rows[:, 0], rows[:, 1] + 1j * rows[:, 2], float(alpha), math.inf)


def result_payload(value, budget, **meta):
    """The CLI output document: {result, budget, meta}."""
    if hasattr(value, "grid"):
        result = grid_function_to_json(value)
    elif isinstance(value, np.ndarray) and value.ndim == 2:
        result = operator_to_json(value)
    elif isinstance(value, (list, tuple, np.ndarray)):
        result = [_pair(z) for z in value]
    else:
        result = value
    return {"result": result, "budget": _number(budget), "meta": meta}


def write_json(path, payload):
    """Write with sorted keys and a fixed layout so reruns are byte-identical."""
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path in (None, "-"):
        return text
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    return text


def suite_to_json(entries):
    """Verification report rows with non-finite residuals spelled out."""
    return [
        {
            "id": e["id"],
            "description": e["description"],
            "residual": _number(e["residual"]),
            "budget": _number(e["budget"]),
            "pass": bool(e["pass"]),
        }
        for e in entries
    ]


def complex_to_json(z):
    return _pair(z)
