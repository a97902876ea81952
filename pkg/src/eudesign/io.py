"""JSON design files: {"dimension", "points", "weights", "metadata"}.

Floats are written with Python's shortest round-trip repr, so a write/read
cycle reproduces every double exactly.
"""

import json
import math
from pathlib import Path

import numpy as np

from eudesign.design.pointset import WeightedPointSet

__all__ = ["MalformedDesignError", "design_to_dict", "design_from_dict", "read_design", "write_design", "to_jsonable"]

FIELDS = ("dimension", "points", "weights", "metadata")


class MalformedDesignError(ValueError):
    pass


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def design_to_dict(X):
    return {
        "dimension": X.n,
        "points": X.points.tolist(),
        "weights": X.weights.tolist(),
        "metadata": to_jsonable(X.metadata),
    }


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedDesignError(f"{where}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise MalformedDesignError(f"{where}: non-finite value")
    return float(v)


def design_from_dict(doc):
    if not isinstance(doc, dict):
        raise MalformedDesignError("design file must hold a JSON object")
    missing = [f for f in FIELDS[:3] if f not in doc]
    if missing:
        raise MalformedDesignError(f"missing field(s): {', '.join(missing)}")
    n = doc["dimension"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise MalformedDesignError("dimension must be a positive integer")
    pts, wts = doc["points"], doc["weights"]
    if not isinstance(pts, list) or not pts:
        raise MalformedDesignError("points must be a non-empty list")
    if not isinstance(wts, list) or len(wts) != len(pts):
        raise MalformedDesignError(f"{len(pts)} points but weights has a different length")
    rows = []
    for i, p in enumerate(pts):
        if not isinstance(p, list) or len(p) != n:
            raise MalformedDesignError(f"point {i + 1} does not have {n} coordinates")
        rows.append([_number(c, f"point {i + 1}") for c in p])
    w = [_number(v, f"weight {i + 1}") for i, v in enumerate(wts)]
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise MalformedDesignError("metadata must be an object")
    try:
        return WeightedPointSet(np.array(rows), np.array(w), meta)
    except ValueError as exc:
        raise MalformedDesignError(str(exc)) from None


def write_design(X, path):
    path = Path(path)
    path.write_text(json.dumps(design_to_dict(X), indent=1) + "\n")
    return path


def read_design(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedDesignError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDesignError(f"{path}: invalid JSON ({exc.msg})") from None
    return design_from_dict(doc)
