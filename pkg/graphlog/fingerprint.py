"""Stable identifiers for graphs, derived from their content."""
from __future__ import annotations

import hashlib
import re
from typing import Optional

import numpy as np


def graph_fingerprint(
    name: str,
    edges: np.ndarray,
    weights: np.ndarray,
    measure: np.ndarray,
    boundary: np.ndarray,
    max_base_len: int = 32,
    hash_len: int = 12,
    escape: Optional[np.ndarray] = None,
) -> str:
    """Convert graph content into a stable identifier.

    The identifier uses a readable base derived from the family name and
    appends a short hash of the edge, weight, measure and boundary arrays, so
    two graphs share an id only when their data is bit-identical. Escape
    weights are hashed only when some are nonzero.
    """

    normalized = re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_")
    if not normalized:
        normalized = "graph"
    if max_base_len > 0:
        normalized = normalized[:max_base_len]

    arrays = [(edges, np.int64), (weights, np.float64), (measure, np.float64), (boundary, np.bool_)]
    if escape is not None and np.any(escape):
        arrays.append((escape, np.float64))
    digest = hashlib.sha1()
    for arr, dtype in arrays:
        data = np.ascontiguousarray(arr, dtype=dtype)
        digest.update(str(data.shape).encode("utf-8"))
        digest.update(data.tobytes())
    hexdigest = digest.hexdigest()
    hash_part = hexdigest if hash_len <= 0 else hexdigest[:hash_len]
    return f"{normalized}__{hash_part}"


__all__ = ["graph_fingerprint"]
