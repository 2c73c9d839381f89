from __future__ import annotations

import re

import numpy as np

from graphlog.fingerprint import graph_fingerprint


def _arrays(weight: float = 1.0):
    edges = np.array([[0, 1], [1, 2]])
    return edges, np.array([weight, 1.0]), np.ones(3), np.zeros(3, dtype=bool)


def test_same_graph_same_id() -> None:
    assert graph_fingerprint("path3", *_arrays()) == graph_fingerprint("path3", *_arrays())


def test_different_weights_yield_different_ids() -> None:
    assert graph_fingerprint("path3", *_arrays(1.0)) != graph_fingerprint("path3", *_arrays(2.0))


def test_output_characters() -> None:
    graph_id = graph_fingerprint("some graph/with:odd chars", *_arrays())
    assert re.fullmatch(r"[A-Za-z0-9_]+__[0-9a-f]{12}", graph_id)


def test_escape_weights_change_the_id_only_when_nonzero() -> None:
    plain = graph_fingerprint("path3", *_arrays())
    assert graph_fingerprint("path3", *_arrays(), escape=np.zeros(3)) == plain
    assert graph_fingerprint("path3", *_arrays(), escape=np.array([0.0, 0.0, 1.0])) != plain
