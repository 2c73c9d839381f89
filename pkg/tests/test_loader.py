from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from graphlog.errors import ConfigError, GraphValidationError
from graphlog.graph_core import ball_truncate, generate
from graphlog.loader import (
    build_graph,
    build_potential,
    load_config,
    load_graph_json,
    parse_graph_spec,
    parse_init_spec,
    parse_potential_spec,
    run_config_from_dict,
    solver_config,
)
from graphlog.model import GraphFamilySpec, RunConfig
from graphlog.writers import write_graph_json


def test_parse_graph_spec() -> None:
    spec, path = parse_graph_spec("lattice2d:4")
    assert path is None
    assert (spec.kind, spec.n) == ("lattice2d", 4)
    spec, _ = parse_graph_spec("random_tree:20:7")
    assert spec.seed == 7
    assert parse_graph_spec("file:graph.json") == (None, "graph.json")
    spec, _ = parse_graph_spec("single:2.5")
    assert (spec.kind, spec.measure) == ("single", 2.5)


@pytest.mark.parametrize("text", ["hypercube:3", "path", "path:x", "path:3:1:2", "path:2.5"])
def test_malformed_graph_specs(text: str) -> None:
    with pytest.raises(ConfigError):
        parse_graph_spec(text)


def test_parse_potential_spec() -> None:
    spec = parse_potential_spec("coercive:1:-0.5:3")
    assert (spec.kind, spec.alpha, spec.shift, spec.center) == ("coercive", 1.0, -0.5, 3)
    spec = parse_potential_spec("reciprocal_summable:3")
    assert spec.power == 3.0
    assert parse_potential_spec("constant:-0.25").value == -0.25
    with pytest.raises(ConfigError):
        parse_potential_spec("constant")
    with pytest.raises(ConfigError):
        parse_potential_spec("harmonic:1")


def test_parse_init_spec() -> None:
    assert parse_init_spec("positive_bump:3:2") == {"init": "positive_bump", "init_vertex": 3, "init_height": 2.0}
    assert parse_init_spec("random:0.1") == {"init": "random", "init_scale": 0.1}
    with pytest.raises(ConfigError):
        parse_init_spec("gaussian")


def test_solver_config_aliases_and_init_strings() -> None:
    cfg = solver_config({"method": "mp", "init": "constant:0.5"})
    assert cfg.method == "mountain_pass"
    assert (cfg.init, cfg.init_constant) == ("constant", 0.5)
    with pytest.raises(ConfigError):
        solver_config({"method": "newton"})
    with pytest.raises(ConfigError):
        solver_config({"shrink": 2.0})


def test_unknown_keys_are_rejected() -> None:
    with pytest.raises(ConfigError, match="bogus"):
        run_config_from_dict({"bogus": 1})
    with pytest.raises(ConfigError, match="tolerance"):
        run_config_from_dict({"solver": {"tolerance": 1e-8}})
    with pytest.raises(ConfigError, match="format"):
        run_config_from_dict({"outputs": {"format": "xml"}})


def test_top_level_seed_reaches_solver_and_graph() -> None:
    run = run_config_from_dict({"graph": "random_tree:10", "seed": 9, "potential": "constant:0"})
    assert run.solver.seed == 9
    assert run.graph.seed == 9


def test_yaml_config(tmp_path: Path) -> None:
    path = tmp_path / "run.yaml"
    path.write_text(
        "graph:\n  kind: cycle\n  n: 6\npotential: constant:0.5\nsolver:\n  max_iters: 50\noutputs:\n  dot: true\n",
        encoding="utf-8",
    )
    run = run_config_from_dict(load_config(path))
    assert run.graph == GraphFamilySpec(kind="cycle", n=6)
    assert run.solver.max_iters == 50
    assert run.outputs.dot is True


def test_exactly_one_graph_source() -> None:
    with pytest.raises(ConfigError):
        build_graph(RunConfig())
    with pytest.raises(ConfigError):
        build_graph(RunConfig(graph=GraphFamilySpec(kind="path", n=3), graph_file="g.json"))


def test_graph_json_round_trip(tmp_path: Path) -> None:
    g = generate(GraphFamilySpec(kind="random_tree", n=9, seed=2, weight_range=(0.3, 3.0), measure_range=(1.0, 2.0)))
    a = np.linspace(-0.5, 1.5, g.n)
    u = np.random.default_rng(0).standard_normal(g.n)
    path = tmp_path / "graph.json"
    write_graph_json(g, path, a=a, u=u, a0=-0.5)
    doc = load_graph_json(path)
    assert doc.graph.graph_id == g.graph_id
    assert doc.u.tolist() == u.tolist()
    assert doc.a0 == -0.5

    run = run_config_from_dict({"graph": f"file:{path}", "potential": "inline"})
    loaded, loaded_doc = build_graph(run)
    pot = build_potential(run, loaded, loaded_doc)
    assert pot.values.tolist() == a.tolist()
    assert pot.a0 == -0.5


def test_graph_json_needs_dense_ids(tmp_path: Path) -> None:
    path = tmp_path / "graph.json"
    path.write_text('{"vertices": [{"id": 0}, {"id": 2}], "edges": []}', encoding="utf-8")
    with pytest.raises(GraphValidationError, match="dense"):
        load_graph_json(path)


def test_inline_potential_needs_values(tmp_path: Path) -> None:
    path = tmp_path / "graph.json"
    write_graph_json(generate(GraphFamilySpec(kind="path", n=3)), path)
    run = run_config_from_dict({"graph": f"file:{path}", "potential": "inline"})
    g, doc = build_graph(run)
    with pytest.raises(ConfigError, match="inline"):
        build_potential(run, g, doc)


def test_truncated_graph_json_keeps_escape_weights(tmp_path: Path) -> None:
    g = ball_truncate(generate(GraphFamilySpec(kind="lattice2d", n=5)), 12, 1)
    path = tmp_path / "ball.json"
    write_graph_json(g, path)
    loaded = load_graph_json(path).graph
    assert loaded.escape.tolist() == g.escape.tolist()
    assert loaded.graph_id == g.graph_id
