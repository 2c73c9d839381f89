"""Command line interface for graphlog."""
from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .errors import (
    CertificateError,
    ConfigError,
    EnergyIdentityError,
    GeometryError,
    GraphlogError,
    NonFiniteEnergyError,
)
from .graph_core import generate
from .loader import (
    build_graph,
    build_potential,
    load_config,
    load_graph_json,
    parse_graph_spec,
    parse_init_spec,
    run_config_from_dict,
)
from .model import GraphFamilySpec, RunConfig
from .solvers import exhaustion_study, mountain_pass, nehari_descent
from .variational import energy, level_lower_bound, nehari_level_certificate, nehari_project, random_trial_pool
from .verify_examples import (
    CONVERGENT,
    DIVERGENT,
    INCONCLUSIVE,
    c_epsilon_estimate,
    example1_verify,
    example2_verify,
    validate_c_epsilon,
)
from .writers import (
    format_series_table,
    rows_as_dicts,
    write_dot,
    write_exhaustion_csv,
    write_fiber_csv,
    write_graph_json,
    write_series_reports,
    write_summary_json,
    write_trace_csv,
)


log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_INCONCLUSIVE = 3

EXPECTED_VERDICTS = (CONVERGENT, CONVERGENT, DIVERGENT)
COMPARE_RTOL = 1e-4


def _prepare_output_dir(path_value: str, create_dirs: bool) -> Path:
    path = Path(path_value)
    if path.exists():
        if not path.is_dir():
            raise SystemExit(f"--out must be a directory: {path}")
        return path
    log.warning("--out does not exist: %s", path)
    if not create_dirs:
        raise SystemExit("Output directory does not exist. Create it manually or re-run with --create-dirs.")
    path.mkdir(parents=True, exist_ok=True)
    log.info("Created missing output directory: %s", path)
    return path


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    doc: Dict[str, Any] = load_config(args.config) if args.config else {}
    if args.graph:
        doc["graph"] = args.graph
    if args.potential:
        doc["potential"] = args.potential
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.center is not None:
        doc["center"] = args.center
    if getattr(args, "compare", None):
        doc["compare"] = args.compare

    solver = dict(doc.get("solver") or {})
    for flag, key in (
        ("method", "method"),
        ("max_iters", "max_iters"),
        ("grad_tol", "grad_tol"),
        ("mp_tol", "mp_tol"),
        ("pool_size", "pool_size"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            solver[key] = value
    if args.seed is not None:
        solver["seed"] = args.seed
    if args.init:
        solver.update(parse_init_spec(args.init))
    if getattr(args, "radii", None):
        solver["radius_schedule"] = [int(r) for r in args.radii.split(",") if r.strip()]
    if solver:
        doc["solver"] = solver

    outputs = dict(doc.get("outputs") or {})
    if args.out:
        outputs["directory"] = args.out
    if args.no_csv:
        outputs["csv"] = False
    if args.no_json:
        outputs["json"] = False
    if args.dot:
        outputs["dot"] = True
    if outputs:
        doc["outputs"] = outputs
    return doc


def _run_config(args: argparse.Namespace) -> RunConfig:
    run = run_config_from_dict(_overrides(args))
    if args.a0 is not None:
        if run.potential is None:
            raise ConfigError("--a0 needs a potential")
        run.potential.a0 = args.a0
    return run


def _compare(level: float, prior_path: str) -> Dict[str, Any]:
    try:
        prior = json.loads(Path(prior_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read summary to compare against {prior_path}: {exc}") from exc
    prior_level = prior.get("d_hat", prior.get("c_hat"))
    if prior_level is None:
        raise ConfigError(f"{prior_path} has neither d_hat nor c_hat")
    diff = abs(level - prior_level)
    within = diff <= COMPARE_RTOL * max(abs(prior_level), 1.0)
    log.info("Level %.12g vs prior %.12g: |diff| = %.3e (%s)", level, prior_level, diff, "agree" if within else "differ")
    return {"prior": prior_level, "abs_diff": diff, "within": within}


def run_solve(run: RunConfig, create_dirs: bool = False) -> int:
    """Solve one instance and write solution, trace and summary files."""

    g, doc = build_graph(run)
    a = build_potential(run, g, doc)
    cfg = run.solver
    out_dir = _prepare_output_dir(run.outputs.directory, create_dirs)
    log.info("Solving on %s (%d vertices) with %s, potential %s", g.name, g.n, cfg.method, a.label)

    summary: Dict[str, Any] = {"method": cfg.method, "graph": g.name, "vertices": g.n, "seed": cfg.seed}
    if cfg.method == "mountain_pass":
        u, trace, c_hat = mountain_pass(g, a, cfg)
        level = c_hat
        summary["c_hat"] = c_hat
        summary["polish_terminated"] = trace.polish_termination
    else:
        u, trace = nehari_descent(g, a, cfg)
        level = trace.final.J
        summary["d_hat"] = level

    report = energy(g, a, u)
    summary.update(
        {
            "J": report.J,
            "residual_linf": report.residual_linf,
            "residual_l2": report.residual_l2,
            "nehari_defect": report.nehari_defect,
            "h_norm_sq": report.h_norm_sq,
            "l2_sq": report.l2_sq,
            "cerami_product": trace.final.cerami_product,
            "iters": trace.iterations,
            "terminated": trace.termination,
            "residual_linf_within": trace.linf_within,
        }
    )

    pool = random_trial_pool(g, cfg.pool_size, np.random.default_rng(cfg.seed))
    try:
        nehari_level_certificate(g, a, u, pool, nehari_tol=max(cfg.nehari_tol, 1e-10))
        summary["certified"] = True
    except CertificateError as exc:
        log.warning("Nehari certificate failed: %s", exc)
        summary["certified"] = False
    try:
        bound = level_lower_bound(g, a, u)
        summary["norm_lower_bound"] = {"theta": bound.theta, "bound": bound.bound, "h_norm": bound.h_norm, "holds": bound.holds}
    except CertificateError as exc:
        log.warning("Norm lower bound skipped: %s", exc)
    if run.compare:
        summary["compare"] = _compare(level, run.compare)

    if run.outputs.json:
        write_graph_json(g, out_dir / "solution.json", a=a.values, u=u.values, a0=a.a0)
        write_summary_json(summary, out_dir / "summary.json")
    if run.outputs.csv:
        write_trace_csv(trace, out_dir / "trace.csv")
        write_fiber_csv(nehari_project(g, a, u), out_dir / "fiber.csv")
    if run.outputs.dot:
        write_dot(g, out_dir / "solution.dot", u=u.values)

    if not trace.converged:
        log.warning("Solver terminated with %s; artifacts written to %s", trace.termination, out_dir)
        return EXIT_NOT_CONVERGED
    if trace.polish_termination not in (None, "converged"):
        log.warning("Mountain-pass polish terminated with %s; artifacts written to %s", trace.polish_termination, out_dir)
        return EXIT_NOT_CONVERGED
    log.info("Level %.12g reached in %d iterations", level, trace.iterations)
    return EXIT_OK


def run_exhaustion(run: RunConfig, create_dirs: bool = False) -> int:
    """Solve over ``radius_schedule`` and write one row per radius."""

    if run.graph is None:
        raise ConfigError("exhaustion needs a graph family spec, not a graph file")
    if not run.solver.radius_schedule:
        raise ConfigError("exhaustion needs a radius schedule (--radii or solver.radius_schedule)")
    if run.potential is None:
        raise ConfigError("exhaustion needs a potential family")
    out_dir = _prepare_output_dir(run.outputs.directory, create_dirs)
    rows = exhaustion_study(run.graph, run.potential, run.solver, center=run.center)
    if run.outputs.csv:
        write_exhaustion_csv(rows, out_dir / "exhaustion.csv")
    if run.outputs.json:
        write_summary_json({"graph": run.graph.kind, "rows": rows_as_dicts(rows)}, out_dir / "summary.json")
    if all(r.converged for r in rows):
        return EXIT_OK
    log.warning("Not every radius converged: %s", [r.radius for r in rows if not r.converged])
    return EXIT_NOT_CONVERGED


def _decade_schedule(n_max: int) -> List[int]:
    schedule = []
    n = 10
    while n < n_max:
        schedule.append(n)
        n *= 10
    schedule.append(n_max)
    return schedule


def _parse_n(text: str) -> int:
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"--n must be a number, got {text!r}") from exc
    if not value.is_integer() or value < 3:
        raise ConfigError(f"--n must be an integer >= 3, got {text!r}")
    return int(value)


def run_verify(args: argparse.Namespace) -> int:
    """Print series tables or the log-inequality constant; exit 3 when inconclusive."""

    if args.example == "cepsilon":
        try:
            eps = float(args.eps)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"--eps must be a number, got {args.eps!r}") from exc
        c = c_epsilon_estimate(eps, samples=args.samples, seed=args.seed or 0)
        violations = validate_c_epsilon(eps, c, samples=args.samples, seed=(args.seed or 0) + 1)
        print(f"C_eps(eps={eps:g}) = {c:.10g}; validated on {args.samples} samples, {violations} violations")
        return EXIT_OK if violations == 0 else EXIT_NOT_CONVERGED

    n_max = _parse_n(args.n)
    schedule = _decade_schedule(n_max)
    if args.example == "example1":
        reports = example1_verify(schedule)
    else:
        builder = None
        if args.random_measure:
            seed = args.seed or 0

            def builder(n: int):
                return generate(GraphFamilySpec(kind="half_line", n=n, seed=seed, measure_range=(1.0, 2.0)))

        reports = example2_verify(schedule, builder=builder)

    for report in reports:
        print(format_series_table(report))
    if args.out:
        out_dir = _prepare_output_dir(args.out, args.create_dirs)
        write_series_reports(reports, out_dir, args.example)

    verdicts = tuple(r.verdict for r in reports)
    if INCONCLUSIVE in verdicts:
        log.error("Inconclusive verdicts %s at N=%d; raise --n (at least 10) to certify", verdicts, n_max)
        return EXIT_INCONCLUSIVE
    if verdicts != EXPECTED_VERDICTS:
        log.error("Unexpected verdicts %s", verdicts)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def run_export_dot(args: argparse.Namespace) -> int:
    family, path = parse_graph_spec(args.graph)
    u = None
    if path is not None:
        doc = load_graph_json(path)
        g, u = doc.graph, doc.u
    else:
        g = build_graph(RunConfig(graph=family))[0]
    write_dot(g, args.output, u=u)
    return EXIT_OK


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON or YAML run configuration")
    parser.add_argument("--graph", help="Graph spec, e.g. path:30, lattice2d:4, file:graph.json")
    parser.add_argument("--potential", help="Potential spec, e.g. constant:-0.5, coercive:1:-0.5:0")
    parser.add_argument("--a0", type=float, help="Declared lower bound a0 of the potential")
    parser.add_argument("--method", help="nehari (nehari_descent) or mountain_pass")
    parser.add_argument("--init", help="positive_bump[:VERTEX[:HEIGHT]], constant[:C] or random[:SCALE]")
    parser.add_argument("--max-iters", dest="max_iters", type=int)
    parser.add_argument("--grad-tol", dest="grad_tol", type=float)
    parser.add_argument("--mp-tol", dest="mp_tol", type=float)
    parser.add_argument("--pool-size", dest="pool_size", type=int, help="Random trials for the Nehari certificate")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--center", type=int, help="Center vertex for truncations")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--no-csv", action="store_true", help="Skip CSV outputs")
    parser.add_argument("--no-json", action="store_true", help="Skip JSON outputs")
    parser.add_argument("--dot", action="store_true", help="Also write a DOT file of the solution")


def _add_create_dirs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--create-dirs",
        action="store_true",
        help="Create missing output directories before writing results",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Ground states of -Lap u + a u = u log u^2 on weighted graphs")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["ERROR", "WARNING", "INFO", "DEBUG"],
        help="Logging verbosity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Solve one instance")
    _add_run_options(solve)
    solve.add_argument("--compare", help="Prior summary.json whose level is compared to this run")
    _add_create_dirs(solve)

    exhaustion = sub.add_parser("exhaustion", help="Solve on growing ball truncations")
    _add_run_options(exhaustion)
    exhaustion.add_argument("--radii", help="Comma-separated radius schedule, e.g. 10,20,30")
    _add_create_dirs(exhaustion)

    verify = sub.add_parser("verify", help="Series checks and the log-inequality constant")
    verify.add_argument("example", choices=["example1", "example2", "cepsilon"])
    verify.add_argument("--n", default="1e6", help="Largest partial-sum index (accepts 1e6)")
    verify.add_argument("--eps", default="0.5", help="Exponent gap for cepsilon")
    verify.add_argument("--samples", type=int, default=10**5, help="Validation samples for cepsilon")
    verify.add_argument("--random-measure", action="store_true", help="example2 on a half-line with mu in [1, 2]")
    verify.add_argument("--seed", type=int)
    verify.add_argument("--out", help="Directory for series JSON/CSV")
    _add_create_dirs(verify)

    dot = sub.add_parser("export-dot", help="Export a graph (and attached u) to DOT")
    dot.add_argument("--graph", required=True, help="Graph spec or file:PATH of a graph JSON")
    dot.add_argument("-o", "--output", required=True, help="Output DOT path")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper()))

    try:
        if args.command == "solve":
            return run_solve(_run_config(args), create_dirs=args.create_dirs)
        if args.command == "exhaustion":
            return run_exhaustion(_run_config(args), create_dirs=args.create_dirs)
        if args.command == "verify":
            return run_verify(args)
        return run_export_dot(args)
    except (GeometryError, NonFiniteEnergyError, EnergyIdentityError) as exc:
        log.error("Solver aborted: %s", exc)
        return EXIT_NOT_CONVERGED
    except (ValueError, GraphlogError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
