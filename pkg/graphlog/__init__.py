"""Ground states of the logarithmic Schrodinger equation on weighted graphs."""
from .model import (
    EnergyReport,
    FiberReport,
    GraphFamilySpec,
    NormReport,
    Potential,
    PotentialFamilySpec,
    RunConfig,
    SeriesReport,
    SolverConfig,
    SolveTrace,
    VertexFunction,
    WeightedGraph,
)
from .errors import GraphlogError
from .graph_core import ball_truncate, dirichlet_energy, generate, gradient_form, integrate, laplacian
from .spaces import h_norm_sq, linf_embedding_check, log_energy, potential_generate
from .variational import derivative, energy, nehari_level_certificate, nehari_project
from .solvers import exhaustion_study, geometry_check, mountain_pass, nehari_descent
from .verify_examples import c_epsilon_estimate, example1_build, example1_verify, example2_verify

__all__ = [
    "EnergyReport",
    "FiberReport",
    "GraphFamilySpec",
    "NormReport",
    "Potential",
    "PotentialFamilySpec",
    "RunConfig",
    "SeriesReport",
    "SolverConfig",
    "SolveTrace",
    "VertexFunction",
    "WeightedGraph",
    "GraphlogError",
    "integrate",
    "laplacian",
    "gradient_form",
    "dirichlet_energy",
    "ball_truncate",
    "generate",
    "h_norm_sq",
    "log_energy",
    "linf_embedding_check",
    "potential_generate",
    "energy",
    "derivative",
    "nehari_project",
    "nehari_level_certificate",
    "nehari_descent",
    "mountain_pass",
    "geometry_check",
    "exhaustion_study",
    "example1_build",
    "example1_verify",
    "example2_verify",
    "c_epsilon_estimate",
]

__version__ = "0.1.0"
