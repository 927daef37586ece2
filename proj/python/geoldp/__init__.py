"""Python access to the geoldp simulation and rate-function library."""

from ._core import (
    ConfigError,
    DegenerateTriple,
    DomainError,
    InsufficientData,
    NonConvergence,
    Regime,
    SingularScore,
    SparsityViolation,
    compute_morse,
    compute_T,
    make_regime,
    persistence_diagram,
    persistent_betti_1,
    rate,
    rate_poisson_closed_form,
    rho_from_radius,
    run_experiment,
    sample,
    score_law,
)

__all__ = [
    "ConfigError",
    "DegenerateTriple",
    "DomainError",
    "InsufficientData",
    "NonConvergence",
    "Regime",
    "SingularScore",
    "SparsityViolation",
    "compute_morse",
    "compute_T",
    "make_regime",
    "persistence_diagram",
    "persistent_betti_1",
    "rate",
    "rate_poisson_closed_form",
    "rho_from_radius",
    "run_experiment",
    "sample",
    "score_law",
]
