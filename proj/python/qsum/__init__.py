"""q-Borel/q-Laplace summation pipeline."""

from ._qsum import (
    ConfigError,
    DomainError,
    QsumError,
    example_config,
    format_double,
    formal,
    kappa,
    pi_q_k,
    solve,
    theta,
    theta_reciprocal,
    validate,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "QsumError",
    "example_config",
    "format_double",
    "formal",
    "kappa",
    "pi_q_k",
    "solve",
    "theta",
    "theta_reciprocal",
    "validate",
]
