"""Bowen parameters, pressure and Julia sets of finitely generated rational semigroups.

Generators are given as coefficient lists, constant term first: ``[0, 0, 1]``
is z^2. A ``(num, den)`` tuple gives a rational map.
"""

from ._bowen import (
    Config,
    ConfigError,
    CriticalPreimage,
    Error,
    InsufficientPoints,
    InvalidInstance,
    InvalidMap,
    NoRepellingSeed,
    NonConvergence,
    NoSignChange,
    NotHyperbolic,
    bowen_parameter,
    box_dimension,
    check_hyperbolic,
    julia_cloud,
    lyapunov_and_entropy,
    osc_check,
    pressure,
    run_cli,
    set_threads,
    sweep,
    threads,
)

__all__ = [
    "Config",
    "ConfigError",
    "CriticalPreimage",
    "Error",
    "InsufficientPoints",
    "InvalidInstance",
    "InvalidMap",
    "NoRepellingSeed",
    "NonConvergence",
    "NoSignChange",
    "NotHyperbolic",
    "bowen_parameter",
    "box_dimension",
    "check_hyperbolic",
    "julia_cloud",
    "lyapunov_and_entropy",
    "osc_check",
    "pressure",
    "run_cli",
    "set_threads",
    "sweep",
    "threads",
]
