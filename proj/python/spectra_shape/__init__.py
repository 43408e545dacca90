"""Shape derivatives of Helmholtz and Maxwell eigenvalue clusters.

The heavy lifting lives in the compiled ``_core`` module. The helpers here
accept Python dicts for configs and return parsed JSON reports.
"""

import json

from ._core import (
    REPORT_SCHEMA_VERSION,
    ConfigError,
    ContractViolation,
    DegenerateProblem,
    Error,
    InadmissibleParameter,
    InvalidGeometry,
    InvariantViolation,
    ParseError,
    SizeLimitError,
    ValidationError,
    binomial,
    branch_slopes,
    elementary_symmetric,
    hat_lambda,
    reconstruct_lambda,
    rellich_matrix,
    solve_pencil,
    strip_timestamp,
    subspace_gap,
)
from ._core import run as _run

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "ConfigError",
    "ContractViolation",
    "DegenerateProblem",
    "Error",
    "InadmissibleParameter",
    "InvalidGeometry",
    "InvariantViolation",
    "ParseError",
    "SizeLimitError",
    "ValidationError",
    "abstract",
    "binomial",
    "branch_slopes",
    "dshape",
    "eig",
    "elementary_symmetric",
    "hat_lambda",
    "reconstruct_lambda",
    "rellich_matrix",
    "run",
    "solve_pencil",
    "strip_timestamp",
    "study",
    "subspace_gap",
    "verify",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def run(config, command, threads=1, seed=0, timestamp=True):
    """Runs a subcommand on a config (dict or JSON text) and returns the report dict."""
    return json.loads(_run(_text(config), command, threads, seed, timestamp))


def eig(config, **kwargs):
    return run(config, "eig", **kwargs)


def dshape(config, **kwargs):
    return run(config, "dshape", **kwargs)


def verify(config, **kwargs):
    return run(config, "verify", **kwargs)


def study(config, **kwargs):
    return run(config, "study", **kwargs)


def abstract(config, **kwargs):
    return run(config, "abstract", **kwargs)
