"""CFRIT MCP tools.

This package contains the MCP tool implementations. Each tool runs the
corresponding cfrit command in a worker thread and returns its JSON payload.
"""

from .experiments import run_parameter_sweep, verify_pipeline
from .keys import generate_keys
from .tuning import design_parameters, tune_gain

__all__ = [
    # Keys
    "generate_keys",
    # Tuning
    "tune_gain",
    "design_parameters",
    # Experiments
    "run_parameter_sweep",
    "verify_pipeline",
]
