"""FastMCP server setup for CFRIT.

This module creates and configures the MCP server with all tools.
"""

import logging
from typing import Any

from fastmcp import FastMCP

from .tools import (
    design_parameters,
    generate_keys,
    run_parameter_sweep,
    tune_gain,
    verify_pipeline,
)

logger = logging.getLogger(__name__)

# Create the FastMCP server
mcp = FastMCP(
    name="mcp-cfrit-crunchtools",
    version="0.1.0",
    instructions=(
        "Overflow-free parameter design and encrypted FRIT gain tuning"
        " over multiplicatively homomorphic ElGamal"
    ),
)


# Register key tools


@mcp.tool()
async def generate_keys_tool(
    kappa: int,
    out: str = "cfrit",
    seed: int | None = None,
) -> dict[str, Any]:
    """Generate an ElGamal key pair on the largest kappa-bit safe prime.

    Args:
        kappa: Bit length of q (at least 3)
        out: Path prefix; writes <out>.pub and <out>.key
        seed: Seed for the secret exponent (random if omitted)

    Returns:
        Group parameters, public value h and written paths
    """
    return await generate_keys(kappa=kappa, out=out, seed=seed)


# Register tuning tools


@mcp.tool()
async def tune_gain_tool(
    scenario: str = "reference",
    mode: str = "cfrit",
    epsilon: float | None = None,
    gamma: float | None = None,
    kappa: int | None = None,
    seed: int | None = None,
    threads: int | None = None,
    inject_norms: bool = False,
    out: str | None = None,
) -> dict[str, Any]:
    """Tune a state-feedback gain with plaintext (frit) or encrypted (cfrit) FRIT.

    Args:
        scenario: Bundled scenario name (reference, toy) or JSON file path
        mode: "frit" or "cfrit" (default: cfrit)
        epsilon: Tolerance override
        gamma: Quantization gain override
        kappa: Key size override
        seed: Seed for keys and encryption randomness
        threads: Worker processes
        inject_norms: Design with the scenario's reference norms
        out: Optional path for the JSON report

    Returns:
        Design result and gain report
    """
    return await tune_gain(
        scenario=scenario,
        mode=mode,
        epsilon=epsilon,
        gamma=gamma,
        kappa=kappa,
        seed=seed,
        threads=threads,
        inject_norms=inject_norms,
        out=out,
    )


@mcp.tool()
async def design_parameters_tool(
    scenario: str = "reference",
    epsilon: float | None = None,
    gamma: float | None = None,
    kappa: int | None = None,
    inject_norms: bool = False,
) -> dict[str, Any]:
    """Select the quantization gain and key size that rule out overflow.

    Args:
        scenario: Bundled scenario name (reference, toy) or JSON file path
        epsilon: Tolerance override
        gamma: Quantization gain override
        kappa: Key size override
        inject_norms: Design with the scenario's reference norms

    Returns:
        gamma_bar, kappa_bar, threshold, bound size and set memberships
    """
    return await design_parameters(
        scenario=scenario,
        epsilon=epsilon,
        gamma=gamma,
        kappa=kappa,
        inject_norms=inject_norms,
    )


# Register experiment tools


@mcp.tool()
async def run_parameter_sweep_tool(
    scenario: str = "reference",
    out: str = "sweep.csv",
    epsilon: float | None = None,
    seed: int | None = None,
    threads: int | None = None,
    grid_linear: bool = False,
    full_grid: bool = False,
    plaintext_quantized: bool = False,
    kappas: list[int] | None = None,
    gammas: list[float] | None = None,
) -> dict[str, Any]:
    """Sweep a (kappa, gamma) grid and classify every point.

    Args:
        scenario: Bundled scenario name (reference, toy) or JSON file path
        out: CSV output path
        epsilon: Tolerance override
        seed: Seed for per-point randomness
        threads: Worker processes
        grid_linear: Linearly spaced gammas
        full_grid: Every kappa and 51 gammas
        plaintext_quantized: Big-integer emulation instead of encryption
        kappas: Explicit kappa values
        gammas: Explicit gamma values

    Returns:
        Row count, per-class counts and output paths
    """
    return await run_parameter_sweep(
        scenario=scenario,
        out=out,
        epsilon=epsilon,
        seed=seed,
        threads=threads,
        grid_linear=grid_linear,
        full_grid=full_grid,
        plaintext_quantized=plaintext_quantized,
        kappas=kappas,
        gammas=gammas,
    )


@mcp.tool()
async def verify_pipeline_tool(
    scenario: str = "reference",
    seed: int | None = None,
    kappa: int | None = None,
) -> dict[str, Any]:
    """Run the self-checks (term-sum identity, round trip, no-overflow guarantee).

    Args:
        scenario: Bundled scenario name (reference, toy) or JSON file path
        seed: Seed for the randomized checks
        kappa: Key size that must clear the no-overflow bound

    Returns:
        Per-check results and the overall verdict
    """
    return await verify_pipeline(scenario=scenario, seed=seed, kappa=kappa)
