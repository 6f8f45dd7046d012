"""Sweep and self-check tools."""

import asyncio
from pathlib import Path
from typing import Any

from ..cli import cmd_sweep, cmd_verify, resolve_seed
from ..config import get_config


async def run_parameter_sweep(
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
    """Classify every (kappa, gamma) grid point and write CSV plus a gnuplot script.

    Args:
        scenario: Bundled scenario name (reference, toy) or JSON file path
        out: CSV path; the plot script goes next to it with suffix .gp
        epsilon: Tolerance override
        seed: Seed for per-point randomness (random if omitted)
        threads: Worker processes (default: CFRIT_THREADS)
        grid_linear: Linearly spaced gammas instead of log-spaced
        full_grid: Every kappa in 250..300 and 51 gammas
        plaintext_quantized: Big-integer emulation instead of encryption
        kappas: Explicit kappa values
        gammas: Explicit gamma values

    Returns:
        Row count, per-class counts, output paths and the run manifest
    """
    workers = threads if threads is not None else get_config().threads
    return await asyncio.to_thread(
        cmd_sweep,
        scenario,
        Path(out),
        epsilon=epsilon,
        seed=resolve_seed(seed),
        threads=workers,
        linear=grid_linear,
        full=full_grid,
        plaintext_quantized=plaintext_quantized,
        kappas=kappas,
        gammas=gammas,
    )


async def verify_pipeline(
    scenario: str = "reference",
    seed: int | None = None,
    kappa: int | None = None,
) -> dict[str, Any]:
    """Run the self-checks on a scenario.

    Args:
        scenario: Bundled scenario name (reference, toy) or JSON file path
        seed: Seed for the randomized checks (random if omitted)
        kappa: Key size that must clear the no-overflow bound

    Returns:
        Per-check results and the overall verdict
    """
    report = await asyncio.to_thread(
        cmd_verify,
        scenario,
        seed=resolve_seed(seed),
        kappa=kappa,
        threads=get_config().threads,
    )
    return report.model_dump(mode="json")
