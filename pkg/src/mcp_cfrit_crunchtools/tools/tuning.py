"""Gain tuning and parameter design tools."""

import asyncio
from pathlib import Path
from typing import Any

from ..cli import cmd_design, cmd_tune, resolve_seed
from ..config import get_config
from ..errors import ValidationError


async def tune_gain(
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
    """Tune the state-feedback gain of a scenario.

    Args:
        scenario: Bundled scenario name (reference, toy) or JSON file path
        mode: "frit" for the plaintext gain, "cfrit" for the encrypted one
        epsilon: Tolerance override
        gamma: Quantization gain override
        kappa: Key size override
        seed: Seed for keys and encryption randomness (random if omitted)
        threads: Worker processes (default: CFRIT_THREADS)
        inject_norms: Design with the scenario's reference norms
        out: Optional path for the JSON report

    Returns:
        Run manifest, design result (cfrit only) and gain report
    """
    if mode not in ("frit", "cfrit"):
        raise ValidationError("mode must be 'frit' or 'cfrit'")
    workers = threads if threads is not None else get_config().threads
    return await asyncio.to_thread(
        cmd_tune,
        scenario,
        mode,
        epsilon=epsilon,
        gamma=gamma,
        kappa=kappa,
        seed=resolve_seed(seed),
        threads=workers,
        inject_norms=inject_norms,
        out=Path(out) if out else None,
    )


async def design_parameters(
    scenario: str = "reference",
    epsilon: float | None = None,
    gamma: float | None = None,
    kappa: int | None = None,
    inject_norms: bool = False,
) -> dict[str, Any]:
    """Select the quantization gain and key size without encrypting.

    Args:
        scenario: Bundled scenario name (reference, toy) or JSON file path
        epsilon: Tolerance override
        gamma: Quantization gain override
        kappa: Key size override
        inject_norms: Design with the scenario's reference norms

    Returns:
        Run manifest and design result
    """
    return await asyncio.to_thread(
        cmd_design,
        scenario,
        epsilon=epsilon,
        gamma=gamma,
        kappa=kappa,
        inject_norms=inject_norms,
    )
