"""Key generation tool."""

import asyncio
from pathlib import Path
from typing import Any

from ..cli import cmd_keygen, resolve_seed


async def generate_keys(
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
        Group parameters, public value h, written paths and the run manifest
    """
    return await asyncio.to_thread(cmd_keygen, kappa, Path(out), resolve_seed(seed))
