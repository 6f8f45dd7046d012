"""Quantizer between reals and the quadratic-residue group.

A real x is encoded in two stages:

    x --encode_sign_mag--> (zeta, z) --lift_to_group--> (x1, x2) in G^2

where zeta is a sign token (1 for x >= 0, 2 otherwise) and z = round_pos(gamma|x|)
mod q. Decoding reverses the stages with drop_from_group and decode_sign_mag.
ecd and dcd are the compositions, extended elementwise to arrays.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import CorruptCiphertextError, DomainError, ValidationError
from .modmath import Real, SafePrimePair, legendre, minimal_residue, round_pos

logger = logging.getLogger(__name__)

SIGN_POSITIVE = 1
SIGN_NEGATIVE = 2


@dataclass(frozen=True)
class QuantizationConfig:
    """Quantization gain and the safe-prime pair defining the plaintext group."""

    gamma: float
    primes: SafePrimePair

    def __post_init__(self) -> None:
        if not np.isfinite(self.gamma) or self.gamma < 1:
            raise ValidationError(f"gamma must be a finite real >= 1, got {self.gamma}")

    @property
    def q(self) -> int:
        return self.primes.q

    @property
    def p(self) -> int:
        return self.primes.p


@dataclass(frozen=True)
class EncodedPair:
    """Sign token and magnitude. `wrapped` marks a magnitude reduced mod q."""

    zeta: int
    z: int
    wrapped: bool = False


@dataclass(frozen=True)
class GroupPair:
    """Two elements of the order-q subgroup of Z_p^*."""

    x1: int
    x2: int


def quantize(x: Real, gamma: Real) -> int:
    """round_pos(gamma|x|) without the modular reduction, in exact arithmetic."""
    return round_pos(Fraction(gamma) * abs(Fraction(x)))


def encode_sign_mag(x: Real, cfg: QuantizationConfig) -> EncodedPair:
    """Map a real to (sign token, magnitude mod q).

    A magnitude that reaches q is reduced mod q as written, flagged on the
    result and logged; it is not an error at this level.
    """
    zeta = SIGN_POSITIVE if x >= 0 else SIGN_NEGATIVE
    magnitude = quantize(x, cfg.gamma)
    if magnitude >= cfg.q:
        logger.warning("Encoding of %r wraps: round(gamma|x|) >= q", x)
        return EncodedPair(zeta=zeta, z=magnitude % cfg.q, wrapped=True)
    return EncodedPair(zeta=zeta, z=magnitude)


def decode_sign_mag(e: EncodedPair, cfg: QuantizationConfig) -> float:
    """Map (zeta, z) back to (zeta/3)_L * z / gamma."""
    return legendre(e.zeta, 3) * float(Fraction(e.z) / Fraction(cfg.gamma))


def lift_to_group(e: EncodedPair, primes: SafePrimePair) -> GroupPair:
    """Multiply each component by its Legendre symbol mod p, landing in G.

    Raises:
        DomainError: If a component is 0 mod p (e.g. a magnitude wrapped to 0).
    """
    p = primes.p
    return GroupPair(
        x1=(legendre(e.zeta, p) * e.zeta) % p,
        x2=(legendre(e.z, p) * e.z) % p,
    )


def drop_from_group(gp: GroupPair, primes: SafePrimePair) -> EncodedPair:
    """Absolute minimal residue of each component.

    Raises:
        CorruptCiphertextError: If the recovered sign token is not 1 or 2.
    """
    p = primes.p
    for component in (gp.x1, gp.x2):
        if not 0 < component < p:
            raise DomainError(f"group element must lie in [1, p), got {component}")
    zeta = abs(minimal_residue(gp.x1, p))
    if zeta not in (SIGN_POSITIVE, SIGN_NEGATIVE):
        raise CorruptCiphertextError(f"recovered sign token {zeta} is not 1 or 2")
    return EncodedPair(zeta=zeta, z=abs(minimal_residue(gp.x2, p)))


def ecd(x: Real, cfg: QuantizationConfig) -> GroupPair:
    """Encode a real into G^2."""
    return lift_to_group(encode_sign_mag(x, cfg), cfg.primes)


def dcd(gp: GroupPair, cfg: QuantizationConfig) -> float:
    """Decode an element of G^2 to a real."""
    return decode_sign_mag(drop_from_group(gp, cfg.primes), cfg)


def ecd_array(values: ArrayLike, cfg: QuantizationConfig) -> list[GroupPair]:
    """Elementwise ecd over a flattened array (row-major)."""
    return [ecd(float(v), cfg) for v in np.asarray(values, dtype=np.float64).ravel()]


def dcd_array(
    pairs: list[GroupPair], cfg: QuantizationConfig, shape: tuple[int, ...] | None = None
) -> NDArray[np.float64]:
    """Elementwise dcd, optionally reshaped."""
    out = np.array([dcd(gp, cfg) for gp in pairs], dtype=np.float64)
    return out.reshape(shape) if shape is not None else out
