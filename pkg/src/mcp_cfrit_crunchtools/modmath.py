"""Number-theoretic substrate: modular powers, primality, safe primes, Legendre
symbols, minimal residues and the positive rounding function.

All functions are pure apart from the safe-prime cache consulted by
largest_safe_q, and are safe to call from any thread.
"""

import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, SafePrimeNotFoundError, ValidationError
from .primecache import get_prime_cache

logger = logging.getLogger(__name__)

DEFAULT_MR_ROUNDS = 40

SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
)

# Witness set that makes Miller-Rabin exact for every n < 2^64.
DETERMINISTIC_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
DETERMINISTIC_LIMIT = 1 << 64

Real = int | float | Fraction


@dataclass(frozen=True)
class SafePrimePair:
    """A Sophie Germain prime q (kappa bits) and its safe prime p = 2q + 1."""

    q: int
    p: int
    kappa: int

    def __post_init__(self) -> None:
        if self.p != 2 * self.q + 1:
            raise ValidationError("p must equal 2q + 1")
        if self.q.bit_length() != self.kappa:
            raise ValidationError(f"q has {self.q.bit_length()} bits, expected {self.kappa}")


def mod_pow(base: int, exp: int, m: int) -> int:
    """Return base**exp mod m."""
    if m < 2:
        raise DomainError(f"modulus must be at least 2, got {m}")
    if exp < 0:
        raise DomainError("exponent must be non-negative")
    return pow(base, exp, m)


def minimal_residue(a: int, m: int) -> int:
    """Return the residue of a mod m with the smallest absolute value.

    With b = a mod m, this is b when b < |b - m| and b - m otherwise.
    """
    if m < 1:
        raise DomainError(f"modulus must be positive, got {m}")
    b = a % m
    return b if b < abs(b - m) else b - m


def legendre(z: int, p: int) -> int:
    """Legendre symbol (z/p) as z^((p-1)/2) Mod p, returning +1 or -1.

    Raises:
        DomainError: If p divides z.
    """
    if p < 3 or p % 2 == 0:
        raise DomainError(f"legendre requires an odd prime modulus, got {p}")
    if z % p == 0:
        raise DomainError(f"legendre symbol undefined: {p} divides z")
    return minimal_residue(pow(z, (p - 1) // 2, p), p)


def round_pos(sigma: Real) -> int:
    """Round a non-negative real to the nearest positive integer.

    Returns floor(sigma + 1/2) for sigma >= 1/2 and 1 otherwise, so 0 is never
    produced. Evaluated in exact rational arithmetic.
    """
    value = Fraction(sigma)
    if value < 0:
        raise DomainError("round_pos requires a non-negative input")
    half = Fraction(1, 2)
    if value < half:
        return 1
    return math.floor(value + half)


def _miller_rabin_round(n: int, d: int, r: int, a: int) -> bool:
    """One Miller-Rabin round; True means n is a probable prime to base a."""
    x = pow(a, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(r - 1):
        x = pow(x, 2, n)
        if x == n - 1:
            return True
    return False


def is_prime(n: int, rounds: int = DEFAULT_MR_ROUNDS) -> bool:
    """Miller-Rabin primality test.

    Exact below 2^64 (fixed witnesses). Above, uses `rounds` witnesses drawn
    from a generator seeded by n itself, so the verdict is reproducible.
    """
    if rounds < 1:
        raise ValidationError("rounds must be positive")
    if n < 2:
        return False
    for sp in SMALL_PRIMES:
        if n == sp:
            return True
        if n % sp == 0:
            return False

    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1

    if n < DETERMINISTIC_LIMIT:
        witnesses: tuple[int, ...] = DETERMINISTIC_WITNESSES
    else:
        picker = random.Random(n)
        witnesses = (2, *(picker.randrange(3, n - 1) for _ in range(rounds - 1)))
    return all(_miller_rabin_round(n, d, r, a) for a in witnesses)


def _search_largest_safe_q(kappa: int, rounds: int) -> int:
    low, high = 1 << (kappa - 1), (1 << kappa) - 1
    # q > 3 must be 5 mod 6: q = 1 mod 3 makes 3 | 2q + 1.
    q = high - ((high - 5) % 6)
    while q >= low:
        if is_prime(q, rounds) and is_prime(2 * q + 1, rounds):
            return q
        q -= 6
    raise SafePrimeNotFoundError(kappa)


def largest_safe_q(kappa: int, rounds: int = DEFAULT_MR_ROUNDS) -> SafePrimePair:
    """Largest kappa-bit q such that q and p = 2q + 1 are both prime.

    Results are cached per kappa (see primecache).

    Raises:
        DomainError: If kappa < 3.
        SafePrimeNotFoundError: If the kappa-bit range holds no such q.
    """
    if kappa < 3:
        raise DomainError(f"kappa must be at least 3, got {kappa}")

    cache = get_prime_cache()
    hit = cache.lookup(kappa)
    if hit is not None:
        q, p = hit
        if q.bit_length() == kappa and p == 2 * q + 1 and is_prime(q, rounds) and is_prime(
            p, rounds
        ):
            return SafePrimePair(q=q, p=p, kappa=kappa)
        logger.warning("Discarding invalid cached safe prime for kappa=%d", kappa)
        cache.forget(kappa)

    q = _search_largest_safe_q(kappa, rounds)
    logger.debug("Found %d-bit safe prime q=%d", kappa, q)
    cache.store(kappa, q, 2 * q + 1)
    return SafePrimePair(q=q, p=2 * q + 1, kappa=kappa)
