"""ElGamal over the quadratic-residue subgroup of a safe prime.

Messages are GroupPair values; each component gets its own ElGamal pair, so a
ciphertext is four group elements (c1, c2) and (c3, c4). The componentwise
product of ciphertexts decrypts to the componentwise product of messages.
"""

import logging
import os
import secrets
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from pydantic import Secret

from .codec import GroupPair
from .errors import CorruptCiphertextError, DomainError, ValidationError
from .modmath import SafePrimePair, largest_safe_q

logger = logging.getLogger(__name__)

GENERATOR = 4


class RandomSource(Protocol):
    """Anything with randrange(stop), e.g. random.Random or secrets.SystemRandom."""

    def randrange(self, stop: int, /) -> int: ...


@dataclass(frozen=True)
class PublicKey:
    p: int
    q: int
    g: int
    h: int

    def __post_init__(self) -> None:
        if self.p != 2 * self.q + 1:
            raise ValidationError("public key requires p = 2q + 1")
        if self.g in (0, 1) or pow(self.g, self.q, self.p) != 1:
            raise ValidationError("g must be a non-identity element of order q")
        if pow(self.h, self.q, self.p) != 1:
            raise ValidationError("h must lie in the order-q subgroup")


class SecretKey:
    """Secret exponent s, stored as a pydantic Secret."""

    def __init__(self, s: int) -> None:
        self._s: Secret[int] = Secret(s)

    @property
    def s(self) -> int:
        """The exponent itself. Read it only to decrypt or to write the key file."""
        return self._s.get_secret_value()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SecretKey):
            return NotImplemented
        return self.s == other.s

    def __hash__(self) -> int:
        return hash(self.s)

    def __repr__(self) -> str:
        return "SecretKey(s=***)"

    def __str__(self) -> str:
        return "SecretKey(s=***)"


@dataclass(frozen=True)
class Ciphertext:
    c1: int
    c2: int
    c3: int
    c4: int

    def components(self) -> tuple[int, int, int, int]:
        return (self.c1, self.c2, self.c3, self.c4)


def gen(
    kappa: int,
    rng: RandomSource | None = None,
    secret: int | None = None,
) -> tuple[PublicKey, SecretKey]:
    """Generate a key pair on the largest kappa-bit safe prime, with g = 4.

    Args:
        kappa: Bit length of q.
        rng: Source for the secret exponent (default: OS entropy).
        secret: Fixed exponent in Z_q, for reproducing hand-worked examples.
    """
    primes = largest_safe_q(kappa)
    return gen_for_primes(primes, rng=rng, secret=secret)


def gen_for_primes(
    primes: SafePrimePair,
    rng: RandomSource | None = None,
    secret: int | None = None,
) -> tuple[PublicKey, SecretKey]:
    """Key generation for an already-selected safe-prime pair."""
    if secret is None:
        source = rng if rng is not None else secrets.SystemRandom()
        secret = source.randrange(primes.q)
    elif not 0 <= secret < primes.q:
        raise ValidationError("secret exponent must lie in [0, q)")
    pk = PublicKey(p=primes.p, q=primes.q, g=GENERATOR, h=pow(GENERATOR, secret, primes.p))
    logger.debug("Generated %d-bit key pair", primes.kappa)
    return pk, SecretKey(s=secret)


def enc(pk: PublicKey, m: GroupPair, rng: RandomSource) -> Ciphertext:
    """Encrypt both message components with fresh r1, r2 drawn from Z_q.

    Raises:
        DomainError: If a component lies outside [1, p).
    """
    for component in (m.x1, m.x2):
        if not 0 < component < pk.p:
            raise DomainError(f"message component {component} outside [1, p)")
    r1 = rng.randrange(pk.q)
    r2 = rng.randrange(pk.q)
    p = pk.p
    return Ciphertext(
        c1=pow(pk.g, r1, p),
        c2=(m.x1 * pow(pk.h, r1, p)) % p,
        c3=pow(pk.g, r2, p),
        c4=(m.x2 * pow(pk.h, r2, p)) % p,
    )


def dec(sk: SecretKey, pk: PublicKey, c: Ciphertext) -> GroupPair:
    """Decrypt with c^(q - s), the inverse of c^s inside the order-q subgroup.

    Raises:
        CorruptCiphertextError: If a component is not invertible mod p.
    """
    p = pk.p
    if any(component % p == 0 for component in c.components()):
        raise CorruptCiphertextError("ciphertext component is not invertible mod p")
    e = pk.q - sk.s
    return GroupPair(
        x1=(pow(c.c1, e, p) * c.c2) % p,
        x2=(pow(c.c3, e, p) * c.c4) % p,
    )


def cmul(pk: PublicKey, a: Ciphertext, b: Ciphertext) -> Ciphertext:
    """Homomorphic multiplication: the componentwise product mod p."""
    p = pk.p
    return Ciphertext(
        c1=(a.c1 * b.c1) % p,
        c2=(a.c2 * b.c2) % p,
        c3=(a.c3 * b.c3) % p,
        c4=(a.c4 * b.c4) % p,
    )


def fold(pk: PublicKey, ciphertexts: Iterable[Ciphertext]) -> Ciphertext:
    """Multiply a non-empty sequence of ciphertexts.

    Needs only the public key, so it is the step that can run on an untrusted
    party.
    """
    iterator = iter(ciphertexts)
    try:
        acc = next(iterator)
    except StopIteration:
        raise ValidationError("cannot fold an empty ciphertext sequence") from None
    for c in iterator:
        acc = cmul(pk, acc, c)
    return acc


# Text codecs: decimal integers, one per line. Lines starting with # are comments.


def _numbers(text: str) -> list[str]:
    return [line for line in text.splitlines() if line.strip() and not line.startswith("#")]


def dump_public_key(pk: PublicKey) -> str:
    return f"{pk.p}\n{pk.q}\n{pk.g}\n{pk.h}\n"


def load_public_key(text: str) -> PublicKey:
    try:
        p, q, g, h = (int(line) for line in _numbers(text))
    except ValueError as e:
        raise ValidationError("public key file must hold four decimal lines: p, q, g, h") from e
    return PublicKey(p=p, q=q, g=g, h=h)


def dump_secret_key(sk: SecretKey) -> str:
    return f"{sk.s}\n"


def load_secret_key(text: str) -> SecretKey:
    try:
        (s,) = (int(line) for line in _numbers(text))
    except ValueError as e:
        raise ValidationError("secret key file must hold one decimal line: s") from e
    return SecretKey(s=s)


def dump_ciphertext(c: Ciphertext) -> list[str]:
    return [str(v) for v in c.components()]


def load_ciphertext(fields: list[str]) -> Ciphertext:
    if len(fields) != 4:
        raise ValidationError("ciphertext must have exactly four components")
    c1, c2, c3, c4 = (int(f) for f in fields)
    return Ciphertext(c1=c1, c2=c2, c3=c3, c4=c4)


def write_key_files(
    pk: PublicKey,
    sk: SecretKey,
    public_path: Path,
    secret_path: Path,
    header: str | None = None,
) -> None:
    """Write the key pair; the secret file is created with mode 0600.

    header, if given, is written as a leading # comment line in both files.
    """
    prefix = f"# {header}\n" if header else ""
    public_path.write_text(prefix + dump_public_key(pk), encoding="utf-8")
    if secret_path.exists():
        os.chmod(secret_path, 0o600)
    fd = os.open(secret_path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(prefix + dump_secret_key(sk))
