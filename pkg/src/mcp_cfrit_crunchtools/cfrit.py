"""Encrypted FRIT: encode, encrypt, fold, decrypt, decode and sum every term.

Each term's n + 5 factors are encoded and encrypted one by one and the
ciphertexts are multiplied homomorphically. Only the folded ciphertext is
decrypted; the sign channel then holds 2^m for m negative factors and the
magnitude channel holds the product of the quantized magnitudes.

Work is split into (iota, k) partitions. With a seed, partition (iota, k) draws
its encryption randomness from its own stream keyed by "seed/iota/k", so the
result does not depend on the number of worker processes.
"""

import logging
import math
import random
import secrets
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .codec import (
    SIGN_NEGATIVE,
    QuantizationConfig,
    ecd,
    encode_sign_mag,
    quantize,
)
from .elgamal import Ciphertext, PublicKey, RandomSource, SecretKey, dec, enc, fold
from .errors import CorruptCiphertextError, DomainError, ValidationError
from .frit import TermFactors, enumerate_terms
from .linalg import gram, lambda_min, max_norm, permutations
from .modmath import Real, legendre, minimal_residue, round_pos
from .models import OverflowReport
from .plantlab import FeedbackGain, TuningDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncryptedTerm:
    """Folded product of the encrypted factors of one term."""

    j: int
    iota: int
    cipher: Ciphertext
    factor_count: int


@dataclass(frozen=True)
class _TermResult:
    j: int
    iota: int
    value: float
    overflowed: bool


def encrypt_term(
    tf: TermFactors, cfg: QuantizationConfig, pk: PublicKey, rng: RandomSource
) -> EncryptedTerm:
    """Encode and encrypt every factor, then fold the ciphertexts with cmul."""
    ciphers = [enc(pk, ecd(x, cfg), rng) for x in tf.factors]
    return EncryptedTerm(
        j=tf.j, iota=tf.iota, cipher=fold(pk, ciphers), factor_count=len(ciphers)
    )


def _sign_from_channel(channel: int, p: int) -> int:
    """(-1)^m from the sign channel value 2^m.

    Raises:
        CorruptCiphertextError: If the value is not a power of two below p/2.
    """
    if channel < 1 or channel & (channel - 1) or 2 * channel >= p:
        raise CorruptCiphertextError(f"sign channel {channel} is not a power of two below p/2")
    return legendre(channel, 3)


def _rescale(sign: int, magnitude: int, scale: Fraction) -> float:
    return float(sign * Fraction(magnitude) / scale)


def decode_term(
    et: EncryptedTerm, sk: SecretKey, pk: PublicKey, cfg: QuantizationConfig
) -> float:
    """Decrypt the folded term and divide the magnitude by gamma^(n+5).

    Raises:
        CorruptCiphertextError: If the sign channel is not a power of two below p/2.
    """
    gp = dec(sk, pk, et.cipher)
    sign = _sign_from_channel(abs(minimal_residue(gp.x1, pk.p)), pk.p)
    magnitude = abs(minimal_residue(gp.x2, pk.p))
    return _rescale(sign, magnitude, Fraction(cfg.gamma) ** et.factor_count)


def detect_overflow(tf: TermFactors, cfg: QuantizationConfig) -> bool:
    """True when the product of the quantized factor magnitudes reaches q."""
    return math.prod(quantize(x, cfg.gamma) for x in tf.factors) >= cfg.q


def overflow_bound(n: int, gamma: Real, e_max: Real, w_max: Real, lam_min: Real) -> int:
    """round_pos(gamma^(n+5) E_max W_max / lambda_min), in exact rational arithmetic.

    No term can overflow when q exceeds this bound.
    """
    if lam_min <= 0:
        raise ValidationError("lambda_min must be positive")
    ratio = Fraction(e_max) * Fraction(w_max) / Fraction(lam_min)
    return round_pos(Fraction(gamma) ** (n + 5) * ratio)


def dataset_overflow_bound(ds: TuningDataset, gamma: Real) -> int:
    """overflow_bound with the norms and lambda_min taken from the dataset."""
    return overflow_bound(
        ds.n, gamma, max_norm(ds.E), max_norm(ds.W), lambda_min(gram(ds.W))
    )


def max_term_product(ds: TuningDataset, gamma: Real) -> int:
    """Largest quantized factor magnitude or product of them over every term.

    No term overflows and no factor wraps exactly when q exceeds this value.
    Unlike overflow_bound it holds for every state dimension.
    """
    quantized: dict[float, int] = {}
    largest = 0
    for tf in enumerate_terms(ds):
        product = 1
        for x in tf.factors:
            magnitude = abs(x)
            if magnitude not in quantized:
                quantized[magnitude] = quantize(magnitude, gamma)
            product *= quantized[magnitude]
            largest = max(largest, quantized[magnitude])
        largest = max(largest, product)
    return largest


def partition_rng(seed: int | None, iota: int, k: int) -> RandomSource:
    """Encryption randomness for partition (iota, k); OS entropy when unseeded."""
    if seed is None:
        return secrets.SystemRandom()
    return random.Random(f"{seed}/{iota}/{k}")


def _quantized_value(tf: TermFactors, cfg: QuantizationConfig, scale: Fraction) -> float:
    """Big-integer emulation of one term, including wraparound mod p."""
    negatives, magnitude = 0, 1
    for x in tf.factors:
        encoded = encode_sign_mag(x, cfg)
        if encoded.z == 0:
            raise DomainError(f"factor {x!r} wraps to a zero magnitude")
        negatives += encoded.zeta == SIGN_NEGATIVE
        magnitude *= encoded.z
    sign = _sign_from_channel(abs(minimal_residue(2**negatives, cfg.p)), cfg.p)
    return _rescale(sign, abs(minimal_residue(magnitude, cfg.p)), scale)


def _evaluate_terms(
    terms: Iterable[TermFactors],
    cfg: QuantizationConfig,
    keys: tuple[PublicKey, SecretKey] | None,
    rng: RandomSource | None,
) -> list[_TermResult]:
    scale = Fraction(cfg.gamma)
    results = []
    for tf in terms:
        term_scale = scale ** len(tf.factors)
        if keys is None:
            value = _quantized_value(tf, cfg, term_scale)
        else:
            pk, sk = keys
            assert rng is not None
            value = decode_term(encrypt_term(tf, cfg, pk, rng), sk, pk, cfg)
        results.append(
            _TermResult(j=tf.j, iota=tf.iota, value=value, overflowed=detect_overflow(tf, cfg))
        )
    return results


def _run_partition(
    job: tuple[TuningDataset, QuantizationConfig, tuple[PublicKey, SecretKey] | None,
               int | None, int, int],
) -> list[_TermResult]:
    ds, cfg, keys, seed, iota, k = job
    rng = partition_rng(seed, iota, k) if keys is not None else None
    results = _evaluate_terms(enumerate_terms(ds, iota=iota, k=k), cfg, keys, rng)
    logger.debug("Partition iota=%d k=%d done (%d terms)", iota, k, len(results))
    return results


def _collect(
    ds: TuningDataset,
    cfg: QuantizationConfig,
    keys: tuple[PublicKey, SecretKey] | None,
    seed: int | None,
    threads: int,
    rng: RandomSource | None,
) -> list[_TermResult]:
    if rng is not None:
        return _evaluate_terms(enumerate_terms(ds), cfg, keys, rng)

    jobs = [
        (ds, cfg, keys, seed, iota, k)
        for iota in range(1, ds.n + 1)
        for k in range(1, len(permutations(ds.n - 1)) + 1)
    ]
    if threads <= 1 or len(jobs) == 1:
        parts = [_run_partition(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            parts = list(pool.map(_run_partition, jobs))
    return [r for part in parts for r in part]


def _assemble(
    ds: TuningDataset,
    cfg: QuantizationConfig,
    results: Sequence[_TermResult],
    compensated: bool,
) -> tuple[FeedbackGain, OverflowReport]:
    ordered = sorted(results, key=lambda r: (r.iota, r.j))
    gains = []
    for iota in range(1, ds.n + 1):
        values = [r.value for r in ordered if r.iota == iota]
        gains.append(math.fsum(values) if compensated else sum(values))

    overflowed = [(r.j, r.iota) for r in results if r.overflowed]
    report = OverflowReport(
        term_count=len(results),
        overflowed_terms=overflowed,
        theoretical_flag=cfg.q > dataset_overflow_bound(ds, cfg.gamma),
    )
    if overflowed:
        logger.warning(
            "Overflow in %d of %d terms (gamma=%g, kappa=%d)",
            len(overflowed), len(results), cfg.gamma, cfg.primes.kappa,
        )
    return FeedbackGain.of(gains), report


def cfrit_gain(
    ds: TuningDataset,
    cfg: QuantizationConfig,
    pk: PublicKey,
    sk: SecretKey,
    *,
    seed: int | None = None,
    rng: RandomSource | None = None,
    threads: int = 1,
    compensated: bool = False,
) -> tuple[FeedbackGain, OverflowReport]:
    """Encrypted gain F*_E and the overflow report.

    The gain is returned even when terms overflowed.

    Args:
        ds: Tuning dataset.
        cfg: Quantization gain and primes; must match the key's group.
        pk: Public key.
        sk: Secret key.
        seed: Seed for the per-partition randomness streams.
        rng: Single randomness source; forces sequential evaluation.
        threads: Worker processes for the partitions.
        compensated: Sum the decoded terms with math.fsum.
    """
    if pk.p != cfg.p:
        raise ValidationError("public key and quantization config use different primes")
    results = _collect(ds, cfg, (pk, sk), seed, threads, rng)
    gain, report = _assemble(ds, cfg, results, compensated)
    logger.info("Encrypted gain computed over %d terms", report.term_count)
    return gain, report


def quantized_gain(
    ds: TuningDataset,
    cfg: QuantizationConfig,
    *,
    threads: int = 1,
    compensated: bool = False,
) -> tuple[FeedbackGain, OverflowReport]:
    """The same pipeline on plaintext big integers: quantize, multiply, reduce, rescale, sum.

    Agrees with cfrit_gain for every key, overflowing terms included.
    """
    results = _collect(ds, cfg, None, None, threads, None)
    return _assemble(ds, cfg, results, compensated)
