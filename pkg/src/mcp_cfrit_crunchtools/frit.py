"""Plaintext FRIT: the closed-form gain and its multiplicative-term decomposition.

With Psi = W^T W and Phi = Psi^-1 written as adjugate over determinant,

    F*_iota = - sum_{i,l} E_i W_il (-1)^(l+iota) det(Psi~_{l,iota}) / det(Psi)

and expanding each minor determinant over the permutations sigma_k of n-1
symbols splits F*_iota into M = (n-1)! n^2 N purely multiplicative terms. Term
labels j, k, i, l and iota are 1-based; j(k, i, l) = (k-1)n^2 N + (i-1)n + l.
"""

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, ValidationError
from .linalg import (
    Permutation,
    det_perm,
    gram,
    l2_norm,
    lambda_min,
    max_norm,
    minor,
    permutation_products,
    permutations,
)
from .plantlab import FeedbackGain, TuningDataset, fictitious_residual

logger = logging.getLogger(__name__)

SINGULARITY_THRESHOLD = 1e-12
BOUND_RTOL = 1e-9


@dataclass(frozen=True)
class IndexTriplet:
    k: int
    i: int
    l: int  # noqa: E741


@dataclass(frozen=True)
class TermFactors:
    """One multiplicative term of F*_iota.

    factors = [-1, E_i, W_il, 1/det(Psi), (-1)^(l+iota), sgn(sigma_k), minor entries...],
    always n + 5 entries; value is their product.
    """

    j: int
    iota: int
    factors: tuple[float, ...]
    value: float


def term_count(n: int, N: int) -> int:
    """M = (n-1)! n^2 N."""
    return math.factorial(n - 1) * n * n * N


def term_index(k: int, i: int, l: int, n: int, N: int) -> int:  # noqa: E741
    """j(k, i, l) = (k-1)n^2 N + (i-1)n + l, a bijection onto 1..M."""
    if not (1 <= k <= math.factorial(n - 1) and 1 <= i <= n * N and 1 <= l <= n):
        raise ValidationError(f"index triplet ({k}, {i}, {l}) out of range for n={n}, N={N}")
    return (k - 1) * n * n * N + (i - 1) * n + l


def term_triplet(j: int, n: int, N: int) -> IndexTriplet:
    """Inverse of term_index."""
    if not 1 <= j <= term_count(n, N):
        raise ValidationError(f"term index {j} out of range 1..{term_count(n, N)}")
    block, rest = divmod(j - 1, n * n * N)
    i0, l0 = divmod(rest, n)
    return IndexTriplet(k=block + 1, i=i0 + 1, l=l0 + 1)


@dataclass(frozen=True)
class _Adjugate:
    det: float
    # minors[l][iota]: permutation products of Psi with row l and column iota removed
    minors: list[list[list[tuple[Permutation, list[float]]]]]


def _adjugate(ds: TuningDataset) -> _Adjugate:
    psi = gram(ds.W)
    if lambda_min(psi) <= SINGULARITY_THRESHOLD:
        raise DegenerateDataError("Psi = W^T W is singular (lambda_min <= 1e-12)")
    det = det_perm(psi)
    if det == 0.0:
        raise DegenerateDataError("det(Psi) evaluates to zero")
    n = ds.n
    minors = [
        [permutation_products(minor(psi, row, col)) for col in range(n)] for row in range(n)
    ]
    return _Adjugate(det=det, minors=minors)


def _sign(exponent: int) -> float:
    return -1.0 if exponent % 2 else 1.0


def frit_gain(ds: TuningDataset) -> FeedbackGain:
    """F* = -E^T W Psi^-1, with Psi^-1 built from cofactors and det(Psi).

    Raises:
        DegenerateDataError: If Psi is singular.
    """
    adj = _adjugate(ds)
    n = ds.n
    phi = np.empty((n, n), dtype=np.float64)
    for l in range(n):  # noqa: E741
        for iota in range(n):
            cofactor = math.fsum(
                perm.sign * math.prod(entries) for perm, entries in adj.minors[l][iota]
            )
            phi[l, iota] = _sign(l + iota) * cofactor / adj.det
    gain = FeedbackGain.of(-(ds.E @ ds.W) @ phi)
    logger.debug("Plaintext gain F* = %s", gain.as_list())
    return gain


def fictitious_objective(ds: TuningDataset, F: FeedbackGain) -> float:
    """J(F) = ||E + W F^T||_2."""
    return l2_norm(fictitious_residual(ds, F))


def enumerate_terms(
    ds: TuningDataset,
    iota: int | None = None,
    k: int | None = None,
) -> Iterator[TermFactors]:
    """Lazily yield every term, ordered by iota then j.

    Args:
        ds: Tuning dataset with invertible Psi.
        iota: Restrict to one output index (1-based).
        k: Restrict to one permutation block (1-based).

    Raises:
        DegenerateDataError: If Psi is singular.
    """
    n, N = ds.n, ds.N
    n_perms = len(permutations(n - 1))
    if iota is not None and not 1 <= iota <= n:
        raise ValidationError(f"iota must lie in 1..{n}")
    if k is not None and not 1 <= k <= n_perms:
        raise ValidationError(f"k must lie in 1..{n_perms}")

    adj = _adjugate(ds)
    inv_det = 1.0 / adj.det
    E = [float(v) for v in ds.E]
    W = ds.W.tolist()
    iotas = [iota] if iota is not None else range(1, n + 1)
    blocks = [k] if k is not None else range(1, n_perms + 1)

    for out in iotas:
        for kk in blocks:
            for i in range(1, n * N + 1):
                e_i = E[i - 1]
                for l in range(1, n + 1):  # noqa: E741
                    perm, entries = adj.minors[l - 1][out - 1][kk - 1]
                    factors = (
                        -1.0,
                        e_i,
                        float(W[i - 1][l - 1]),
                        inv_det,
                        _sign(l + out),
                        float(perm.sign),
                        *entries,
                    )
                    yield TermFactors(
                        j=term_index(kk, i, l, n, N),
                        iota=out,
                        factors=factors,
                        value=math.prod(factors),
                    )


def term_bound(ds: TuningDataset) -> float:
    """||E||max ||W||max / lambda_min(Psi)."""
    return max_norm(ds.E) * max_norm(ds.W) / lambda_min(gram(ds.W))


def term_bound_violations(ds: TuningDataset) -> int:
    """Count terms with |value| above term_bound(ds), up to a relative 1e-9."""
    bound = term_bound(ds) * (1 + BOUND_RTOL)
    return sum(1 for tf in enumerate_terms(ds) if abs(tf.value) > bound)
