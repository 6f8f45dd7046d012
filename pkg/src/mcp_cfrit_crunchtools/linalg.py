"""Small dense-matrix routines used by the term decomposition.

Determinants are evaluated by the symmetric-group expansion so that the
individual permutation products stay available to the term decomposition.
Permutation enumeration is guarded at size 8.
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, GuardError, ValidationError

FloatArray = NDArray[np.float64]

MAX_PERMUTATION_SIZE = 8
SYMMETRY_TOLERANCE = 1e-9
JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class Permutation:
    """mapping[i] is the image of i (0-based); sign is +1 or -1."""

    mapping: tuple[int, ...]
    sign: int


def _parity_sign(mapping: tuple[int, ...]) -> int:
    inversions = sum(
        1 for a, b in itertools.combinations(range(len(mapping)), 2) if mapping[a] > mapping[b]
    )
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def _permutations(m: int) -> tuple[Permutation, ...]:
    return tuple(
        Permutation(mapping=mapping, sign=_parity_sign(mapping))
        for mapping in itertools.permutations(range(m))
    )


def permutations(m: int) -> list[Permutation]:
    """All m! permutations of range(m) in lexicographic order, with signs.

    m = 0 yields the single empty permutation with sign +1.
    """
    if m < 0:
        raise ValidationError("permutation size must be non-negative")
    if m > MAX_PERMUTATION_SIZE:
        raise GuardError(m, MAX_PERMUTATION_SIZE)
    return list(_permutations(m))


def _square(X: ArrayLike) -> FloatArray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def permutation_products(X: ArrayLike) -> list[tuple[Permutation, list[float]]]:
    """For each permutation sigma, the entries X[i, sigma(i)] in row order."""
    arr = _square(X)
    return [
        (perm, [float(arr[i, perm.mapping[i]]) for i in range(arr.shape[0])])
        for perm in permutations(arr.shape[0])
    ]


def det_perm(X: ArrayLike) -> float:
    """Determinant by the expansion sum over sigma of sgn(sigma) prod_i X[i, sigma(i)]."""
    return math.fsum(
        perm.sign * math.prod(entries) for perm, entries in permutation_products(X)
    )


def minor(X: ArrayLike, i: int, j: int) -> FloatArray:
    """X with row i and column j removed (0-based)."""
    arr = _square(X)
    n = arr.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise ValidationError(f"minor index ({i}, {j}) out of range for size {n}")
    result: FloatArray = np.delete(np.delete(arr, i, axis=0), j, axis=1)
    return result


def gram(W: ArrayLike) -> FloatArray:
    """Psi = W^T W, symmetrized exactly."""
    arr = np.asarray(W, dtype=np.float64)
    psi = arr.T @ arr
    result: FloatArray = (psi + psi.T) / 2
    return result


def max_norm(M: ArrayLike) -> float:
    """Largest absolute entry."""
    arr = np.asarray(M, dtype=np.float64)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def l1_norm(v: ArrayLike) -> float:
    return float(np.sum(np.abs(np.asarray(v, dtype=np.float64))))


def l2_norm(v: ArrayLike) -> float:
    return float(np.sqrt(np.sum(np.square(np.asarray(v, dtype=np.float64)))))


def _off_diagonal_norm(S: FloatArray) -> float:
    off = S - np.diag(np.diag(S))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigen(S: ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Eigenvalues (ascending) and eigenvectors (columns) by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm is at most 1e-12 * ||S||max.

    Raises:
        DomainError: If S is asymmetric beyond 1e-9.
    """
    arr = _square(S)
    scale = max_norm(arr)
    if max_norm(arr - arr.T) > SYMMETRY_TOLERANCE * max(1.0, scale):
        raise DomainError("matrix is not symmetric")

    a = (arr + arr.T) / 2
    n = a.shape[0]
    v = np.eye(n)
    threshold = JACOBI_TOLERANCE * scale
    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_diagonal_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot

    order = np.argsort(np.diag(a))
    values: FloatArray = np.diag(a)[order]
    vectors: FloatArray = v[:, order]
    return values, vectors


def lambda_min(S: ArrayLike) -> float:
    """Minimum eigenvalue of a symmetric matrix."""
    values, _ = jacobi_eigen(S)
    return float(values[0])
