"""Small dense linear algebra that works over floats and exact rationals.

Matrices with ``dtype=object`` are treated as exact (entries are ``int`` or
``Fraction``) and go through Gauss-Jordan elimination; everything else is
delegated to numpy.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import FactorizationError


def is_exact(M) -> bool:
    return isinstance(M, np.ndarray) and M.dtype == object


def exact_array(rows) -> np.ndarray:
    """Object array of Fractions from nested sequences of ints/Fractions/strings."""
    arr = np.array(rows, dtype=object)
    flat = [Fraction(x) for x in arr.ravel()]
    return np.array(flat, dtype=object).reshape(arr.shape)


def eye(n: int, exact: bool = False) -> np.ndarray:
    if exact:
        return exact_array(np.eye(n, dtype=int).tolist())
    return np.eye(n)


def det(M) -> float | Fraction:
    if not is_exact(M):
        return float(np.linalg.det(np.asarray(M, dtype=float)))
    A = [list(row) for row in M]
    n = len(A)
    sign = 1
    d = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            A[col], A[pivot] = A[pivot], A[col]
            sign = -sign
        p = A[col][col]
        d *= p
        for r in range(col + 1, n):
            f = A[r][col] / p
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return sign * d


def inv(M) -> np.ndarray:
    if not is_exact(M):
        return np.linalg.inv(np.asarray(M, dtype=float))
    n = M.shape[0]
    A = [list(M[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            raise np.linalg.LinAlgError("singular matrix")
        A[col], A[pivot] = A[pivot], A[col]
        p = A[col][col]
        A[col] = [a / p for a in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return np.array([row[n:] for row in A], dtype=object)


def exact_sqrt(x):
    """Square root that stays rational when ``x`` is a perfect rational square."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        if x >= 0:
            rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
            if rn * rn == x.numerator and rd * rd == x.denominator:
                return Fraction(rn, rd)
    return math.sqrt(float(x))


def is_symmetric(M, tol: float = 0.0) -> bool:
    M = np.asarray(M)
    if is_exact(M):
        return all(M[i, j] == M[j, i] for i in range(M.shape[0]) for j in range(i))
    return bool(np.max(np.abs(M - M.T), initial=0.0) <= tol)


def cholesky(M) -> np.ndarray:
    """Lower Cholesky factor in floating point; raises FactorizationError if not SPD."""
    M = np.asarray(M, dtype=float)
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"matrix is not positive definite: {exc}") from None


def is_spd(M, tol: float = 0.0) -> bool:
    M = np.asarray(M, dtype=float)
    if not is_symmetric(M, tol=1e-12 * max(1.0, float(np.max(np.abs(M), initial=0.0)))):
        return False
    return bool(np.linalg.eigvalsh(0.5 * (M + M.T)).min() > tol)


@lru_cache(maxsize=None)
def blade_list(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Increasing 1-based index tuples of length ``k``, lexicographic."""
    return tuple(combinations(range(1, n + 1), k))


@lru_cache(maxsize=None)
def _blade_index_array(n: int, k: int) -> np.ndarray:
    return np.array(blade_list(n, k), dtype=int).reshape(-1, k) - 1


def compound_matrix(M: np.ndarray, k: int) -> np.ndarray:
    """k-th compound: entry [I, J] is the minor det(M[I, J]) over increasing I, J."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if k == 0:
        return np.ones((1, 1))
    if k == 1:
        return M.copy()
    idx = _blade_index_array(n, k)
    sub = M[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)
