"""Sparse exterior algebra on R^n for n <= 8.

Forms are stored as a mapping from strictly increasing 1-based index tuples
(``(1, 2)`` is e_12) to scalar coefficients.  Coefficients are whatever the
caller supplies: ``Fraction``/``int`` for exact identity checks, ``float``
for field evaluation.  Python arithmetic does the rest, so exact inputs give
exact outputs wherever no square root is involved.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import linalg
from .errors import ContractViolation, NumericalError

MAX_DIM = 8


def sort_sign(indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sort ``indices`` and return the permutation sign (0 on a repeat)."""
    idx = list(indices)
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return 0, tuple(idx)
    return sign, tuple(idx)


def _merge_sign(I: tuple[int, ...], J: tuple[int, ...]) -> int:
    inversions = sum(1 for i in I for j in J if i > j)
    return -1 if inversions % 2 else 1


def _scalar(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


class ExteriorForm:
    """A homogeneous k-form on R^n in sparse canonical form."""

    __slots__ = ("dim", "grade", "_terms")

    def __init__(self, dim: int, grade: int, terms: Mapping[Sequence[int], object] | None = None):
        if not 0 <= dim <= MAX_DIM:
            raise ContractViolation(f"dimension {dim} outside 0..{MAX_DIM}")
        if not 0 <= grade <= dim:
            raise ContractViolation(f"grade {grade} outside 0..{dim}")
        acc: dict[tuple[int, ...], object] = {}
        for idx, c in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != grade:
                raise ContractViolation(f"blade {idx} does not have grade {grade}")
            if any(i < 1 or i > dim for i in idx):
                raise ContractViolation(f"blade {idx} out of range for dimension {dim}")
            sign, blade = sort_sign(idx)
            if sign == 0:
                continue
            c = _scalar(c)
            acc[blade] = acc.get(blade, 0) + (c if sign > 0 else -c)
        self.dim = dim
        self.grade = grade
        self._terms = {b: acc[b] for b in sorted(acc) if acc[b] != 0}

    # construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, dim: int, grade: int) -> "ExteriorForm":
        return cls(dim, grade)

    @classmethod
    def scalar(cls, dim: int, c=1) -> "ExteriorForm":
        return cls(dim, 0, {(): c})

    @classmethod
    def blade(cls, dim: int, *indices: int, c=1) -> "ExteriorForm":
        """``blade(8, 1, 2)`` is e_12; indices may be unsorted (sign applied)."""
        return cls(dim, len(indices), {tuple(indices): c})

    @classmethod
    def one_form(cls, components: Sequence) -> "ExteriorForm":
        comps = [_scalar(c) for c in components]
        return cls(len(comps), 1, {(i + 1,): c for i, c in enumerate(comps)})

    @classmethod
    def from_matrix(cls, T) -> "ExteriorForm":
        """Two-form sum_{i<j} T[i, j] e_ij from an antisymmetric matrix."""
        T = np.asarray(T)
        n = T.shape[0]
        return cls(n, 2, {(i + 1, j + 1): T[i, j] for i in range(n) for j in range(i + 1, n)})

    @classmethod
    def from_dense(cls, dim: int, grade: int, values: Sequence) -> "ExteriorForm":
        blades = linalg.blade_list(dim, grade)
        return cls(dim, grade, dict(zip(blades, values)))

    # views ----------------------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, ...], object]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def coeff(self, *indices: int):
        sign, blade = sort_sign(indices)
        if sign == 0:
            return 0
        return sign * self._terms.get(blade, 0)

    def to_vector(self) -> np.ndarray:
        if self.grade != 1:
            raise ContractViolation("to_vector needs a one-form")
        return np.array([self._terms.get((i,), 0) for i in range(1, self.dim + 1)])

    def to_matrix(self) -> np.ndarray:
        if self.grade != 2:
            raise ContractViolation("to_matrix needs a two-form")
        T = np.zeros((self.dim, self.dim), dtype=object if self.is_exact else float)
        if self.is_exact:
            T[:] = 0
        for (i, j), c in self._terms.items():
            T[i - 1, j - 1] = c
            T[j - 1, i - 1] = -c
        return T

    def to_dense(self) -> np.ndarray:
        blades = linalg.blade_list(self.dim, self.grade)
        return np.array([float(self._terms.get(b, 0)) for b in blades])

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self._terms.values())

    def max_abs(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector (orthonormal-basis norm)."""
        return math.sqrt(sum(float(c) ** 2 for c in self._terms.values()))

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def allclose(self, other: "ExteriorForm", tol: float = 1e-12) -> bool:
        return (self - other).max_abs() <= tol

    def __bool__(self) -> bool:
        return bool(self._terms)

    # arithmetic -----------------------------------------------------------

    def _check_compatible(self, other: "ExteriorForm"):
        if not isinstance(other, ExteriorForm):
            raise ContractViolation(f"expected ExteriorForm, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ContractViolation(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "ExteriorForm") -> "ExteriorForm":
        self._check_compatible(other)
        if other.grade != self.grade:
            raise ContractViolation(f"cannot add grades {self.grade} and {other.grade}")
        terms = dict(self._terms)
        for b, c in other._terms.items():
            terms[b] = terms.get(b, 0) + c
        return ExteriorForm(self.dim, self.grade, terms)

    def __neg__(self) -> "ExteriorForm":
        return ExteriorForm(self.dim, self.grade, {b: -c for b, c in self._terms.items()})

    def __sub__(self, other: "ExteriorForm") -> "ExteriorForm":
        return self + (-other)

    def __mul__(self, s) -> "ExteriorForm":
        if isinstance(s, ExteriorForm):
            return wedge(self, s)
        s = _scalar(s)
        return ExteriorForm(self.dim, self.grade, {b: c * s for b, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, s) -> "ExteriorForm":
        s = _scalar(s)
        if isinstance(s, int):
            s = Fraction(s)
        return ExteriorForm(self.dim, self.grade, {b: c / s for b, c in self._terms.items()})

    def __xor__(self, other: "ExteriorForm") -> "ExteriorForm":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExteriorForm):
            return NotImplemented
        return (self.dim, self.grade, self._terms) == (other.dim, other.grade, other._terms)

    __hash__ = None

    def map_coeffs(self, fn: Callable) -> "ExteriorForm":
        return ExteriorForm(self.dim, self.grade, {b: fn(c) for b, c in self._terms.items()})

    def __repr__(self) -> str:
        if not self._terms:
            return f"0 (grade {self.grade}, dim {self.dim})"
        parts = []
        for b, c in self._terms.items():
            label = "e" + "".join(str(i) for i in b) if b else "1"
            parts.append(f"{c}*{label}")
        return " + ".join(parts)

    # serialization --------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "dim": self.dim,
            "grade": self.grade,
            "terms": [{"idx": list(b), "c": format_scalar(c)} for b, c in self._terms.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "ExteriorForm":
        terms = {}
        for t in obj["terms"]:
            idx = tuple(t["idx"])
            if list(idx) != sorted(set(idx)):
                raise ContractViolation(f"idx {idx} is not strictly increasing")
            terms[idx] = parse_scalar(t["c"])
        return cls(int(obj["dim"]), int(obj["grade"]), terms)

    @classmethod
    def from_json(cls, text: str) -> "ExteriorForm":
        return cls.from_json_obj(json.loads(text))


def format_scalar(c) -> str:
    """Exact rationals as ``p/q`` (or ``p``), floats via ``repr``."""
    if isinstance(c, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(c, (int, Fraction)):
        return str(Fraction(c))
    return repr(float(c))


def parse_scalar(s: str):
    s = s.strip()
    if any(ch in s for ch in ".eEn"):  # floats, inf, nan
        return float(s)
    return Fraction(s)


# ---------------------------------------------------------------------------
# products


def wedge(a: ExteriorForm, b: ExteriorForm) -> ExteriorForm:
    a._check_compatible(b)
    grade = a.grade + b.grade
    if grade > a.dim:
        # no such grade exists; the zero top form stands in for it
        return ExteriorForm(a.dim, a.dim)
    terms: dict[tuple[int, ...], object] = {}
    for I, c in a._terms.items():
        sI = set(I)
        for J, d in b._terms.items():
            if sI.intersection(J):
                continue
            K = tuple(sorted(I + J))
            val = c * d if _merge_sign(I, J) > 0 else -(c * d)
            terms[K] = terms.get(K, 0) + val
    return ExteriorForm(a.dim, grade, terms)


def wedge_all(*forms: ExteriorForm) -> ExteriorForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def interior(v: Sequence, a: ExteriorForm) -> ExteriorForm:
    """Contraction v ⌟ a, inserting v into the first slot."""
    v = [_scalar(x) for x in v]
    if len(v) != a.dim:
        raise ContractViolation(f"vector of length {len(v)} on forms of dimension {a.dim}")
    if a.grade == 0:
        return ExteriorForm(a.dim, 0)
    terms: dict[tuple[int, ...], object] = {}
    for I, c in a._terms.items():
        for p, i in enumerate(I):
            vi = v[i - 1]
            if vi == 0:
                continue
            rest = I[:p] + I[p + 1:]
            val = vi * c if p % 2 == 0 else -(vi * c)
            terms[rest] = terms.get(rest, 0) + val
    return ExteriorForm(a.dim, a.grade - 1, terms)


def contract(a: ExteriorForm, *vectors: Sequence) -> ExteriorForm:
    """a(v1, v2, ..., ·): ``contract(Phi, U1, U2, U3)`` is U3⌟U2⌟U1⌟Phi."""
    out = a
    for v in vectors:
        out = interior(v, out)
    return out


def pullback(a: ExteriorForm, L) -> ExteriorForm:
    """Pull back along the linear map x -> L x, i.e. e_i -> sum_j L[i, j] e_j."""
    L = np.asarray(L)
    if L.shape != (a.dim, a.dim):
        raise ContractViolation(f"map of shape {L.shape} on forms of dimension {a.dim}")
    if linalg.is_exact(L) or a.is_exact and L.dtype.kind in "iu":
        rows = [ExteriorForm.one_form(list(L[i])) for i in range(a.dim)]
        out = ExteriorForm(a.dim, a.grade)
        for I, c in a._terms.items():
            piece = ExteriorForm.scalar(a.dim, c)
            for i in I:
                piece = wedge(piece, rows[i - 1])
            out = out + piece
        return out
    C = linalg.compound_matrix(L, a.grade)
    return ExteriorForm.from_dense(a.dim, a.grade, C.T @ a.to_dense())


# ---------------------------------------------------------------------------
# metrics


class Metric:
    """Symmetric positive-definite bilinear form on R^n with an orientation."""

    __slots__ = ("matrix", "orientation", "_chol")

    def __init__(self, matrix, orientation: int = 1):
        M = np.array(matrix, dtype=object) if linalg.is_exact(np.asarray(matrix)) else np.array(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ContractViolation("metric must be a square matrix")
        if orientation not in (1, -1):
            raise ContractViolation("orientation must be +1 or -1")
        if not linalg.is_symmetric(M):
            raise ContractViolation("metric matrix is not symmetric")
        self.matrix = M
        self.orientation = orientation
        self._chol = linalg.cholesky(M.astype(float))

    @classmethod
    def euclidean(cls, n: int, orientation: int = 1, exact: bool = True) -> "Metric":
        return cls(linalg.eye(n, exact=exact), orientation)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_identity(self) -> bool:
        return all(self.matrix[i, j] == (1 if i == j else 0)
                   for i in range(self.dim) for j in range(self.dim))

    @property
    def cholesky(self) -> np.ndarray:
        return self._chol

    def inverse(self) -> np.ndarray:
        return linalg.inv(self.matrix)

    def sqrt_det(self):
        if self.is_identity:
            return Fraction(1) if linalg.is_exact(self.matrix) else 1.0
        return linalg.exact_sqrt(linalg.det(self.matrix))

    def inner(self, u: Sequence, v: Sequence):
        return np.asarray(u) @ self.matrix @ np.asarray(v)

    def scaled(self, s) -> "Metric":
        return Metric(self.matrix * s, self.orientation)


def volume_form(metric: Metric) -> ExteriorForm:
    n = metric.dim
    return ExteriorForm(n, n, {tuple(range(1, n + 1)): metric.orientation * metric.sqrt_det()})


def _euclidean_star(a: ExteriorForm) -> ExteriorForm:
    n = a.dim
    full = set(range(1, n + 1))
    terms = {}
    for I, c in a._terms.items():
        comp = tuple(sorted(full.difference(I)))
        sign, _ = sort_sign(I + comp)
        terms[comp] = c if sign > 0 else -c
    return ExteriorForm(n, n - a.grade, terms)


def hodge(a: ExteriorForm, metric: Metric | None = None) -> ExteriorForm:
    """Hodge star, defined by a ∧ *b = <a, b> vol."""
    if metric is None:
        return _euclidean_star(a)
    if metric.dim != a.dim:
        raise ContractViolation("metric and form dimensions differ")
    if metric.is_identity:
        out = _euclidean_star(a)
    else:
        L = metric.cholesky  # g = L L^T, orthonormal coframe f = L^T e
        in_frame = pullback(a, np.linalg.inv(L).T)
        out = pullback(_euclidean_star(in_frame), L.T)
    return out if metric.orientation > 0 else -out


def musical_flat(v: Sequence, metric: Metric) -> ExteriorForm:
    return ExteriorForm.one_form(list(metric.matrix @ np.asarray(v, dtype=metric.matrix.dtype)))


def musical_sharp(a: ExteriorForm, metric: Metric) -> np.ndarray:
    if a.grade != 1:
        raise ContractViolation("sharp needs a one-form")
    vec = a.to_vector()
    if linalg.is_exact(metric.matrix):
        if metric.is_identity:
            return vec
        return metric.inverse() @ np.array(list(vec), dtype=object)
    return metric.inverse() @ vec.astype(float)


def self_dual_part(F: ExteriorForm, metric: Metric | None = None) -> ExteriorForm:
    if F.dim != 4 or F.grade != 2:
        raise ContractViolation("self-dual projection needs a two-form on a 4-space")
    half = Fraction(1, 2) if F.is_exact and (metric is None or metric.is_identity) else 0.5
    return (F + hodge(F, metric)) * half


def anti_self_dual_part(F: ExteriorForm, metric: Metric | None = None) -> ExteriorForm:
    return F - self_dual_part(F, metric)


def ratio(a: ExteriorForm, b: ExteriorForm) -> float:
    """The scalar s with a = s b, for forms known to be parallel (b nonzero)."""
    num = sum(float(c) * float(b._terms.get(k, 0)) for k, c in a._terms.items())
    den = sum(float(c) ** 2 for c in b._terms.values())
    if den == 0:
        raise ContractViolation("ratio against the zero form")
    return num / den


def exact_ratio(a: ExteriorForm, b: ExteriorForm):
    """Exact version of :func:`ratio`; raises if a is not a multiple of b."""
    if not b:
        raise ContractViolation("ratio against the zero form")
    k0, c0 = next(iter(b.items()))
    s = Fraction(a.coeff(*k0)) / Fraction(c0)
    if a != b * s:
        raise ContractViolation("forms are not proportional")
    return s


# ---------------------------------------------------------------------------
# finite differences


FormField = Callable[[np.ndarray], ExteriorForm]


def exterior_derivative_fd(field: FormField, p: Sequence[float], step: float = 1e-5) -> ExteriorForm:
    """Central-difference approximation of d(field) at p, O(step^2) accurate."""
    if step <= 0:
        raise ContractViolation("step must be positive")
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    out = None
    for i in range(n):
        dp = np.zeros(n)
        dp[i] = step
        plus, minus = field(p + dp), field(p - dp)
        deriv = (plus - minus) * (1.0 / (2.0 * step))
        if not all(math.isfinite(float(c)) for _, c in deriv.items()):
            raise NumericalError(f"non-finite sample of the field near {p.tolist()}")
        term = wedge(ExteriorForm.blade(n, i + 1, c=1.0), deriv)
        out = term if out is None else out + term
    return out


def gradient_fd(fn: Callable[[np.ndarray], float], p: Sequence[float], step: float = 1e-5) -> ExteriorForm:
    """d of a scalar function, as a one-form."""
    n = len(p)
    return exterior_derivative_fd(lambda q: ExteriorForm.scalar(n, float(fn(q))), p, step)


def embed(a: ExteriorForm, dim: int, offset: int) -> ExteriorForm:
    """Place a form on R^m into R^dim, shifting indices by ``offset``."""
    if a.dim + offset > dim:
        raise ContractViolation("embedding does not fit")
    return ExteriorForm(dim, a.grade, {tuple(i + offset for i in b): c for b, c in a.items()})


def restrict(a: ExteriorForm, indices: Iterable[int]) -> ExteriorForm:
    """Keep only blades inside ``indices`` and renumber them 1..len(indices)."""
    indices = list(indices)
    pos = {i: k + 1 for k, i in enumerate(indices)}
    terms = {tuple(pos[i] for i in b): c for b, c in a.items() if all(i in pos for i in b)}
    return ExteriorForm(len(indices), a.grade, terms)
