"""Pointwise T^3 reduction of a Spin(7) four-form.

Given Φ, an ambient metric and three torus generators at a point of R^8,
produce the Gram data, the dual coframes, the ω_i, the multi-moment
one-form and the horizontal symplectic triple of the quotient.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .errors import ContractViolation, NotLocallyFreeError, SingularGramError, WeakCoherenceError
from .exterior import (
    ExteriorForm,
    Metric,
    contract,
    exact_ratio,
    hodge,
    musical_flat,
    musical_sharp,
    pullback,
    ratio,
    volume_form,
    wedge_all,
)
from .spin7 import assemble_phi_alt, assemble_phi_reduction, build_phi0


def _vec(v, exact: bool) -> np.ndarray:
    if exact:
        return np.array([Fraction(x) for x in v], dtype=object)
    return np.asarray(v, dtype=float)


@dataclass(frozen=True)
class TorusFrame:
    U: tuple[np.ndarray, np.ndarray, np.ndarray]
    metric: Metric
    Phi: ExteriorForm

    def __post_init__(self):
        if len(self.U) != 3:
            raise ContractViolation("a torus frame has exactly three generators")
        if any(len(u) != self.Phi.dim for u in self.U) or self.metric.dim != self.Phi.dim:
            raise ContractViolation("generators, metric and Phi must share a dimension")
        if self.Phi.grade != 4:
            raise ContractViolation("Phi must be a four-form")

    @classmethod
    def make(cls, U: Sequence[Sequence], metric: Metric | None = None, Phi: ExteriorForm | None = None,
             exact: bool | None = None) -> "TorusFrame":
        if Phi is None:
            Phi = build_phi0().Phi
        if metric is None:
            metric = Metric.euclidean(Phi.dim)
        if exact is None:
            exact = all(isinstance(x, (int, Fraction)) for u in U for x in u) and Phi.is_exact
        return cls(tuple(_vec(u, exact) for u in U), metric, Phi)

    @property
    def exact(self) -> bool:
        return self.U[0].dtype == object and linalg.is_exact(self.metric.matrix)

    @property
    def matrix(self) -> np.ndarray:
        """n x 3 matrix with the generators as columns."""
        return np.stack(self.U, axis=1)


@dataclass(frozen=True)
class ReductionState:
    G: np.ndarray
    Ginv: np.ndarray
    h: float
    theta: tuple[ExteriorForm, ...]
    Theta: tuple[ExteriorForm, ...]
    omega: tuple[ExteriorForm, ...]
    sigma: tuple[ExteriorForm, ...]
    Q: np.ndarray
    volM: ExteriorForm
    dnu: ExteriorForm
    normal: np.ndarray  # unit normal h (dν)^♯
    flow_vector: np.ndarray  # ∂/∂ν = h² (dν)^♯
    projector: np.ndarray  # g-orthogonal projection onto the horizontal space

    def to_json_obj(self) -> dict:
        def mat(M):
            return [[format_entry(x) for x in row] for row in np.asarray(M)]

        return {
            "G": mat(self.G),
            "Ginv": mat(self.Ginv),
            "h": format_entry(self.h),
            "Q": mat(self.Q),
            "theta": [f.to_json_obj() for f in self.theta],
            "Theta": [f.to_json_obj() for f in self.Theta],
            "omega": [f.to_json_obj() for f in self.omega],
            "sigma": [f.to_json_obj() for f in self.sigma],
            "volM": self.volM.to_json_obj(),
            "dnu": self.dnu.to_json_obj(),
        }


def format_entry(x) -> str:
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return repr(float(x))


def gram(frame: TorusFrame):
    """(G, G^{-1}, h) with g_ij = g(U_i, U_j) and h = sqrt(det G^{-1})."""
    Umat = frame.matrix
    G = Umat.T @ frame.metric.matrix @ Umat
    d = linalg.det(G)
    scale = float(np.max(np.abs(G.astype(float)))) ** 3 if G.size else 1.0
    if d == 0 or abs(float(d)) <= 1e-14 * scale:
        raise SingularGramError("torus generators are linearly dependent at this point")
    Ginv = linalg.inv(G)
    h = linalg.exact_sqrt(linalg.det(Ginv)) if frame.exact else float(np.sqrt(np.linalg.det(Ginv)))
    return G, Ginv, h


def _h2(Ginv, exact: bool):
    return linalg.det(Ginv) if exact else float(np.linalg.det(np.asarray(Ginv, dtype=float)))


def flats(frame: TorusFrame) -> list[ExteriorForm]:
    return [musical_flat(u, frame.metric) for u in frame.U]


def dual_coframe(frame: TorusFrame, Ginv) -> tuple[ExteriorForm, ...]:
    """θ = U^♭ G^{-1}, so that θ_i(U_j) = δ_ij."""
    Ub = flats(frame)
    return tuple(sum((Ub[i] * Ginv[i, j] for i in range(3)), ExteriorForm(frame.Phi.dim, 1))
                 for j in range(3))


def capital_theta(frame: TorusFrame, h=None, tol: float = 1e-12) -> tuple[ExteriorForm, ...]:
    """Θ = h² U^♭, cross-checked against Θ_i = h² Σ_j g_ij θ_j."""
    G, Ginv, h_ = gram(frame)
    h2 = _h2(Ginv, frame.exact) if h is None else h * h
    Ub = flats(frame)
    Theta = tuple(u * h2 for u in Ub)
    theta = dual_coframe(frame, Ginv)
    for i in range(3):
        alt = sum((theta[j] * G[i, j] for j in range(3)), ExteriorForm(frame.Phi.dim, 1)) * h2
        diff = (alt - Theta[i]).max_abs()
        if diff > tol * max(1.0, Theta[i].max_abs()):
            raise ContractViolation(f"Theta_{i + 1}: the two formulas disagree by {diff:.3e}")
    return Theta


def omega_forms(frame: TorusFrame) -> tuple[ExteriorForm, ...]:
    """ω1 = U2⌟U3⌟Φ, ω2 = U3⌟U1⌟Φ, ω3 = U1⌟U2⌟Φ."""
    U1, U2, U3 = frame.U
    P = frame.Phi
    return contract(P, U3, U2), contract(P, U1, U3), contract(P, U2, U1)


def mm_oneform(frame: TorusFrame) -> ExteriorForm:
    """dν = Φ(U1, U2, U3, ·) = U3⌟U2⌟U1⌟Φ."""
    return contract(frame.Phi, *frame.U)


def horizontal_projector(frame: TorusFrame, dnu_sharp) -> np.ndarray:
    W = np.column_stack([*frame.U, dnu_sharp])
    g = frame.metric.matrix
    n = frame.Phi.dim
    M = W.T @ g @ W
    return linalg.eye(n, exact=frame.exact) - W @ linalg.inv(M) @ W.T @ g


def reduce_triple(frame: TorusFrame) -> ReductionState:
    G, Ginv, h = gram(frame)
    exact = frame.exact
    h2 = _h2(Ginv, exact)
    dnu = mm_oneform(frame)
    if dnu.is_zero(0.0 if exact else 1e-14):
        raise NotLocallyFreeError("multi-moment one-form vanishes at this point")
    theta = dual_coframe(frame, Ginv)
    Theta = tuple(u * h2 for u in flats(frame))
    omega = omega_forms(frame)

    n_sharp = musical_sharp(dnu, frame.metric)
    if not exact:
        n_sharp = np.asarray(n_sharp, dtype=float)
    P = horizontal_projector(frame, n_sharp)
    sigma = tuple(pullback(w, P) for w in omega)
    volM = contract(volume_form(frame.metric), *frame.U, n_sharp) * h2

    if exact and volM.is_exact and all(s.is_exact for s in sigma):
        Q = np.array([[exact_ratio(sigma[i] ^ sigma[j], volM) / 2 for j in range(3)] for i in range(3)],
                     dtype=object)
    else:
        Q = np.array([[ratio(sigma[i] ^ sigma[j], volM) / 2 for j in range(3)] for i in range(3)])
    if not linalg.is_spd(np.asarray(Q, dtype=float)):
        raise WeakCoherenceError("reduced triple is not weakly coherent (Q not positive definite)")

    hf = float(h)
    return ReductionState(
        G=G, Ginv=Ginv, h=h, theta=theta, Theta=Theta, omega=omega, sigma=sigma, Q=Q,
        volM=volM, dnu=dnu,
        normal=np.asarray(n_sharp, dtype=float) * hf,
        flow_vector=np.asarray(n_sharp, dtype=float) * hf * hf,
        projector=P,
    )


def phi_from_reduction(state: ReductionState, metric: Metric) -> ExteriorForm:
    """Φ rebuilt from reduction data via the ω_i expression."""
    t1, t2, t3 = state.theta
    star_term = hodge(wedge_all(state.dnu, t3, t2, t1), metric)
    return assemble_phi_reduction(state.dnu, state.theta, state.Theta, state.omega, star_term)


def phi_from_reduction_alt(state: ReductionState, frame: TorusFrame | None = None) -> ExteriorForm:
    """Φ rebuilt from reduction data via the horizontal σ_i and vol_M."""
    vertical = ()
    if frame is not None:
        vertical = (*frame.U, state.normal)
    return assemble_phi_alt(state.dnu, state.theta, state.Theta, state.sigma, state.volM, vertical)


def vol_from_gram(state: ReductionState) -> ExteriorForm:
    """(h²/6) Σ g_ij σ_i ∧ σ_j."""
    out = None
    for i in range(3):
        for j in range(3):
            term = (state.sigma[i] ^ state.sigma[j]) * state.G[i, j]
            out = term if out is None else out + term
    h2 = state.h * state.h
    return out * h2 / 6


def extract_A(F: Sequence[ExteriorForm], sigma: Sequence[ExteriorForm], Q, volM: ExteriorForm) -> np.ndarray:
    """A with F^+_j = Σ_i σ_i a_ij, from F_j ∧ σ_k = 2 w_kj vol_M and A = Q^{-1} W."""
    exact = (linalg.is_exact(np.asarray(Q)) and volM.is_exact
             and all(f.is_exact for f in F) and all(s.is_exact for s in sigma))
    Qm = np.asarray(Q, dtype=object if exact else float)
    if exact:
        W = np.array([[exact_ratio(F[j] ^ sigma[k], volM) / 2 if (F[j] ^ sigma[k]) else Fraction(0)
                       for j in range(3)] for k in range(3)], dtype=object)
    else:
        W = np.array([[ratio(F[j] ^ sigma[k], volM) / 2 for j in range(3)] for k in range(3)])
        if not linalg.is_spd(Qm):
            raise WeakCoherenceError("Q must be symmetric positive definite")
    try:
        return linalg.inv(Qm) @ W
    except np.linalg.LinAlgError:
        raise WeakCoherenceError("Q is singular") from None


def random_frame(rng: np.random.Generator, general: bool = False, scale: float = 0.3) -> TorusFrame:
    """Random generators over Φ0; with ``general`` also a random Spin(7) point L^*Φ0."""
    U = rng.normal(size=(3, 8))
    base = build_phi0()
    if not general:
        return TorusFrame.make(list(U), Metric.euclidean(8, exact=False), base.Phi, exact=False)
    L = np.eye(8) + scale * rng.normal(size=(8, 8))
    if np.linalg.det(L) < 0:
        L[0] *= -1
    Phi = pullback(base.Phi.map_coeffs(float), L)
    return TorusFrame.make(list(U), Metric(L.T @ L), Phi, exact=False)


def random_rational_frame(rng: np.random.Generator, bound: int = 5) -> TorusFrame:
    while True:
        U = [[Fraction(int(x), int(d)) for x, d in zip(rng.integers(-bound, bound + 1, 8),
                                                     rng.integers(1, 4, 8))] for _ in range(3)]
        frame = TorusFrame.make(U)
        try:
            gram(frame)
        except SingularGramError:
            continue
        return frame
