"""The Spin(7) four-form, its torus-adapted expressions and the induced G2 pair.

Index layout used throughout the package for eight-dimensional objects:
1, 2, 3 are the torus (fibre) directions, 4 is the multi-moment / flow
direction and 5..8 span the four-dimensional quotient.  Seven-dimensional
bundle objects drop slot 4: 1..3 fibre, 4..7 base.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .errors import ContractViolation, FactorizationError, WeakCoherenceError
from .exterior import (
    ExteriorForm,
    Metric,
    embed,
    exact_ratio,
    hodge,
    interior,
    ratio,
    restrict,
    volume_form,
    wedge,
    wedge_all,
)

RADICAND_TOL = 1e-12


@dataclass(frozen=True)
class Spin7Data:
    Phi: ExteriorForm
    metric: Metric
    vol: ExteriorForm


@dataclass(frozen=True)
class G2Data:
    phi: ExteriorForm
    psi: ExteriorForm
    metric: Metric
    h: float


@dataclass(frozen=True)
class FrameCoeffs:
    """Upper-triangular K = [[k1,k2,k3],[0,l2,l3],[0,0,m3]] with K K^T = G^{-1}."""

    k1: float
    k2: float
    k3: float
    l2: float
    l3: float
    m3: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.k1, self.k2, self.k3],
                         [0.0, self.l2, self.l3],
                         [0.0, 0.0, self.m3]])

    def as_tuple(self) -> tuple[float, ...]:
        return (self.k1, self.k2, self.k3, self.l2, self.l3, self.m3)


def _e(dim: int, *idx: int) -> ExteriorForm:
    return ExteriorForm.blade(dim, *idx, c=Fraction(1))


def build_phi0() -> Spin7Data:
    """The standard Cayley form on R^8, exact coefficients."""
    e = lambda *i: _e(8, *i)  # noqa: E731
    Phi = (e(1, 2, 3, 4)
           + wedge(e(1, 2) + e(3, 4), e(5, 6) + e(7, 8))
           + wedge(e(1, 3) - e(2, 4), e(5, 7) - e(6, 8))
           - wedge(e(1, 4) + e(2, 3), e(5, 8) + e(6, 7))
           + e(5, 6, 7, 8))
    metric = Metric.euclidean(8)
    return Spin7Data(Phi, metric, volume_form(metric))


def verify_norm_identity(s: Spin7Data, X: Sequence, Y: Sequence):
    """(Y⌟X⌟Φ)^2 ∧ Φ − 6|X∧Y|^2 vol, as a multiple of vol."""
    if s.Phi.dim != 8:
        raise ContractViolation("norm identity lives on R^8")
    beta = interior(Y, interior(X, s.Phi))
    lhs = wedge_all(beta, beta, s.Phi)
    g = s.metric
    xx, yy, xy = g.inner(X, X), g.inner(Y, Y), g.inner(X, Y)
    rhs = s.vol * (6 * (xx * yy - xy * xy))
    diff = lhs - rhs
    if diff.is_exact and s.vol.is_exact:
        return exact_ratio(diff, s.vol) if diff else Fraction(0)
    return ratio(diff, s.vol)


def solve_frame_coeffs(Ginv) -> FrameCoeffs:
    """Back-substitute K K^T = G^{-1} from the bottom-right corner."""
    g = np.asarray(Ginv, dtype=float)
    if g.shape != (3, 3) or not linalg.is_symmetric(g, tol=1e-12 * max(1.0, np.abs(g).max())):
        raise FactorizationError("G^{-1} must be a symmetric 3x3 matrix")

    def root(x, name):
        if not x >= RADICAND_TOL:
            raise FactorizationError(f"radicand for {name} is {x:.3e}; G^-1 is not positive definite")
        return math.sqrt(x)

    m3 = root(g[2, 2], "m3")
    l3 = g[1, 2] / m3
    l2 = root(g[1, 1] - l3 * l3, "l2")
    k3 = g[0, 2] / m3
    k2 = (g[0, 1] - k3 * l3) / l2
    k1 = root(g[0, 0] - k2 * k2 - k3 * k3, "k1")
    return FrameCoeffs(k1, k2, k3, l2, l3, m3)


def _check_grades(forms, grade, name):
    for f in forms:
        if f.grade != grade:
            raise ContractViolation(f"{name} must have grade {grade}, got {f.grade}")


def assemble_phi_reduction(dnu, theta, Theta, omega, star_term) -> ExteriorForm:
    """Φ from the multi-moment one-form, the two coframes and the ω_i.

    ``star_term`` is *(dν ∧ θ3 ∧ θ2 ∧ θ1) in the ambient metric.
    """
    _check_grades([dnu, *theta, *Theta], 1, "one-form inputs")
    _check_grades(omega, 2, "omega")
    _check_grades([star_term], 4, "star_term")
    t1, t2, t3 = theta
    inner = (wedge_all(t2, t3, t1) * 2
             + (Theta[0] ^ omega[0]) + (Theta[1] ^ omega[1]) + (Theta[2] ^ omega[2]))
    return ((dnu ^ inner)
            + wedge_all(t3, t2, omega[0])
            + wedge_all(t1, t3, omega[1])
            + wedge_all(t2, t1, omega[2])
            + star_term)


def assemble_phi_alt(dnu, theta, Theta, sigma, volM, vertical=(), tol: float = 1e-9) -> ExteriorForm:
    """Φ written with horizontal σ_i and vol_M.

    ``vertical`` lists vectors (the U_i and (dν)^♯) that every σ_i must
    annihilate; pass them to have horizontality checked.
    """
    _check_grades([dnu, *theta, *Theta], 1, "one-form inputs")
    _check_grades(sigma, 2, "sigma")
    _check_grades([volM], 4, "volM")
    for v in vertical:
        for i, s in enumerate(sigma):
            if not interior(v, s).is_zero(tol * max(1.0, s.max_abs())):
                raise ContractViolation(f"sigma_{i + 1} is not horizontal")
    t1, t2, t3 = theta
    inner = (wedge_all(t3, t2, t1)
             + (Theta[0] ^ sigma[0]) + (Theta[1] ^ sigma[1]) + (Theta[2] ^ sigma[2]))
    return ((dnu ^ inner)
            + wedge_all(t3, t2, sigma[0])
            + wedge_all(t1, t3, sigma[1])
            + wedge_all(t2, t1, sigma[2])
            + volM)


# ---------------------------------------------------------------------------
# G2 structures on T^3-bundles over a four-space

BASE = (4, 5, 6, 7)  # base slots of the seven-dimensional bundle model


def _as_bundle_form(f: ExteriorForm) -> ExteriorForm:
    if f.dim == 7:
        return f
    if f.dim == 4:
        return embed(f, 7, 3)
    raise ContractViolation(f"expected a form on R^4 or R^7, got dimension {f.dim}")


def _h_from_Q(Q) -> float:
    d = linalg.det(Q)
    if not float(d) > 0:
        raise WeakCoherenceError("Q is not positive definite")
    return float(d) ** -0.25


def volume_from_triple(Q, sigma) -> ExteriorForm:
    """vol_M = (1/6) Σ q^{ij} σ_i ∧ σ_j."""
    Qi = linalg.inv(Q)
    out = None
    for i in range(3):
        for j in range(3):
            term = (sigma[i] ^ sigma[j]) * Qi[i, j]
            out = term if out is None else out + term
    return out / 6


def triple_gram(sigma, vol) -> np.ndarray:
    """q_ij with σ_i ∧ σ_j = 2 q_ij vol."""
    return np.array([[ratio(sigma[i] ^ sigma[j], vol) / 2 for j in range(3)] for i in range(3)])


def base_metric_from_triple(sigma4, Q) -> np.ndarray:
    """Metric on R^4 whose volume is vol_M and for which h K^{-1} σ is the standard triple.

    ``sigma4`` are two-forms on R^4.  The triple τ = h K^{-1} σ satisfies
    τ_a ∧ τ_b = 2 δ_ab vol_M, so it is orthonormal self-dual for exactly
    one metric, recovered as g = −T3 T1^{-1} T2 from the matrices T_a of τ_a.
    """
    Q = np.asarray(Q, dtype=float)
    if not linalg.is_spd(Q):
        raise WeakCoherenceError("Q is not symmetric positive definite")
    h = _h_from_Q(Q)
    K = solve_frame_coeffs(h * h * Q).matrix
    Kinv = np.linalg.inv(K)
    S = [s.to_matrix().astype(float) for s in sigma4]
    T = [h * sum(Kinv[a, i] * S[i] for i in range(3)) for a in range(3)]
    try:
        g = -T[2] @ np.linalg.inv(T[0]) @ T[1]
    except np.linalg.LinAlgError:
        raise WeakCoherenceError("sigma_1 is degenerate") from None
    g = 0.5 * (g + g.T)
    ev = np.linalg.eigvalsh(g)
    if ev.min() <= 0:
        if ev.max() < 0:
            raise WeakCoherenceError("triple has the opposite handedness to the fibre orientation")
        raise WeakCoherenceError("triple does not span a maximal positive subspace")
    return g


def g2_pair_from_bundle_data(Q, theta, sigma, volM=None, tol: float = 1e-9) -> G2Data:
    """(φ, ψ) and the G2 metric on the seven-dimensional bundle model.

    θ_i are one-forms on R^7 (slots 1..3 fibre, 4..7 base), σ_i and vol_M
    are horizontal (given on R^4 or already embedded).  When ``volM`` is
    omitted it is taken to be (1/6) Σ q^{ij} σ_i ∧ σ_j.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (3, 3) or not linalg.is_spd(Q):
        raise WeakCoherenceError("Q must be symmetric positive definite")
    sigma = [_as_bundle_form(s) for s in sigma]
    theta = list(theta)
    _check_grades(theta, 1, "theta")
    _check_grades(sigma, 2, "sigma")
    if volM is None:
        volM = volume_from_triple(Q, sigma)
    volM = _as_bundle_form(volM)
    Qs = triple_gram(sigma, volM)
    if np.max(np.abs(Qs - Q)) > tol * max(1.0, np.abs(Q).max()):
        raise WeakCoherenceError("sigma_i ∧ sigma_j != 2 q_ij vol_M for the given Q and vol_M")

    h = _h_from_Q(Q)
    Qi = np.linalg.inv(Q)
    Theta = [sum((theta[j] * Qi[i, j] for j in range(3)), ExteriorForm(7, 1)) for i in range(3)]
    t1, t2, t3 = theta
    h_phi = (wedge_all(t3, t2, t1)
             + (Theta[0] ^ sigma[0]) + (Theta[1] ^ sigma[1]) + (Theta[2] ^ sigma[2]))
    psi = (wedge_all(t3, t2, sigma[0]) + wedge_all(t1, t3, sigma[1])
           + wedge_all(t2, t1, sigma[2]) + volM)

    gM = base_metric_from_triple([restrict(s, BASE) for s in sigma], Q)
    G = np.linalg.inv(h * h * Q)
    C = np.array([[float(t.coeff(k)) for k in range(1, 8)] for t in theta])
    gX = C.T @ G @ C
    gX[3:, 3:] += gM
    # vol_X = N ⌟ vol_8, which is −(fibre ∧ base) in the seven-dimensional layout
    return G2Data(phi=h_phi * (1.0 / h), psi=psi, metric=Metric(0.5 * (gX + gX.T), orientation=-1), h=h)


def rescale_structure(state, lam: float):
    """Q -> λ²Q, G -> λG, h -> λ^{-3/2} h, Θ -> λ^{-2} Θ, vol_M -> λ^{-2} vol_M.

    Works on any dataclass carrying some of the fields Q, G, Ginv, h,
    Theta, volM; fields it does not have are left alone.
    """
    if not lam > 0:
        raise ContractViolation("lambda must be positive")
    names = {f.name for f in dataclasses.fields(state)}
    updates = {}
    if "Q" in names:
        updates["Q"] = np.asarray(state.Q) * lam ** 2
    if "G" in names:
        updates["G"] = np.asarray(state.G) * lam
    if "Ginv" in names:
        updates["Ginv"] = np.asarray(state.Ginv) / lam
    if "h" in names:
        updates["h"] = state.h * lam ** -1.5
    if "Theta" in names:
        updates["Theta"] = tuple(T * lam ** -2 for T in state.Theta)
    if "volM" in names:
        updates["volM"] = state.volM * lam ** -2
    return dataclasses.replace(state, **updates)


def spin7_metric(G, h: float, gM, theta=None) -> Metric:
    """h² dt² + g_M + Σ g_ij θ_i θ_j as an 8x8 matrix.

    Slots follow the package layout (fibre 1..3, dt at 4, base 5..8).
    ``theta`` is an optional 3x7 array of connection coefficients in the
    seven coordinates (fibre 1..3, base 4..7); by default θ_i = dy_i.  The
    cross terms g_ij θ_i θ_j of the symmetric product appear in both the
    (i, j) and (j, i) matrix slots.
    """
    G = np.asarray(G, dtype=float)
    gM = np.asarray(gM, dtype=float)
    if not h > 0:
        raise FactorizationError("h must be positive")
    if not linalg.is_spd(G) or not linalg.is_spd(gM):
        raise FactorizationError("G and g_M must be symmetric positive definite")
    C7 = np.hstack([np.eye(3), np.zeros((3, 4))]) if theta is None else np.asarray(theta, dtype=float)
    C = np.insert(C7, 3, 0.0, axis=1)  # open the dt slot
    g = C.T @ G @ C
    g[3, 3] += h * h
    g[4:, 4:] += gM
    g = 0.5 * (g + g.T)
    if not linalg.is_spd(g):
        raise FactorizationError("assembled Spin(7) metric is not positive definite")
    return Metric(g)


def spin7_form(h: float, phi: ExteriorForm, psi: ExteriorForm) -> ExteriorForm:
    """Φ = h dt ∧ φ + ψ on R^8 (dt in slot 4) from a G2 pair on the bundle model."""
    lift = lambda f: ExteriorForm(8, f.grade, {tuple(i if i <= 3 else i + 1 for i in b): c  # noqa: E731
                                               for b, c in f.items()})
    dt = ExteriorForm.blade(8, 4, c=1.0)
    return (dt ^ lift(phi)) * h + lift(psi)


def is_spin7_form(Phi: ExteriorForm, metric: Metric, tol: float = 1e-9) -> tuple[float, float]:
    """Residuals of Φ∧Φ = 14 vol_g and *Φ = Φ, scaled by the size of Φ."""
    vol = volume_form(metric)
    scale = max(1.0, Phi.max_abs())
    r_vol = abs(ratio(Phi ^ Phi, vol) - 14.0) / 14.0
    r_sd = (hodge(Phi, metric) - Phi).max_abs() / scale
    return r_vol, r_sd
