"""Flow equations for T^3-invariant Spin(7) metrics in the constant-curvature ansatz.

The triple is σ(t) = Ω B(t) for a fixed hyperKähler triple Ω with Q(0) = 1,
and the curvature is F = Ω A with A constant.  The flow then closes into
matrix ODEs

    B' = A,  V' = v = 2 Tr(Q^{-1} B^T A),  V Q' = A^T B + B^T A − v Q,

which for B = 1 + tA reduce to the familiar v = 2 Tr(Q^{-1}(1+tA)A) and
V Q' = 2(1+tA)A − vQ.  h is never integrated: it is read off det(Q).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import (
    ContractViolation,
    CosymplecticViolation,
    FlowDegenerateError,
    IntervalBoundaryError,
)

EIGEN_ZERO_TOL = 1e-10
ZERO_MATRIX_TOL = 1e-12


@dataclass(frozen=True)
class FlowState:
    t: float
    B: np.ndarray
    Q: np.ndarray
    V: float
    h: float


@dataclass(frozen=True)
class FlowConfig:
    dt: float = 1e-3
    t_max: float | None = None  # defaults to safety_margin * forward horizon
    safety_margin: float = 0.9

    def __post_init__(self):
        if not self.dt > 0:
            raise ContractViolation("dt must be positive")
        if not 0 < self.safety_margin <= 1:
            raise ContractViolation("safety_margin must lie in (0, 1]")


@dataclass
class Trajectory:
    A: np.ndarray
    dt: float
    t: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    h: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> FlowState:
        return FlowState(float(self.t[i]), self.B[i], self.Q[i], float(self.V[i]), float(self.h[i]))

    @property
    def final(self) -> FlowState:
        return self[-1]

    def to_json_obj(self, stride: int = 1) -> list[dict]:
        return [{"t": float(self.t[i]), "Q": self.Q[i].tolist(), "V": float(self.V[i]), "h": float(self.h[i])}
                for i in range(0, len(self), stride)]


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.shape != (3, 3):
        raise ContractViolation(f"expected a 3x3 matrix, got shape {A.shape}")
    return A


def curvature_condition(Q, A) -> np.ndarray:
    """QA − A^T Q; zero exactly when the bundle G2-structure is cosymplectic."""
    Q, A = _as_matrix(Q), _as_matrix(A)
    return Q @ A - A.T @ Q


def curvature_equations(Q, A) -> tuple:
    """The three scalar curvature equations, written out entry by entry."""
    Q, A = _as_matrix(Q), _as_matrix(A)
    q = lambda i, j: Q[i - 1, j - 1]  # noqa: E731
    a = lambda i, j: A[i - 1, j - 1]  # noqa: E731
    e1 = (-a(1, 3) * q(1, 2) + a(1, 2) * q(1, 3) - a(2, 3) * q(2, 2)
          + (a(2, 2) - a(3, 3)) * q(2, 3) + a(3, 2) * q(3, 3))
    e2 = (a(1, 3) * q(1, 1) + a(2, 3) * q(1, 2) + (a(3, 3) - a(1, 1)) * q(1, 3)
          - a(2, 1) * q(2, 3) - a(3, 1) * q(3, 3))
    e3 = (-a(1, 2) * q(1, 1) + (a(1, 1) - a(2, 2)) * q(1, 2) - a(3, 2) * q(1, 3)
          + a(2, 1) * q(2, 2) + a(3, 1) * q(2, 3))
    return e1, e2, e3


def equations_from_residual(R) -> tuple:
    """The same three quantities read off the antisymmetric residual QA − A^T Q."""
    return R[2, 1], R[0, 2], R[1, 0]


def is_symmetric_A(A, tol: float = 0.0) -> bool:
    return linalg.is_symmetric(_as_matrix(A), tol)


def flow_rhs(state: FlowState, A) -> tuple[np.ndarray, float, np.ndarray]:
    """(B', V', Q') at ``state``."""
    try:
        v, dQ = _rates(state.B, state.Q, state.V, np.asarray(A, dtype=float))
    except np.linalg.LinAlgError:
        raise FlowDegenerateError("Q is singular", t=state.t) from None
    return np.array(A, dtype=float), v, dQ


def _rates(B, Q, V, A):
    BtA = B.T @ A
    v = 2.0 * np.trace(np.linalg.solve(Q, BtA))
    return v, (BtA.T + BtA - v * Q) / V


def _pack(B, Q, V) -> np.ndarray:
    return np.concatenate([B.ravel(), Q.ravel(), [V]])


def _unpack(y):
    return y[:9].reshape(3, 3), y[9:18].reshape(3, 3), y[18]


def _spd3(Q) -> bool:
    return (Q[0, 0] > 0 and Q[0, 0] * Q[1, 1] - Q[0, 1] * Q[1, 0] > 0
            and np.linalg.det(Q) > 0)


def max_interval(A) -> tuple[float, float]:
    """(t−, t+): the component of {det(1 + tA) != 0} containing 0."""
    A = np.asarray(_as_matrix(A), dtype=float)
    lo, hi = -math.inf, math.inf
    for lam in np.linalg.eigvals(A):
        if abs(lam.imag) > 1e-12 * max(1.0, abs(lam)) or abs(lam) <= EIGEN_ZERO_TOL:
            continue
        root = -1.0 / lam.real
        if root > 0:
            hi = min(hi, root)
        else:
            lo = max(lo, root)
    return float(lo), float(hi)


def forward_horizon(A) -> float:
    """Length used for "the" forward run: t+, else |t−| when t+ is infinite, else 1."""
    lo, hi = max_interval(A)
    if math.isfinite(hi):
        return hi
    if math.isfinite(lo):
        return -lo
    return 1.0


def integrate(A, config: FlowConfig = FlowConfig()) -> Trajectory:
    """Classical RK4 from (B, Q, V) = (1, 1, 1); every step is recorded."""
    A = np.asarray(_as_matrix(A), dtype=float)
    if not is_symmetric_A(A):
        raise CosymplecticViolation("A is not symmetric: QA = A^T Q fails at Q = 1")
    t_max = config.t_max if config.t_max is not None else config.safety_margin * forward_horizon(A)
    n = max(1, int(round(t_max / config.dt)))
    dt = t_max / n

    dB = A.ravel()

    def rhs(t, y):
        B, Q, V = _unpack(y)
        try:
            v, dQ = _rates(B, Q, V, A)
        except np.linalg.LinAlgError:
            raise FlowDegenerateError("Q is singular", t=t) from None
        out = np.empty(19)
        out[:9] = dB
        out[9:18] = dQ.ravel()
        out[18] = v
        return out

    ys = np.empty((n + 1, 19))
    ys[0] = _pack(np.eye(3), np.eye(3), 1.0)
    ts = np.linspace(0.0, t_max, n + 1)
    y = ys[0]
    for k in range(n):
        t = ts[k]
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        _, Q, V = _unpack(y)
        if not (np.all(np.isfinite(y)) and V > 0 and _spd3(Q)):
            raise FlowDegenerateError(f"flow degenerates near t = {ts[k + 1]:.6g}", t=float(ts[k + 1]))
        ys[k + 1] = y
    B = ys[:, :9].reshape(-1, 3, 3)
    Q = ys[:, 9:18].reshape(-1, 3, 3)
    V = ys[:, 18].copy()
    h = np.linalg.det(Q) ** -0.25
    return Trajectory(A=A, dt=dt, t=ts, B=B, Q=Q, V=V, h=h)


def closed_form(A, t) -> FlowState:
    """B = 1 + tA, V = det(B)^2, Q = B^2 / det(B)^2, h = det(B).

    Exact when A and t are rationals.
    """
    A = _as_matrix(A)
    exact = linalg.is_exact(A) and isinstance(t, (int, Fraction))
    one = linalg.eye(3, exact=exact)
    B = one + (A * Fraction(t) if exact else np.asarray(A, dtype=float) * float(t))
    d = linalg.det(B)
    if d == 0 or (not exact and abs(d) < 1e-300):
        raise IntervalBoundaryError(f"det(1 + tA) = 0 at t = {t}")
    if not exact:
        lo, hi = max_interval(A)
        if not lo < float(t) < hi:
            raise IntervalBoundaryError(f"t = {t} lies outside the maximal interval ({lo}, {hi})")
    Q = (B @ B) / (d * d)
    return FlowState(t=t, B=B, Q=Q, V=d * d, h=d)


def constraint_drift(traj: Trajectory) -> float:
    """max |h_V^{-4} − det Q| / det Q with h_V = sqrt(V), the ODE-consistent value of h."""
    detQ = np.linalg.det(traj.Q)
    hV = np.sqrt(traj.V)
    return float(np.max(np.abs(hV ** -4 - detQ) / detQ))


def oracle_errors(traj: Trajectory) -> dict[str, float]:
    """Max relative deviation of the integrated trajectory from the closed form."""
    A = np.asarray(traj.A, dtype=float)
    lo, hi = max_interval(A)
    if not (lo < traj.t.min() and traj.t.max() < hi):
        raise IntervalBoundaryError("trajectory leaves the maximal interval")
    # closed form at every sample at once: B = 1 + tA, h = det B, V = h², Q = B²/h²
    B = np.eye(3) + traj.t[:, None, None] * A
    h = np.linalg.det(B)
    Q = B @ B / (h * h)[:, None, None]

    def rel(X, Y):
        return float(np.max(np.linalg.norm((X - Y).reshape(len(X), -1), axis=1)
                            / np.linalg.norm(Y.reshape(len(Y), -1), axis=1)))

    return {"Q": rel(traj.Q, Q), "V": float(np.max(np.abs(traj.V - h * h) / (h * h))),
            "h": float(np.max(np.abs(traj.h - h) / np.abs(h))), "B": rel(traj.B, B)}


def theta_stationarity_check(A, traj: Trajectory, base_points=None) -> float:
    """Spread of Q across base points along the trajectory.

    In this ansatz σ(t) = Ω B(t) with Ω constant-coefficient, so Q has no
    spatial dependence, dq^{lk} = 0, and θ' = 0 solves the connection
    equation.  The check recomputes Q from the wedge pairings of σ at each
    base point; anything nonzero would put the trajectory outside the ansatz.
    """
    from .hyperkahler import standard_hk_triple, triple_at

    base = standard_hk_triple()
    if base_points is None:
        base_points = np.random.default_rng(0).uniform(-1, 1, size=(3, 4))
    spread = 0.0
    for i in range(0, len(traj), max(1, len(traj) // 10)):
        Qs = [triple_at(base, traj.B[i], traj.V[i], p) for p in base_points]
        spread = max(spread, max(float(np.max(np.abs(Qp - Qs[0]))) for Qp in Qs))
    return spread


def volume_consistency_check(traj: Trajectory) -> float:
    """Compare V increments against Simpson quadrature of v = 2 Tr(Q^{-1} B^T A).

    The rate is recomputed independently from (Q, B) at every step; the
    residual is relative to the size of the increment.
    """
    A = traj.A
    v = np.array([2.0 * np.trace(np.linalg.solve(traj.Q[i], traj.B[i].T @ A)) for i in range(len(traj))])
    dt = traj.dt
    worst = 0.0
    for i in range(1, len(traj) - 1):
        simpson = dt / 3 * (v[i - 1] + 4 * v[i] + v[i + 1])
        incr = traj.V[i + 1] - traj.V[i - 1]
        scale = max(abs(simpson), dt * abs(traj.V[i]))
        worst = max(worst, abs(incr - simpson) / scale)
    return float(worst)


def completeness_classify(A) -> str:
    """complete only for A = 0; half-complete when no two eigenvalues have opposite signs."""
    A = np.asarray(_as_matrix(A), dtype=float)
    if not is_symmetric_A(A, tol=ZERO_MATRIX_TOL):
        raise ContractViolation("completeness is classified for symmetric A only")
    if np.max(np.abs(A)) <= ZERO_MATRIX_TOL:
        return "complete"
    ev = np.linalg.eigvalsh(A)
    has_pos = bool(np.any(ev > EIGEN_ZERO_TOL))
    has_neg = bool(np.any(ev < -EIGEN_ZERO_TOL))
    return "neither" if has_pos and has_neg else "half-complete"
