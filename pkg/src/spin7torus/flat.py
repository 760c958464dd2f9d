"""The flat model R^8 = C^4 with the diagonal maximal torus of SU(4).

Real coordinates are ordered (x1, y1, x2, y2, x3, y3, x4, y4) with
z_j = x_j + i y_j.  Complex vector fields are realified with
∂/∂z = ½(∂_x − i ∂_y).  Point coordinates may be Fractions, in which case
ν, the generators and their Gram matrix are exact.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation, SingularGramError
from .exterior import ExteriorForm, Metric, exterior_derivative_fd, gradient_fd, pullback, ratio, volume_form
from .flow import curvature_condition
from .reduction import TorusFrame, dual_coframe, extract_A, gram, mm_oneform, reduce_triple
from .report import Report
from .spin7 import Spin7Data, is_spin7_form, verify_norm_identity

COLLAPSE_MARGIN = 1e-3
FD_TOL = 1e-6


@dataclass(frozen=True)
class C4Point:
    x: tuple  # 8 real coordinates

    def __post_init__(self):
        if len(self.x) != 8:
            raise ContractViolation("a point of C^4 has eight real coordinates")

    @classmethod
    def from_complex(cls, z: Sequence) -> "C4Point":
        out = []
        for zj in z:
            if isinstance(zj, tuple):
                out.extend(zj)
            else:
                out.extend([complex(zj).real, complex(zj).imag])
        return cls(tuple(out))

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.x)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.x, dtype=object if self.exact else float)

    def pairs(self) -> list[tuple]:
        return [(self.x[2 * j], self.x[2 * j + 1]) for j in range(4)]

    @property
    def z(self) -> np.ndarray:
        return np.array([complex(float(a), float(b)) for a, b in self.pairs()])

    def norms2(self) -> list:
        return [a * a + b * b for a, b in self.pairs()]


@dataclass(frozen=True)
class XiCoords:
    v1: float
    v2: float
    v3: float
    w: float
    t: float

    @property
    def v(self) -> tuple:
        return (self.v1, self.v2, self.v3)


def _as_point(p) -> C4Point:
    if isinstance(p, C4Point):
        return p
    p = list(p)
    if len(p) == 4:
        return C4Point.from_complex(p)
    return C4Point(tuple(p))


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _product(p: C4Point):
    out = (1, 0)
    for zj in p.pairs():
        out = _cmul(out, zj)
    return out


def nu_flat(p) -> float:
    """ν = ⅛ Im(z1 z2 z3 z4)."""
    p = _as_point(p)
    im = _product(p)[1]
    return Fraction(im) / 8 if p.exact else float(im) / 8


def generators_flat(p) -> list[np.ndarray]:
    """U_j = ½(x_j ∂y_j − y_j ∂x_j) − ½(x4 ∂y4 − y4 ∂x4), j = 1, 2, 3."""
    p = _as_point(p)
    half = Fraction(1, 2) if p.exact else 0.5
    zero = Fraction(0) if p.exact else 0.0
    x = p.x
    U = []
    for j in range(3):
        u = [zero] * 8
        u[2 * j] -= half * x[2 * j + 1]
        u[2 * j + 1] += half * x[2 * j]
        u[6] += half * x[7]
        u[7] -= half * x[6]
        U.append(np.array(u, dtype=object if p.exact else float))
    return U


def gram_formula(p) -> np.ndarray:
    """G from 4 g_ij = δ_ij |z_i|² + |z4|²."""
    p = _as_point(p)
    n = p.norms2()
    G = np.empty((3, 3), dtype=object if p.exact else float)
    for i in range(3):
        for j in range(3):
            G[i, j] = ((n[i] if i == j else 0) + n[3]) / 4
    return G


def _re_dz4() -> ExteriorForm:
    """Re(dz1 ∧ dz2 ∧ dz3 ∧ dz4): blades with an even number of dy factors, sign (−1)^(#dy/2)."""
    out = ExteriorForm(8, 4)
    for choice in itertools.product((0, 1), repeat=4):
        k = sum(choice)
        if k % 2:
            continue
        idx = tuple(2 * j + 1 + c for j, c in enumerate(choice))
        out = out + ExteriorForm.blade(8, *idx, c=(-1) ** (k // 2))
    return out


@lru_cache(maxsize=1)
def phi_flat() -> ExteriorForm:
    """½ ω² + Re(dz1 dz2 dz3 dz4) with ω = Σ dx_j ∧ dy_j, exact coefficients."""
    omega = sum((ExteriorForm.blade(8, 2 * j + 1, 2 * j + 2) for j in range(1, 4)), ExteriorForm.blade(8, 1, 2))
    return (omega ^ omega) * Fraction(1, 2) + _re_dz4()


def flat_frame(p) -> TorusFrame:
    p = _as_point(p)
    Phi = phi_flat()
    if not p.exact:
        Phi = Phi.map_coeffs(float)
    return TorusFrame.make(generators_flat(p), Metric.euclidean(8, exact=p.exact), Phi, exact=p.exact)


def xi_coords(p) -> XiCoords:
    p = _as_point(p)
    n = p.norms2()
    re, im = _product(p)
    if not p.exact:
        n = [float(a) for a in n]
        re, im = float(re), float(im)
    return XiCoords((n[0] - n[3]) / 2, (n[1] - n[3]) / 2, (n[2] - n[3]) / 2, re, im / 8)


def _xi_vector(q: np.ndarray) -> np.ndarray:
    xi = xi_coords(C4Point(tuple(float(c) for c in q)))
    return np.array([xi.v1, xi.v2, xi.v3, xi.w])


def orbit_rank(p) -> int:
    """Dimension of the torus orbit through p: the rank of the generators."""
    U = np.array([[float(c) for c in u] for u in generators_flat(p)])
    return int(np.linalg.matrix_rank(U))


def collapse_margin(p) -> float:
    """Distance scale to the collapse locus: the second smallest |z_k|."""
    r = sorted(float(np.sqrt(float(n))) for n in _as_point(p).norms2())
    return r[1]


def collapse_classify(xi: XiCoords, tol: float = 0.0, refined: bool = False) -> str:
    """Orbit type over a point of M_0, smallest orbit first.

    The default applies the stratum constraints as listed.  A constraint
    v_i = v_j <= 0 alone also holds on free orbits with z_k = 0 and
    |z_i| = |z_j|; ``refined`` adds the missing v_k >= v_i, which makes the
    answer agree with the rank of the generators.
    """
    if abs(xi.w) > tol or abs(xi.t) > tol:
        raise ContractViolation("collapse classification needs w = 0 and t = 0")
    v1, v2, v3 = xi.v

    def eq(a, b):
        return abs(a - b) <= tol

    def le0(a):
        return a <= tol

    def ge0(a):
        return a >= -tol

    if eq(v1, 0) and eq(v2, 0) and eq(v3, 0):
        return "point"
    circle = ((eq(v1, v2) and eq(v2, v3) and le0(v1))
              or (eq(v1, 0) and eq(v2, 0) and ge0(v3))
              or (eq(v1, 0) and eq(v3, 0) and ge0(v2))
              or (eq(v2, 0) and eq(v3, 0) and ge0(v1)))
    if circle:
        return "circle"
    def pair(a, b, other):
        return eq(a, b) and le0(a) and (not refined or other >= a - tol)

    two_torus = (pair(v1, v2, v3)
                 or pair(v1, v3, v2)
                 or (eq(v1, 0) and ge0(v2) and ge0(v3))
                 or pair(v2, v3, v1)
                 or (eq(v2, 0) and ge0(v1) and ge0(v3))
                 or (eq(v3, 0) and ge0(v1) and ge0(v2)))
    return "two-torus" if two_torus else "free"


def sample_points(rng: np.random.Generator, n: int, radius: float = 2.0, avoid_t0: bool = True,
                  margin: float = COLLAPSE_MARGIN) -> list[C4Point]:
    """Uniform points of the ball, away from the collapse locus (and from t = 0)."""
    out = []
    while len(out) < n:
        x = rng.normal(size=8)
        x *= radius * rng.uniform() ** (1 / 8) / np.linalg.norm(x)
        p = C4Point(tuple(float(c) for c in x))
        if collapse_margin(p) < margin:
            continue
        if avoid_t0 and abs(nu_flat(p)) < margin:
            continue
        out.append(p)
    return out


# ---------------------------------------------------------------------------
# checks


def verify_mm_flat(points: Iterable, report: Report | None = None) -> Report:
    """fd differential of ν against Φ(U1, U2, U3, ·); collapse-locus points are skipped."""
    report = report or Report(suite="flat-r8.mm")
    worst, used = 0.0, 0
    for p in points:
        p = _as_point(p)
        try:
            gram(flat_frame(p))
        except SingularGramError:
            report.extra.setdefault("skipped", []).append({"point": [float(c) for c in p.x],
                                                          "reason": "singular Gram (collapse locus)"})
            continue
        q = np.array([float(c) for c in p.x])
        fd = gradient_fd(lambda y: nu_flat(C4Point(tuple(y))), q).to_vector()
        mm = mm_oneform(flat_frame(C4Point(tuple(q)))).to_vector().astype(float)
        worst = max(worst, float(np.max(np.abs(fd - mm))))
        used += 1
    report.add("dnu", "d nu = Phi(U1, U2, U3, .)", worst, FD_TOL, detail={"points": used})
    return report


def _require_t(p: C4Point):
    if abs(nu_flat(p)) == 0:
        raise ContractViolation("the level t = 0 is singular; coordinate formulas need t != 0")


def _coordinate_differentials(q: np.ndarray):
    d = [gradient_fd(lambda y, i=i: _xi_vector(y)[i], q) for i in range(4)]
    return d[:3], d[3]


def _etas(dv, Ginv):
    return [sum((dv[i] * Ginv[i, j] for i in range(3)), ExteriorForm(8, 1)) for j in range(3)]


def sigma_formula(p) -> tuple[ExteriorForm, ...]:
    """16 σ_i = η_i ∧ dw + 4 dv_j ∧ dv_k, restricted to the horizontal space."""
    p = _as_point(p)
    _require_t(p)
    q = np.array([float(c) for c in p.x])
    st = reduce_triple(flat_frame(C4Point(tuple(q))))
    dv, dw = _coordinate_differentials(q)
    eta = _etas(dv, np.asarray(st.Ginv, dtype=float))
    out = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        out.append(pullback((eta[i] ^ dw) + (dv[j] ^ dv[k]) * 4, st.projector) * (1 / 16))
    return tuple(out)


def curvature_formula(p) -> tuple[ExteriorForm, ...]:
    """F_i = 2 t h² η_w ∧ (...) with f the common off-diagonal Gram entry."""
    p = _as_point(p)
    _require_t(p)
    q = np.array([float(c) for c in p.x])
    st = reduce_triple(flat_frame(C4Point(tuple(q))))
    G = np.asarray(st.G, dtype=float)
    off = [G[0, 1], G[0, 2], G[1, 2]]
    if max(off) - min(off) > 1e-12 * max(1.0, max(off)):
        raise ContractViolation("off-diagonal Gram entries differ")
    f = off[0]
    dv, dw = _coordinate_differentials(q)
    eta = _etas(dv, np.asarray(st.Ginv, dtype=float))
    dwv = dw.to_vector().astype(float)
    eta_w = dw * (1.0 / float(dwv @ dwv))
    t = nu_flat(p)
    h2 = float(st.h) ** 2
    g = np.diag(G)
    out = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        # F_1 pairs (η2: (g33 − f)(g22 − 2f)) and (η3: (g22 − f)(g33 − 2f)); cyclic in (1, 2, 3)
        lin = (eta[i] * (2 * g[j] * g[k] - f * (g[j] + g[k]))
               + eta[j] * ((g[k] - f) * (g[j] - 2 * f))
               + eta[k] * ((g[j] - f) * (g[k] - 2 * f)))
        out.append(pullback((eta_w ^ lin) * (2 * t * h2), st.projector))
    return tuple(out)


def curvature_fd(p, step: float = 1e-5) -> tuple[ExteriorForm, ...]:
    """Horizontal part of dθ_i by central differences of the dual coframe field."""
    q = np.array([float(c) for c in _as_point(p).x])
    st = reduce_triple(flat_frame(C4Point(tuple(q))))

    def theta(y, i):
        fr = flat_frame(C4Point(tuple(y)))
        _, Ginv, _ = gram(fr)
        return dual_coframe(fr, Ginv)[i]

    return tuple(pullback(exterior_derivative_fd(lambda y, i=i: theta(y, i), q, step), st.projector)
                 for i in range(3))


def _rel(a: ExteriorForm, b: ExteriorForm) -> float:
    return (a - b).max_abs() / max(1.0, b.max_abs())


def sigma_point_residuals(p) -> dict[str, float]:
    p = _as_point(p)
    st = reduce_triple(flat_frame(p))
    formula = sigma_formula(p)
    Qs = np.array([[ratio(st.sigma[i] ^ st.sigma[j], st.volM) / 2 for j in range(3)] for i in range(3)])
    h2Q = float(st.h) ** 2 * Qs
    return {
        "sigma": max(_rel(formula[i], st.sigma[i]) for i in range(3)),
        "Ginv": float(np.max(np.abs(np.asarray(st.Ginv, float) - h2Q)) / max(1.0, np.abs(h2Q).max())),
    }


def curvature_point_residuals(p) -> dict[str, float]:
    p = _as_point(p)
    st = reduce_triple(flat_frame(p))
    F = curvature_formula(p)
    Ffd = curvature_fd(p)
    # η_w(dw#) = 1 and η_w(dv_i#) = 0 in the ambient metric
    q = np.array([float(c) for c in p.x])
    dv, dw = _coordinate_differentials(q)
    dwv = dw.to_vector().astype(float)
    eta_w = dwv / (dwv @ dwv)
    A = extract_A(F, st.sigma, st.Q, st.volM)
    Fminus = [F[j] - sum((st.sigma[i] * A[i, j] for i in range(3)), ExteriorForm(8, 2)) for j in range(3)]
    R = curvature_condition(np.asarray(st.Q, float), A)
    return {
        "F": max(_rel(F[i], Ffd[i]) for i in range(3)),
        "eta_w": max([abs(eta_w @ dwv - 1.0)] + [abs(eta_w @ d.to_vector().astype(float)) for d in dv]),
        "asd": max(f.max_abs() for f in Fminus),
        "QA": float(np.max(np.abs(R))) / max(1.0, float(np.abs(A).max())),
    }


def sigma_flat_check(points: Iterable, report: Report | None = None) -> Report:
    report = report or Report(suite="flat-r8.sigma")
    res = [sigma_point_residuals(p) for p in points]
    report.add("sigma", "coordinate formula for sigma_i", max(r["sigma"] for r in res), FD_TOL,
               detail={"points": len(res)})
    report.add("Ginv=h2Q", "G^{-1} = h^2 Q", max(r["Ginv"] for r in res), 1e-9)
    return report


def curvatureF_flat_check(points: Iterable, report: Report | None = None) -> Report:
    report = report or Report(suite="flat-r8.curvature")
    res = [curvature_point_residuals(p) for p in points]
    report.add("F", "coordinate formula for F vs d theta", max(r["F"] for r in res), FD_TOL,
               detail={"points": len(res)})
    report.add("eta_w", "eta_w normalization", max(r["eta_w"] for r in res), FD_TOL)
    min_asd = min(r["asd"] for r in res)
    report.add_flag("F!=F+", "anti-self-dual part of F is nonzero", min_asd > 1e-8, detail={"min_asd_norm": min_asd})
    report.add("QA=ATQ", "curvature condition QA = A^T Q", max(r["QA"] for r in res), 1e-8)
    return report


def phi_flat_checks(rng: np.random.Generator, report: Report | None = None, n_vectors: int = 5) -> Report:
    report = report or Report(suite="flat-r8.phi")
    Phi = phi_flat()
    metric = Metric.euclidean(8)
    r_vol, r_sd = is_spin7_form(Phi, metric)
    report.add("phi.square", "Phi^2 = 14 vol", r_vol, 0.0)
    report.add("phi.self-dual", "*Phi = Phi", r_sd, 0.0)
    report.add("phi.coeff", "coefficient of dx1 dy1 dx2 dy2", abs(Phi.coeff(1, 2, 3, 4) - 1), 0.0)
    data = Spin7Data(Phi=Phi, metric=metric, vol=volume_form(metric))
    worst = 0.0
    for _ in range(n_vectors):
        X = [Fraction(int(c)) for c in rng.integers(-4, 5, 8)]
        Y = [Fraction(int(c)) for c in rng.integers(-4, 5, 8)]
        worst = max(worst, abs(float(verify_norm_identity(data, X, Y))))
    report.add("phi.norm-identity", "|X wedge Y| norm identity", worst, 0.0)
    return report


def q_nonconstant(points: Sequence) -> float:
    """Spread of the off-diagonal entry of Q over the sample; positive means not coherent."""
    vals = [float(np.asarray(reduce_triple(flat_frame(p)).Q, dtype=float)[0, 1]) for p in points]
    return float(max(vals) - min(vals))


def flat_suite(n_points: int = 50, seed: int = 0, n_formula: int | None = None) -> Report:
    """Every flat-model check on one seeded sample; the σ/F formulas use the first ``n_formula`` points."""
    rng = np.random.default_rng(seed)
    n_formula = min(n_points, 20) if n_formula is None else n_formula
    rep = Report(suite="flat-r8", seed=seed, config_echo={"points": n_points, "formula_points": n_formula})
    phi_flat_checks(rng, rep)
    pts = sample_points(rng, n_points)
    verify_mm_flat(pts, rep)
    rational = [C4Point(tuple(Fraction(int(c), 3) for c in rng.integers(-6, 7, 8))) for _ in range(n_points)]
    bad = sum(int(np.any(gram(flat_frame(p))[0] != gram_formula(p))) for p in rational if collapse_margin(p) > 0)
    rep.add("gram.formula", "4 g_ij = delta_ij |z_i|^2 + |z4|^2, exact", float(bad), 0.0)
    sigma_flat_check(pts[:n_formula], rep)
    curvatureF_flat_check(pts[:n_formula], rep)
    spread = q_nonconstant(pts[:n_formula])
    rep.add_flag("Q.non-constant", "weakly coherent but not coherent", spread > 1e-6, detail={"spread_q12": spread})
    return rep
