"""Named verification suites.  Each returns a Report; all randomness flows from ``seed``."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import flat, flow, linalg
from .errors import CosymplecticViolation
from .exterior import ExteriorForm, Metric, hodge
from .reduction import (
    TorusFrame,
    phi_from_reduction,
    phi_from_reduction_alt,
    random_frame,
    random_rational_frame,
    reduce_triple,
    vol_from_gram,
)
from .report import Report
from .spin7 import build_phi0, is_spin7_form, verify_norm_identity

SUITES = ("spin7-identities", "reduction", "flat-r8", "cosymplectic")


def _int_vec(rng, n=8, bound=5):
    return [int(c) for c in rng.integers(-bound, bound + 1, n)]


def spin7_identities(seed: int = 0, points: int = 200) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report(suite="spin7-identities", seed=seed, config_echo={"points": points})
    s = build_phi0()
    r_vol, r_sd = is_spin7_form(s.Phi, s.metric)
    rep.add("phi0.square", "Phi0^2 = 14 vol0", r_vol, 0.0)
    rep.add("phi0.self-dual", "*Phi0 = Phi0", r_sd, 0.0)
    worst = 0
    for _ in range(points):
        worst = max(worst, abs(verify_norm_identity(s, _int_vec(rng), _int_vec(rng))))
    rep.add("norm-identity", "(Y.X.Phi0)^2 Phi0 = 6|X^Y|^2 vol0", float(worst), 0.0)
    # Hodge involution under a random rational metric
    L = np.array([[Fraction(int(c), 4) for c in row] for row in rng.integers(-2, 3, (8, 8))], dtype=object)
    g = L.T @ L + linalg.eye(8, exact=True) * 2
    m = Metric(g.astype(float))
    a = ExteriorForm.from_dense(8, 3, rng.normal(size=56))
    rep.add("hodge.involution", "** = (-1)^{k(n-k)}", (hodge(hodge(a, m), m) + a).max_abs(), 1e-10)
    return rep


def reduction(seed: int = 0, points: int = 100) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report(suite="reduction", seed=seed, config_echo={"points": points})
    worst_g = worst_asm = worst_vol = 0.0
    for k in range(points):
        fr = random_frame(rng, general=bool(k % 2))
        st = reduce_triple(fr)
        Ginv = np.asarray(st.Ginv, dtype=float)
        h2Q = float(st.h) ** 2 * np.asarray(st.Q, dtype=float)
        worst_g = max(worst_g, float(np.max(np.abs(Ginv - h2Q)) / np.max(np.abs(Ginv))))
        a, b = phi_from_reduction(st, fr.metric), phi_from_reduction_alt(st, fr)
        worst_asm = max(worst_asm, (a - b).max_abs() / max(1.0, a.max_abs()),
                        (a - fr.Phi).max_abs() / max(1.0, fr.Phi.max_abs()))
        worst_vol = max(worst_vol, (vol_from_gram(st) - st.volM).max_abs() / max(1e-300, st.volM.max_abs()))
    rep.add("Ginv=h2Q", "G^{-1} = h^2 Q", worst_g, 1e-10)
    rep.add("assembly", "omega and sigma expressions for Phi agree", worst_asm, 1e-9)
    rep.add("volM.gram", "vol_M = (h^2/6) sum g_ij sigma_i sigma_j", worst_vol, 1e-9)

    bad = 0
    for _ in range(max(1, points // 10)):
        fr = random_rational_frame(rng)
        st = reduce_triple(fr)
        for i, th in enumerate(st.theta):
            for j, u in enumerate(fr.U):
                val = sum((c * u[b[0] - 1] for b, c in th.items()), Fraction(0))
                bad += val != (1 if i == j else 0)
    rep.add("theta(U)=delta", "dual coframe, exact", float(bad), 0.0)

    std = TorusFrame.make([[1 if k == i else 0 for k in range(8)] for i in range(3)])
    st = reduce_triple(std)
    Phi0 = build_phi0().Phi
    ok = phi_from_reduction(st, std.metric) == Phi0 and phi_from_reduction_alt(st, std) == Phi0
    rep.add_flag("standard-frame", "both expressions reproduce Phi0", ok)
    return rep


def cosymplectic(seed: int = 0, points: int = 10, A=None) -> Report:
    rng = np.random.default_rng(seed)
    echo = {"points": points}
    if A is not None:
        echo["A"] = np.asarray(A, dtype=float).tolist()
    rep = Report(suite="cosymplectic", seed=seed, config_echo=echo)
    if A is not None:
        A = np.asarray(A, dtype=float)
        R = flow.curvature_condition(np.eye(3), A)
        rep.add("QA=ATQ", "QA = A^T Q at Q = 1", float(np.max(np.abs(R))), 0.0)
        return rep

    exact_bad = 0
    for _ in range(points):
        M = np.array([[Fraction(int(c)) for c in row] for row in rng.integers(-3, 4, (3, 3))], dtype=object)
        Q = M @ M.T + linalg.eye(3, exact=True)
        S = np.array([[Fraction(int(c)) for c in row] for row in rng.integers(-3, 4, (3, 3))], dtype=object)
        S = S + S.T
        R = flow.curvature_condition(Q, linalg.inv(Q) @ S)
        exact_bad += sum(1 for x in R.ravel() if x != 0)
        eqs = flow.curvature_equations(Q, linalg.inv(Q) @ S)
        exact_bad += sum(1 for x in eqs if x != 0)
    rep.add("Q^-1 S", "QA = A^T Q exactly for A = Q^{-1} S", float(exact_bad), 0.0)

    refused = 0
    for _ in range(points):
        A = rng.uniform(-0.25, 0.25, (3, 3))
        A[0, 1] += 0.1  # keep it away from symmetric
        try:
            flow.integrate(A, flow.FlowConfig(t_max=0.01))
        except CosymplecticViolation:
            refused += 1
    rep.add("refuse-nonsymmetric", "integrate needs symmetric A", float(points - refused), 0.0)

    worst = 0.0
    for _ in range(points):
        Q = rng.normal(size=(3, 3))
        Q = Q @ Q.T + np.eye(3)
        A = rng.normal(size=(3, 3))
        R = flow.curvature_condition(Q, A)
        worst = max(worst, float(np.max(np.abs(np.subtract(flow.curvature_equations(Q, A),
                                                            flow.equations_from_residual(R))))))
    rep.add("equations", "scalar curvature equations vs residual entries", worst, 1e-12)
    return rep


def run_suite(name: str, seed: int = 0, points: int | None = None, A=None) -> Report:
    if name == "spin7-identities":
        return spin7_identities(seed, points or 200)
    if name == "reduction":
        return reduction(seed, points or 100)
    if name == "flat-r8":
        return flat.flat_suite(points or 50, seed)
    if name == "cosymplectic":
        return cosymplectic(seed, points or 10, A)
    raise KeyError(name)
