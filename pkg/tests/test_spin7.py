from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spin7torus.errors import ContractViolation, FactorizationError, WeakCoherenceError
from spin7torus.exterior import ExteriorForm, hodge, wedge
from spin7torus.spin7 import (
    assemble_phi_alt,
    assemble_phi_reduction,
    build_phi0,
    g2_pair_from_bundle_data,
    is_spin7_form,
    rescale_structure,
    solve_frame_coeffs,
    spin7_form,
    spin7_metric,
    verify_norm_identity,
)

from strategies import int_vectors

S = build_phi0()


def e(n, *idx, c=1):
    return ExteriorForm.blade(n, *idx, c=c)


def hk_triple():
    return [e(7, 4, 5) + e(7, 6, 7), e(7, 4, 6) - e(7, 5, 7), e(7, 4, 7) + e(7, 5, 6)]


def fibre_coframe():
    return [e(7, 1), e(7, 2), e(7, 3)]


def random_spd(rng, n=3, shift=0.5):
    M = rng.normal(size=(n, n))
    return M @ M.T + shift * np.eye(n)


def triple_for(Q):
    """σ = M τ with M M^T = Q, so σ_i ∧ σ_j = 2 q_ij vol."""
    M = np.linalg.cholesky(Q)
    tau = hk_triple()
    return [sum((tau[a] * float(M[i, a]) for a in range(3)), ExteriorForm(7, 2)) for i in range(3)]


def connection(rng, scale=0.3):
    """θ_i = dy_i + (random base one-form)."""
    return [e(7, i + 1, c=1.0) + ExteriorForm(7, 1, {(k,): scale * rng.normal() for k in range(4, 8)})
            for i in range(3)]


# ---- the model four-form --------------------------------------------------


def test_phi0_terms():
    Phi = S.Phi
    assert len(Phi) == 14
    assert Phi.coeff(1, 2, 3, 4) == 1
    assert Phi.coeff(5, 6, 7, 8) == 1
    assert Phi.coeff(1, 4, 5, 8) == -1
    assert all(abs(c) == 1 for _, c in Phi.items())


def test_phi0_is_spin7():
    assert is_spin7_form(S.Phi, S.metric) == (0, 0)


def test_norm_identity_examples():
    d = lambda i: [1 if k == i else 0 for k in range(8)]  # noqa: E731
    assert verify_norm_identity(S, d(0), d(1)) == 0
    X = [1, 2, 0, -1, 0, 3, 0, 1]
    assert verify_norm_identity(S, X, X) == 0


@given(int_vectors(8), int_vectors(8))
@settings(max_examples=40, deadline=None)
def test_norm_identity_exact(X, Y):
    assert verify_norm_identity(S, X, Y) == Fraction(0)


def test_norm_identity_needs_r8():
    bad = type(S)(Phi=e(7, 1, 2, 3, 4), metric=S.metric, vol=S.vol)
    with pytest.raises(ContractViolation):
        verify_norm_identity(bad, [1] * 7, [0] * 7)


# ---- frame coefficients ---------------------------------------------------


def test_frame_coeffs_identity():
    assert solve_frame_coeffs(np.eye(3)).as_tuple() == (1, 0, 0, 1, 0, 1)


def test_frame_coeffs_diagonal():
    assert solve_frame_coeffs(np.diag([4.0, 9.0, 16.0])).as_tuple() == (2, 0, 0, 3, 0, 4)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=50, deadline=None)
def test_frame_coeffs_reproduce_ginv(seed):
    Ginv = random_spd(np.random.default_rng(seed))
    K = solve_frame_coeffs(Ginv).matrix
    assert np.allclose(K @ K.T, Ginv, atol=1e-10 * np.abs(Ginv).max())
    assert np.all(np.diag(K) > 0)


@pytest.mark.parametrize("Ginv", [
    np.diag([1.0, 1.0, 0.0]),
    np.diag([1.0, -1.0, 1.0]),
    np.array([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
])
def test_frame_coeffs_refuse_indefinite(Ginv):
    with pytest.raises(FactorizationError):
        solve_frame_coeffs(Ginv)


def test_frame_coeffs_refuse_nonsymmetric():
    with pytest.raises(FactorizationError):
        solve_frame_coeffs(np.array([[1.0, 0.5, 0], [0, 1, 0], [0, 0, 1]]))


# ---- assembly -------------------------------------------------------------


def _standard_pieces():
    e8 = lambda *i: e(8, *i)  # noqa: E731
    theta = [e8(1), e8(2), e8(3)]
    sigma = [e8(5, 8) + e8(6, 7), e8(5, 7) - e8(6, 8), -(e8(5, 6) + e8(7, 8))]
    return e8(4), theta, sigma, e8(5, 6, 7, 8)


def test_both_assemblies_give_phi0_on_standard_frame():
    dnu, theta, sigma, vol = _standard_pieces()
    # ω_i carries the extra vertical piece −dy_i ∧ dν
    omega = [s - wedge(t, dnu) for s, t in zip(sigma, theta)]
    assert assemble_phi_reduction(dnu, theta, theta, omega, vol) == S.Phi
    assert assemble_phi_alt(dnu, theta, theta, sigma, vol) == S.Phi


def test_alt_assembly_vertical_part_only():
    dnu, theta, _, _ = _standard_pieces()
    zero2 = ExteriorForm(8, 2)
    out = assemble_phi_alt(dnu, theta, theta, [zero2] * 3, ExteriorForm(8, 4))
    assert out == wedge(dnu, wedge(theta[2], wedge(theta[1], theta[0])))


def test_alt_assembly_checks_horizontality():
    dnu, theta, sigma, vol = _standard_pieces()
    with pytest.raises(ContractViolation):
        assemble_phi_alt(dnu, theta, theta, sigma, vol, vertical=[[0, 0, 0, 0, 1, 0, 0, 0]])


def test_assembly_rejects_wrong_grades():
    dnu, theta, omega, vol = _standard_pieces()
    with pytest.raises(ContractViolation):
        assemble_phi_reduction(dnu, theta, theta, omega, omega[0])


# ---- G2 pairs on the bundle model -----------------------------------------


def test_g2_pair_pattern_with_unit_q():
    g = g2_pair_from_bundle_data(np.eye(3), fibre_coframe(), hk_triple())
    e7 = lambda *i: e(7, *i)  # noqa: E731
    expected = (-e7(1, 2, 3) + wedge(e7(1), e7(4, 5) + e7(6, 7)) + wedge(e7(2), e7(4, 6) - e7(5, 7))
                + wedge(e7(3), e7(4, 7) + e7(5, 6)))
    assert g.phi.allclose(expected.map_coeffs(float), 1e-14)
    assert g.h == 1.0
    assert np.allclose(g.metric.matrix, np.eye(7))


def test_g2_pair_adapted_triple_pattern():
    # the triple with σ_3 = −(e45 + e67) gives the ordering used for Φ0
    e7 = lambda *i: e(7, *i)  # noqa: E731
    sigma = [e7(4, 7) + e7(5, 6), e7(4, 6) - e7(5, 7), -(e7(4, 5) + e7(6, 7))]
    g = g2_pair_from_bundle_data(np.eye(3), fibre_coframe(), sigma)
    expected = (-e7(1, 2, 3) - wedge(e7(3), e7(4, 5) + e7(6, 7)) + wedge(e7(2), e7(4, 6) - e7(5, 7))
                + wedge(e7(1), e7(4, 7) + e7(5, 6)))
    assert g.phi.allclose(expected.map_coeffs(float), 1e-14)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=50, deadline=None)
def test_g2_star_phi_is_psi(seed):
    rng = np.random.default_rng(seed)
    Q = random_spd(rng)
    g = g2_pair_from_bundle_data(Q, connection(rng), triple_for(Q))
    scale = max(1.0, g.psi.max_abs())
    assert (hodge(g.phi, g.metric) - g.psi).max_abs() <= 1e-9 * scale
    assert abs(g.h - np.linalg.det(Q) ** -0.25) <= 1e-12


def test_g2_rejects_wrong_handedness():
    e7 = lambda *i: e(7, *i)  # noqa: E731
    asd = [e7(4, 5) - e7(6, 7), e7(4, 6) + e7(5, 7), e7(4, 7) - e7(5, 6)]
    with pytest.raises(WeakCoherenceError):
        g2_pair_from_bundle_data(np.eye(3), fibre_coframe(), asd, volM=-e7(4, 5, 6, 7))


def test_g2_rejects_mismatched_q():
    with pytest.raises(WeakCoherenceError):
        g2_pair_from_bundle_data(2 * np.eye(3), fibre_coframe(), hk_triple(), volM=e(7, 4, 5, 6, 7))
    with pytest.raises(WeakCoherenceError):
        g2_pair_from_bundle_data(-np.eye(3), fibre_coframe(), hk_triple())


# ---- rescaling ------------------------------------------------------------


@dataclass(frozen=True)
class _State:
    Q: np.ndarray
    Ginv: np.ndarray
    h: float


def test_rescale_example():
    s = rescale_structure(_State(np.eye(3), np.eye(3), 1.0), 4.0)
    assert np.allclose(s.Q, 16 * np.eye(3))
    assert s.h == pytest.approx(1 / 8)
    assert np.allclose(s.Ginv, s.h ** 2 * s.Q)


@given(st.floats(0.1, 10.0), st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_rescale_preserves_ginv_relation(lam, seed):
    Q = random_spd(np.random.default_rng(seed))
    h = np.linalg.det(Q) ** -0.25
    s = rescale_structure(_State(Q, h * h * Q, h), lam)
    assert np.allclose(s.Ginv, s.h ** 2 * s.Q, rtol=1e-10)
    assert s.h == pytest.approx(np.linalg.det(s.Q) ** -0.25, rel=1e-10)


def test_rescale_needs_positive_lambda():
    with pytest.raises(ContractViolation):
        rescale_structure(_State(np.eye(3), np.eye(3), 1.0), 0.0)


# ---- eight-dimensional metric and form ------------------------------------


def test_spin7_metric_identity():
    assert np.array_equal(spin7_metric(np.eye(3), 1.0, np.eye(4)).matrix, np.eye(8))


def test_spin7_metric_cross_terms_symmetric():
    G = np.eye(3)
    G[0, 1] = G[1, 0] = 0.3
    g = spin7_metric(G, 2.0, np.eye(4)).matrix
    assert g[0, 1] == g[1, 0] == 0.3
    assert g[3, 3] == 4.0


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_spin7_metric_is_spd(seed):
    rng = np.random.default_rng(seed)
    g = spin7_metric(random_spd(rng), rng.uniform(0.2, 3.0), random_spd(rng, 4),
                     np.hstack([np.eye(3), rng.normal(size=(3, 4))]))
    assert np.all(np.linalg.eigvalsh(g.matrix) > 0)


def test_spin7_metric_refuses_bad_input():
    with pytest.raises(FactorizationError):
        spin7_metric(np.eye(3), 0.0, np.eye(4))
    with pytest.raises(FactorizationError):
        spin7_metric(-np.eye(3), 1.0, np.eye(4))


def _spin7_pieces(seed):
    rng = np.random.default_rng(seed)
    Q = random_spd(rng)
    theta = connection(rng)
    g2 = g2_pair_from_bundle_data(Q, theta, triple_for(Q))
    C = np.array([[t.coeff(k) for k in range(1, 8)] for t in theta])
    gM = g2.metric.matrix[3:, 3:] - C[:, 3:].T @ np.linalg.inv(g2.h ** 2 * Q) @ C[:, 3:]
    return Q, theta, g2, C, gM


@pytest.mark.parametrize("seed", range(5))
def test_spin7_form_from_g2_pair(seed):
    Q, theta, g2, C, gM = _spin7_pieces(seed)
    g8 = spin7_metric(np.linalg.inv(g2.h ** 2 * Q), g2.h, gM, C)
    assert max(is_spin7_form(spin7_form(g2.h, g2.phi, g2.psi), g8)) <= 1e-9


def test_one_sided_cross_terms_break_spin7():
    # reading θ_iθ_j as appearing once in the quadratic form halves the off-diagonal block
    Q, theta, g2, C, gM = _spin7_pieces(1)
    G = np.linalg.inv(g2.h ** 2 * Q)
    G_half = np.diag(np.diag(G)) + 0.5 * (G - np.diag(np.diag(G)))
    g8 = spin7_metric(G_half, g2.h, gM, C)
    assert max(is_spin7_form(spin7_form(g2.h, g2.phi, g2.psi), g8)) > 1e-3
