import numpy as np
import pytest
from hypothesis import given, settings

from spin7torus.errors import CosymplecticViolation
from spin7torus.exterior import ExteriorForm, exterior_derivative_fd, wedge
from spin7torus.flow import FlowConfig, closed_form, integrate
from spin7torus.hyperkahler import (
    HKBundle,
    flow_equation_residuals,
    hk_end_to_end,
    homotopy_potential,
    standard_hk_triple,
    triple_at,
)

from strategies import symmetric_matrices

BASE = standard_hk_triple()
A123 = np.diag([1.0, 2.0, 3.0]) / 10


def test_triple_is_orthonormal_exactly():
    s = BASE.triple
    for i in range(3):
        for j in range(3):
            assert wedge(s[i], s[j]) == BASE.vol0 * (2 if i == j else 0)


def test_homotopy_potential_of_constant_form():
    f = ExteriorForm.blade(4, 1, 2, c=1.0)
    a = homotopy_potential(lambda x: f)
    p = np.array([0.3, -1.2, 0.5, 2.0])
    # K(dx1∧dx2) = (x1 dx2 − x2 dx1) / 2
    assert a(p).allclose(ExteriorForm(4, 1, {(1,): -p[1] / 2, (2,): p[0] / 2}), 1e-14)


@given(symmetric_matrices())
@settings(max_examples=10, deadline=None)
def test_potentials_realize_curvature(A):
    pots = BASE.potentials(A)
    F = BASE.curvature(A)
    x = np.array([0.4, -0.3, 1.1, 0.2])
    for j in range(3):
        assert (exterior_derivative_fd(pots[j], x) - F[j]).max_abs() <= 1e-6


def test_triple_at_is_closed_form_q():
    for t in (0.0, 1.0, 2.5):
        s = closed_form(A123, t)
        assert np.allclose(triple_at(BASE, s.B, s.V), s.Q, atol=1e-13)


@pytest.mark.parametrize("t", [0.0, 0.8, 2.0])
def test_flow_equation_residuals_vanish(t):
    A = np.array([[0.1, 0.05, 0.0], [0.05, -0.2, 0.1], [0.0, 0.1, 0.15]])
    res = flow_equation_residuals(closed_form(A, t), A)
    assert max(res.values()) <= 1e-12


def test_flow_equation_residuals_on_integrated_states():
    traj = integrate(A123, FlowConfig(t_max=1.0))
    for i in (0, len(traj) // 2, len(traj) - 1):
        assert max(flow_equation_residuals(traj[i], A123).values()) <= 1e-10


def test_bundle_at_zero_is_flat_g2():
    b = HKBundle(np.zeros((3, 3)))
    s = closed_form(np.zeros((3, 3)), 0.0)
    g = b.g2(np.zeros(7), s.B, s.Q, s.V)
    assert g.h == 1.0
    assert np.allclose(g.metric.matrix, np.eye(7))


def test_psi_closed_along_closed_form():
    b = HKBundle(A123)
    s = closed_form(A123, 1.5)
    p = np.array([0.2, -0.1, 0.4, 0.5, -0.7, 0.3, 0.9])
    d = exterior_derivative_fd(lambda q: b.g2(q, s.B, s.Q, s.V).psi, p, 1e-5)
    assert d.max_abs() <= 1e-6


def test_phi8_closed():
    b = HKBundle(A123)
    q = np.array([0.2, -0.1, 0.4, 1.2, 0.5, -0.7, 0.3, 0.9])
    assert exterior_derivative_fd(b.Phi8, q, 1e-5).max_abs() <= 1e-6


@pytest.mark.parametrize("A, cls", [
    (np.zeros((3, 3)), "complete"),
    (A123, "half-complete"),
    (np.diag([1.0, -1.0, 0.0]) / 10, "neither"),
])
def test_end_to_end(A, cls):
    rep = hk_end_to_end(A, n_points=6, seed=1)
    failed = [c.id for c in rep.checks if c.status != "pass"]
    assert not failed
    assert rep.extra["completeness"] == cls


def test_end_to_end_refuses_nonsymmetric():
    A = A123.copy()
    A[0, 1] = 0.05
    with pytest.raises(CosymplecticViolation):
        hk_end_to_end(A)
