from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spin7torus.errors import ContractViolation, SingularGramError
from spin7torus.exterior import Metric, exterior_derivative_fd, pullback, volume_form, wedge
from spin7torus.flat import (
    C4Point,
    XiCoords,
    collapse_classify,
    curvature_formula,
    curvature_point_residuals,
    flat_frame,
    flat_suite,
    generators_flat,
    gram_formula,
    nu_flat,
    orbit_rank,
    phi_flat,
    q_nonconstant,
    sample_points,
    sigma_formula,
    sigma_point_residuals,
    verify_mm_flat,
    xi_coords,
)
from spin7torus.reduction import gram, mm_oneform

F = Fraction


def _exact(z):
    xs = []
    for c in z:
        c = complex(c)
        xs += [F(int(c.real)), F(int(c.imag))]
    return C4Point(tuple(xs))


gaussian = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
gaussian4 = st.lists(gaussian, min_size=4, max_size=4)


# ---- ν and the generators -------------------------------------------------


@pytest.mark.parametrize("z, nu", [
    ((1, 1, 1, 1), 0),
    ((1, 1, 1, 1j), F(1, 8)),
    ((2, 1, 1, 1j), F(1, 4)),
])
def test_nu_examples(z, nu):
    assert nu_flat(_exact(z)) == nu
    assert nu_flat(list(map(complex, z))) == pytest.approx(float(nu))


def test_generator_at_first_axis():
    U = generators_flat(_exact((1, 0, 0, 0)))
    assert list(U[0]) == [0, F(1, 2), 0, 0, 0, 0, 0, 0]
    assert not any(U[1]) and not any(U[2])


def test_gram_at_unit_point():
    G = gram(flat_frame(_exact((1, 1, 1, 1))))[0]
    assert np.array_equal(G, (np.eye(3) + np.ones((3, 3))) / 4)


@given(gaussian4)
@settings(max_examples=60, deadline=None)
def test_gram_formula_exact(zs):
    p = C4Point(tuple(F(c) for pair in zs for c in pair))
    fr = flat_frame(p)
    G = fr.matrix.T @ fr.matrix
    assert np.array_equal(G, gram_formula(p))


def test_collapse_locus_has_singular_gram():
    with pytest.raises(SingularGramError):
        gram(flat_frame(_exact((0, 0, 0, 2))))


def test_off_diagonal_gram_entries_equal():
    G = gram_formula(_exact((1, 2, 1j, 3)))
    assert G[0, 1] == G[0, 2] == G[1, 2] == F(9, 4)


# ---- the four-form --------------------------------------------------------


def test_phi_flat_identities():
    Phi = phi_flat()
    assert Phi.coeff(1, 2, 3, 4) == 1
    assert wedge(Phi, Phi) == volume_form(Metric.euclidean(8)) * 14
    assert exterior_derivative_fd(lambda p: Phi.map_coeffs(float), np.ones(8)).max_abs() == 0


# ---- multi-moment map -----------------------------------------------------


def test_mm_flat_examples():
    rep = verify_mm_flat([_exact((1, 1, 1, 1)), _exact((2, 1, 1, 1j)), _exact((1, 0, 0, 0))])
    assert rep.passed
    assert rep.checks[0].detail["points"] == 2
    assert len(rep.extra["skipped"]) == 1


def test_mm_flat_random():
    rep = verify_mm_flat(sample_points(np.random.default_rng(3), 10))
    assert rep.passed


def test_mm_form_is_closed():
    # d(U3⌟U2⌟U1⌟Φ) = 0 since Φ is closed and the U_i preserve it
    q = np.array(list(sample_points(np.random.default_rng(4), 1)[0].x))
    d = exterior_derivative_fd(lambda y: mm_oneform(flat_frame(C4Point(tuple(y)))), q)
    assert d.max_abs() <= 1e-7


# ---- Ξ coordinates --------------------------------------------------------


@pytest.mark.parametrize("z, expected", [
    ((1, 1, 1, 1), (0, 0, 0, 1, 0)),
    ((1, 1, 1, 1j), (0, 0, 0, 0, F(1, 8))),
    ((2, 1, 1, 1), (F(3, 2), 0, 0, 2, 0)),
])
def test_xi_examples(z, expected):
    xi = xi_coords(_exact(z))
    assert (xi.v1, xi.v2, xi.v3, xi.w, xi.t) == expected


@given(st.lists(st.floats(-2, 2), min_size=8, max_size=8))
@settings(max_examples=60, deadline=None)
def test_product_is_w_plus_8it(x):
    p = C4Point(tuple(x))
    xi = xi_coords(p)
    prod = np.prod(p.z)
    assert abs(prod - complex(xi.w, 8 * xi.t)) <= 1e-12 * max(1.0, abs(prod))


# ---- collapse strata ------------------------------------------------------


STRATA = [
    ((0, 0, 0), "point"),
    ((-1, -1, -1), "circle"),
    ((0, 0, 5), "circle"),
    ((0, 4, 0), "circle"),
    ((3, 0, 0), "circle"),
    ((-1, -1, 2), "two-torus"),
    ((-2, 1, -2), "two-torus"),
    ((0, 2, 3), "two-torus"),
    ((1, -3, -3), "two-torus"),
    ((2, 0, 3), "two-torus"),
    ((2, 3, 0), "two-torus"),
    ((1, 2, 3), "free"),
]


@pytest.mark.parametrize("v, stratum", STRATA)
def test_collapse_strata(v, stratum):
    assert collapse_classify(XiCoords(*v, 0, 0)) == stratum


def test_collapse_precedence():
    # (0, 0, 0) also meets circle and two-torus constraints; (0, 0, 5) also meets a two-torus one
    assert collapse_classify(XiCoords(0, 0, 0, 0, 0)) == "point"
    assert collapse_classify(XiCoords(0, 0, 5, 0, 0)) == "circle"


def test_collapse_needs_zero_level():
    with pytest.raises(ContractViolation):
        collapse_classify(XiCoords(0, 0, 0, 1.0, 0))
    with pytest.raises(ContractViolation):
        collapse_classify(XiCoords(0, 0, 0, 0, 0.5))


@given(gaussian4, st.sets(st.integers(0, 3), min_size=1))
@settings(max_examples=200, deadline=None)
def test_refined_strata_match_orbit_rank(zs, zero):
    z = [0 if i in zero else complex(*zs[i]) for i in range(4)]
    p = _exact(z)
    rank = {"point": 0, "circle": 1, "two-torus": 2, "free": 3}
    assert rank[collapse_classify(xi_coords(p), refined=True)] == orbit_rank(p)
    literal = collapse_classify(xi_coords(p))
    assert rank[literal] == orbit_rank(p) or (literal == "two-torus" and orbit_rank(p) == 3)


def test_literal_constraint_overreports_two_torus():
    # z1 = 0 with |z2| = |z3|: free orbit, yet v2 = v3 <= 0
    p = _exact((0, 2 - 1j, -1 + 2j, 2 - 2j))
    assert orbit_rank(p) == 3
    assert collapse_classify(xi_coords(p)) == "two-torus"
    assert collapse_classify(xi_coords(p), refined=True) == "free"


# ---- σ and F coordinate formulas ------------------------------------------


def test_sigma_formula_near_unit_point():
    p = C4Point.from_complex([1.05, 0.97 + 0.1j, 1.02 - 0.05j, 0.03 + 1.01j])
    res = sigma_point_residuals(p)
    assert res["sigma"] <= 1e-6
    assert res["Ginv"] <= 1e-9


def test_formulas_refuse_zero_level():
    p = _exact((1, 1, 1, 1))
    with pytest.raises(ContractViolation):
        sigma_formula(p)
    with pytest.raises(ContractViolation):
        curvature_formula(p)


@pytest.mark.parametrize("seed", range(3))
def test_curvature_formula_matches_dtheta(seed):
    p = sample_points(np.random.default_rng(seed), 1)[0]
    res = curvature_point_residuals(p)
    assert res["F"] <= 1e-6
    assert res["eta_w"] <= 1e-6
    assert res["asd"] > 1e-8
    assert res["QA"] <= 1e-8


def test_conjugation_flips_curvature_sign():
    # z -> conj(z) fixes v, w and G and sends t to -t; the 2t prefactor flips F
    p = sample_points(np.random.default_rng(7), 1)[0]
    R = np.diag([1.0, -1.0] * 4)
    q = C4Point(tuple(float(c) for c in R @ np.array(p.x, float)))
    assert nu_flat(q) == pytest.approx(-nu_flat(p))
    for a, b in zip(curvature_formula(q), curvature_formula(p)):
        assert (pullback(a, R) + b).max_abs() <= 1e-6 * max(1.0, b.max_abs())


def test_q_not_constant():
    pts = sample_points(np.random.default_rng(0), 5)
    assert q_nonconstant(pts) > 1e-6


def test_flat_suite_passes():
    rep = flat_suite(n_points=8, seed=2)
    assert rep.passed, [c.id for c in rep.checks if c.status != "pass"]
