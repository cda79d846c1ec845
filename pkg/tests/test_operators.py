import math
import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pucci_radial import (INF, DomainError, EllipticityViolationError, GeneralRadial, InvalidArgumentError,
                          PucciKind, PucciParams, check_uniform_ellipticity, dual_operator, exponents,
                          normal_form, normal_form_function, pucci_apply, radial_hessian_eigenvalues,
                          radial_operator)

PLUS, MINUS = PucciKind.PLUS, PucciKind.MINUS
P12 = PucciParams(1.0, 2.0, 3)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
ellipticity = st.tuples(st.floats(0.05, 5.0), st.floats(1.0, 8.0)).map(lambda t: (t[0], t[0] * t[1]))


def test_params_validation():
    with pytest.raises(InvalidArgumentError):
        PucciParams(2.0, 1.0, 3)
    with pytest.raises(InvalidArgumentError):
        PucciParams(0.0, 1.0, 3)
    with pytest.raises(InvalidArgumentError):
        PucciParams(1.0, 1.0, 0)
    assert PucciParams(1.0, 1.0, 1).n == 1


@pytest.mark.parametrize("kind, mu, expected", [
    (PLUS, [1, -1], 1.0),
    (MINUS, [1, -1], -1.0),
])
def test_pucci_apply_examples(kind, mu, expected):
    assert pucci_apply(kind, P12, mu) == expected


@pytest.mark.parametrize("kind", [PLUS, MINUS])
def test_pucci_apply_laplacian_is_trace(kind):
    assert pucci_apply(kind, PucciParams(1.0, 1.0, 3), [3, -2, 1]) == 2.0


def test_pucci_apply_rejects_general_and_bad_input():
    with pytest.raises(InvalidArgumentError):
        pucci_apply(GeneralRadial(lambda r, m, l: m), P12, [1.0])
    with pytest.raises(InvalidArgumentError):
        pucci_apply(PLUS, P12, [])
    with pytest.raises(InvalidArgumentError):
        pucci_apply(PLUS, P12, [math.nan])


def test_radial_hessian_eigenvalues_examples():
    assert radial_hessian_eigenvalues(2.0, 4.0, -1.0, 3) == (-1.0, 2.0, 2)
    assert radial_hessian_eigenvalues(1.0, 0.0, 5.0, 2) == (5.0, 0.0, 1)
    assert radial_hessian_eigenvalues(0.3, 7.0, 1.0, 1)[2] == 0
    with pytest.raises(DomainError):
        radial_hessian_eigenvalues(0.0, 1.0, 1.0, 3)


@pytest.mark.parametrize("kind, r, u, du, expected", [
    (PLUS, 1.0, 1.0, 0.0, -1.0),
    (PLUS, 2.0, 0.0, 1.0, -2.0),
    (MINUS, 1.0, 1.0, 0.0, -0.5),
])
def test_normal_form_examples(kind, r, u, du, expected):
    assert normal_form(kind, P12, r, u, du, 3.0) == pytest.approx(expected, abs=1e-15)


def test_normal_form_rejects_bad_radius_and_exponent():
    with pytest.raises(DomainError):
        normal_form(PLUS, P12, 0.0, 1.0, 0.0, 3.0)
    with pytest.raises(InvalidArgumentError):
        normal_form(PLUS, P12, 1.0, 1.0, 0.0, 1.0)


@settings(max_examples=300, deadline=None)
@given(kind=st.sampled_from([PLUS, MINUS]), le=ellipticity, n=st.integers(1, 8),
       mu=st.lists(finite, min_size=1, max_size=8))
def test_duality_and_ordering(kind, le, n, mu):
    params = PucciParams(le[0], le[1], n)
    plus, minus = pucci_apply(PLUS, params, mu), pucci_apply(MINUS, params, mu)
    scale = 1e-12 * (1.0 + params.Lam * sum(abs(x) for x in mu))
    assert minus <= plus + scale
    assert pucci_apply(PLUS, params, [-x for x in mu]) == pytest.approx(-minus, abs=scale)
    if le[0] < le[1] and any(x != 0 for x in mu):
        assert minus < plus


@settings(max_examples=300, deadline=None)
@given(kind=st.sampled_from([PLUS, MINUS]), le=ellipticity, n=st.integers(1, 8), r=st.floats(1e-3, 50.0),
       u=finite, du=finite, p=st.floats(1.01, 9.0))
def test_normal_form_solves_the_equation(kind, le, n, r, u, du, p):
    params = PucciParams(le[0], le[1], n)
    m = normal_form(kind, params, r, u, du, p)
    lhs = pucci_apply(kind, params, [m] + [du / r] * (n - 1))
    src = abs(u) ** (p - 1) * u
    scale = 1.0 + abs(u) ** p + params.Lam * (n - 1) * abs(du / r)
    assert abs(lhs + src) <= 1e-12 * scale
    assert abs(radial_operator(kind, params, r, m, du / r) + src) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(kind=st.sampled_from([PLUS, MINUS]), le=ellipticity, n=st.integers(1, 6), r=st.floats(0.01, 10.0),
       du=finite, t=st.floats(-100.0, 100.0), dt=st.floats(1e-3, 10.0))
def test_normal_form_slope_in_target(kind, le, n, r, du, t, dt):
    params = PucciParams(le[0], le[1], n)
    g = normal_form_function(kind, params, 2.0)
    # with p = 2 the target -|u| u runs over all reals
    u_of = lambda target: -math.copysign(math.sqrt(abs(target)), target)
    m0, m1 = g(r, u_of(t), du), g(r, u_of(t + dt), du)
    slope = (m1 - m0) / dt
    tol = 1e-9 * (1.0 + abs(m0) + abs(m1)) / dt
    assert 1.0 / params.Lam - tol <= slope <= 1.0 / params.lam + tol


def test_dual_operator():
    assert dual_operator(PLUS) is MINUS
    assert dual_operator(MINUS) is PLUS
    op = GeneralRadial(lambda r, m, l: radial_operator(PLUS, P12, r, m, l), "plus")
    dual = dual_operator(op)
    assert dual_operator(dual) is op
    assert dual(1.0, 0.7, -0.3) == pytest.approx(radial_operator(MINUS, P12, 1.0, 0.7, -0.3))
    with pytest.raises(InvalidArgumentError):
        dual_operator("laplace")


def test_general_radial_matches_closed_form():
    op = GeneralRadial(lambda r, m, l: radial_operator(MINUS, P12, r, m, l), "minus")
    rng = np.random.default_rng(3)
    for _ in range(200):
        r, u, du = rng.uniform(0.1, 5.0), rng.normal() * 3, rng.normal() * 3
        a = normal_form(op, P12, r, u, du, 3.0)
        b = normal_form(MINUS, P12, r, u, du, 3.0)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-11)


def test_general_radial_monotonicity_violation():
    bad = GeneralRadial(lambda r, m, l: -m, "decreasing")
    with pytest.raises(EllipticityViolationError):
        normal_form(bad, P12, 1.0, 1.0, 0.0, 3.0)
    with pytest.raises(EllipticityViolationError):
        check_uniform_ellipticity(bad, P12)


def test_uniform_ellipticity_holds_for_pucci():
    for kind in (PLUS, MINUS):
        assert check_uniform_ellipticity(kind, P12, samples=300)


@pytest.mark.parametrize("params, expected", [
    (PucciParams(1.0, 2.0, 3), (2.0, 5.0, INF, 5.0 / 3.0)),
    (PucciParams(1.5, 1.5, 4), (4.0, 4.0, 2.0, 2.0)),
    (PucciParams(1.0, 2.0, 5), (3.0, 9.0, 3.0, 9.0 / 7.0)),
])
def test_exponent_examples(params, expected):
    ex = exponents(params)
    assert ex.n_tilde_plus == pytest.approx(expected[0])
    assert ex.n_tilde_minus == pytest.approx(expected[1])
    for got, want in ((ex.p_plus, expected[2]), (ex.p_minus, expected[3])):
        if want is INF:
            assert got is INF
        else:
            assert got == pytest.approx(want, rel=1e-15)


@settings(max_examples=300, deadline=None)
@given(le=ellipticity, n=st.integers(1, 12))
def test_exponent_ordering(le, n):
    ex = exponents(PucciParams(le[0], le[1], n))
    assert ex.n_tilde_plus <= n + 1e-12 and n <= ex.n_tilde_minus + 1e-12
    assert ex.n_tilde_plus >= 1
    if ex.p_plus is not INF and ex.p_minus is not INF:
        assert ex.p_minus <= ex.p_plus
    assert (ex.p_plus is INF) == (ex.n_tilde_plus <= 2)


def test_infinity_marker():
    assert float(INF) == math.inf and str(INF) == "inf"
    with pytest.raises(TypeError):
        INF < 3
    assert pickle.loads(pickle.dumps(INF)) is INF
    assert exponents(P12).as_dict()["p_plus"] == "inf"
    assert exponents(P12).at_most(100.0, "plus")
    assert not exponents(P12).at_most(2.0, "minus")


def test_radial_operator_vectorised():
    m = np.linspace(-2, 2, 7)
    l = np.linspace(1, -1, 7)
    vec = radial_operator(PLUS, P12, 1.0, m, l)
    assert vec.shape == (7,)
    for i in range(7):
        assert vec[i] == pucci_apply(PLUS, P12, [m[i], l[i], l[i]])
