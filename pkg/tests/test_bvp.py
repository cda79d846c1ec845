import math
import warnings

import numpy as np
import pytest

from cases import ANISO, LAPLACE, MINUS, PLUS, annulus_spec, ball, ball_spec, mixed, nodal
from oracles import annulus_shot, hermite_eval, neumann_shot
from pucci_radial import (BISECTION_RTOL, Ball, GeneralRadial, InvalidArgumentError, NoBracketError,
                          NoKthZeroError, ProblemSpec, PucciParams, Sign, SolverControls, bisect_bracket,
                          bracket_search, radial_operator, residual, shoot_annulus, solve_ball,
                          solve_dirichlet_annulus, solve_nodal_annulus)

# u(0) of the Laplacian ball solution on B(1), n = p = 3: first zero of the unit-centre RK4 shot
BALL_CENTRE_ORACLE = 6.896848619259232
SUPER = PucciParams(1.0, 2.0, 5)


def test_bracket_search_and_bisection():
    f = lambda x: 1.0 + 1.0 / x  # decreasing towards 1
    lo, hi = bracket_search(f, 1.5, seed=100.0)
    assert f(hi) < 1.5 <= f(lo)
    lo, hi = bisect_bracket(f, 1.5, lo, hi)
    assert hi - lo <= BISECTION_RTOL * (1 + abs(hi))
    assert lo == pytest.approx(2.0, rel=1e-11)


def test_bracket_search_orders_infinity_above():
    f = lambda x: math.inf if x < 3.0 else 1.0
    lo, hi = bracket_search(f, 2.0, seed=1.0)
    assert f(lo) == math.inf and f(hi) == 1.0


def test_bracket_search_failure():
    with pytest.raises(NoBracketError) as info:
        bracket_search(lambda x: 5.0, 1.0, max_expansions=5)
    assert len(info.value.scanned) == 6
    with pytest.raises(InvalidArgumentError):
        bracket_search(lambda x: 5.0, 1.0, seed=-1.0)


def test_dirichlet_certificates():
    sol = nodal(1)
    assert sol.boundary_defect <= 1e-8 and sol.residual <= 1e-6
    assert sol.radii == (1.0, 2.0) and sol.first_sign == 1
    r = np.linspace(1.0, 2.0, 1001)[1:-1]
    assert np.all(sol.profile.u(r) > 0)


def test_bisection_certificate():
    sol = nodal(1)
    lo, hi = sol.bracket
    assert hi - lo <= BISECTION_RTOL * (1 + abs(sol.shot_parameter))
    spec = annulus_spec()
    ctl = SolverControls(rel_tol=1e-12, abs_tol=1e-14, r_max=3.0, max_zeros=2)
    assert shoot_annulus(spec, 1.0, lo, ctl).rho >= 2.0 > shoot_annulus(spec, 1.0, hi, ctl).rho


def test_k1_nodal_equals_dirichlet():
    sol = solve_dirichlet_annulus(annulus_spec(PLUS, SUPER, 5.0))
    assert sol.shot_parameter == nodal(1, PLUS, SUPER, 5.0).shot_parameter


def test_negative_solution_is_dual_mirror():
    neg = nodal(1, PLUS, SUPER, 5.0, sign=Sign.NEGATIVE)
    pos = nodal(1, MINUS, SUPER, 5.0)
    assert neg.first_sign == -1 and neg.shot_parameter == -pos.shot_parameter
    r = np.linspace(1.0, 2.0, 501)
    assert np.array_equal(neg.profile.u(r), -pos.profile.u(r))
    assert neg.residual <= 1e-6


def test_nodal_k3_pattern():
    sol = nodal(3)
    a, r1, r2, b = sol.radii
    assert a < r1 < r2 < b and (a, b) == (1.0, 2.0)
    mids = [0.5 * (a + r1), 0.5 * (r1 + r2), 0.5 * (r2 + b)]
    assert list(np.sign(sol.profile.u(np.array(mids)))) == [1, -1, 1]
    assert sol.residual <= 1e-6 and sol.boundary_defect <= 1e-8


def test_fitted_slope_grows_with_k():
    alphas = [nodal(k).shot_parameter for k in (1, 2, 3, 4)]
    assert all(x < y for x, y in zip(alphas, alphas[1:]))


def test_nodal_validation():
    with pytest.raises(InvalidArgumentError):
        solve_nodal_annulus(annulus_spec(), k=0)
    with pytest.raises(InvalidArgumentError):
        solve_nodal_annulus(ball_spec())


def test_mixed_dn():
    sol = mixed("dn")
    assert abs(sol.profile.du(2.0)) <= 1e-8 and sol.profile.u(2.0) > 0
    assert sol.profile.u(1.0) == 0.0 and sol.residual <= 1e-6


def test_mixed_dn_trend_in_b():
    assert mixed("dn", b=2.5).shot_parameter < mixed("dn").shot_parameter


def test_mixed_nd():
    sol = mixed("nd")
    assert sol.profile.du(1.0) == 0.0 and abs(sol.profile.u(2.0)) <= 1e-8
    r = np.linspace(1.0, 2.0, 2001)
    assert np.all(sol.profile.du(r) <= 1e-12)
    assert sol.residual <= 1e-6


def test_mixed_laplacian_against_oracle():
    h = 1e-5
    dn = mixed("dn", PLUS, LAPLACE)
    _, _, _, _, crit = annulus_shot(3, 3.0, 1.0, dn.shot_parameter, h=h)
    assert crit[0] == pytest.approx(2.0, rel=1e-6)
    nd = mixed("nd", PLUS, LAPLACE)
    rs, us, dus, zeros, _ = neumann_shot(3, 3.0, 1.0, nd.shot_parameter, h=h)
    assert zeros[0] == pytest.approx(2.0, rel=1e-6)
    r = np.linspace(1.0, 2.0, 201)
    ref = np.array([hermite_eval(rs, us, dus, h, x) for x in r])
    assert np.max(np.abs(nd.profile.u(r) - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_ball_laplacian_centre_value():
    sol = ball(1, PLUS, LAPLACE, 3.0)
    assert sol.profile.u(0.0) == pytest.approx(BALL_CENTRE_ORACLE, rel=1e-6)


def test_ball_k2():
    sol = ball(2)
    assert sol.profile.u(0.0) > 0 and len(sol.radii) == 3
    assert abs(sol.profile.u(1.0)) <= 1e-8 and sol.residual <= 1e-6
    assert not sol.warnings


def test_ball_duality():
    minus_pos = solve_ball(ball_spec(MINUS, k=2))
    plus_neg = solve_ball(ball_spec(PLUS, sign=Sign.NEGATIVE, k=2))
    r = np.linspace(0.0, 1.0, 401)
    assert np.allclose(minus_pos.profile.u(r), -plus_neg.profile.u(r), rtol=0,
                       atol=1e-12 * np.max(np.abs(minus_pos.profile.u(r))))


def test_ball_rescale_residual():
    sol = ball(2)
    moved = sol.profile.scaled(0.5, sol.spec.p)
    again = residual(moved, sol.spec).details["normalised_residual"]
    assert again <= sol.residual + 1e-10


def test_ball_unsupported_regime():
    spec = ProblemSpec(MINUS, ANISO, 7.0, Ball(1.0))
    with pytest.warns(RuntimeWarning, match="unsupported-regime"):
        with pytest.raises(NoKthZeroError):
            solve_ball(spec, SolverControls(r_max=30.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve_ball(ProblemSpec(PLUS, ANISO, 7.0, Ball(1.0)), SolverControls(r_max=30.0))
    assert sol.warnings and sol.warnings[0].startswith("unsupported-regime")


def test_ball_rejects_general_operator():
    op = GeneralRadial(lambda r, m, l: radial_operator(PLUS, ANISO, r, m, l))
    with pytest.raises(InvalidArgumentError):
        solve_ball(ProblemSpec(op, ANISO, 1.5, Ball(1.0)))
