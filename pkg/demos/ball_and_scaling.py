"""Ball solutions and the Lane-Emden scaling law.

Solves the positive M- problem in the unit ball of R^3 with p = 1.5,
then moves it to the ball of radius 2 with v(r) = q^(2/(p-1)) u(qr) and
checks that the moved profile is still a solution.
"""
from pucci_radial import Ball, ProblemSpec, PucciKind, PucciParams, exponents, rescale, residual, solve_ball


def main():
    params = PucciParams(1.0, 2.0, 3)
    print("critical exponents:", exponents(params).as_dict())
    spec = ProblemSpec(PucciKind.MINUS, params, 1.5, Ball(1.0))
    sol = solve_ball(spec)
    print(f"u(0) = {sol.profile.u(0.0):.12g}, residual = {sol.residual:.2e}")
    moved = rescale(sol.profile, 2.0, spec.p)
    rep = residual(moved, ProblemSpec(spec.kind, params, spec.p, Ball(2.0)))
    print(f"radius 2: u(0) = {moved.u(0.0):.12g}, residual = {rep.details['normalised_residual']:.2e}")


if __name__ == "__main__":
    main()
