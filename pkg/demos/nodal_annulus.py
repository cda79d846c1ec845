"""Sign-changing radial solutions on an annulus.

Solves the k-nodal Dirichlet problem for M+ on 1 < |x| < 2 in R^3 with
p = 3, for k = 1, 2, 3, and prints the nodal radii, fitted slope and
normalised residual of each solution.
"""
import numpy as np

from pucci_radial import Annulus, ProblemSpec, PucciKind, PucciParams, solve_nodal_annulus


def main():
    params = PucciParams(1.0, 2.0, 3)
    for k in (1, 2, 3):
        spec = ProblemSpec(PucciKind.PLUS, params, 3.0, Annulus(1.0, 2.0), nodal_k=k)
        sol = solve_nodal_annulus(spec)
        r = np.linspace(1.0, 2.0, 2001)
        print(f"k={k}  alpha={sol.shot_parameter:.12g}  radii={np.round(sol.radii, 6).tolist()}  "
              f"max|u|={np.max(np.abs(sol.profile.u(r))):.6g}  residual={sol.residual:.2e}")


if __name__ == "__main__":
    main()
