"""Radial solutions of ``-F(D^2 u) = |u|^(p-1) u`` for Pucci extremal operators.

Positive, negative and sign-changing radial solutions in annuli and balls are
computed by shooting on an adaptive Runge-Kutta integrator and certified by
energy, bound and residual checks.
"""

__version__ = "0.1.0"

from .bvp import (BISECTION_RTOL, BVP_CONTROLS, MixedSolution, NodalSolution, bisect_bracket, bracket_search, rescale,
                  solve_ball, solve_dirichlet_annulus, solve_mixed_dn, solve_mixed_nd, solve_nodal_annulus)
from .diagnostics import (CheckReport, c_p_quadrature, check_convex_increasing_exclusion,
                          check_energy_monotonicity, check_hopf_bound, check_nodal_count, check_tau_bounds,
                          residual)
from .exceptions import (DomainError, EllipticityViolationError, EventBracketError, IntegrationError,
                         InvalidArgumentError, NoBracketError, NoKthZeroError, NoRootInComponentError,
                         PucciRadialError, ResourceError)
from .io import read_profile_csv, write_profile_csv
from .ode import Event, EventHit, SolverControls, Status, Trajectory, integrate, locate_event
from .operators import (INF, ExponentSet, GeneralRadial, PucciKind, PucciParams, check_uniform_ellipticity,
                        dual_operator, exponents, normal_form, normal_form_function, pucci_apply,
                        radial_hessian_eigenvalues, radial_operator)
from .problem import Annulus, Ball, ProblemSpec, Sign
from .profile import RadialProfile
from .shooting import (Classification, EnergyTrace, ShotResult, SubcriticalityWarning, center_curvature,
                       energy_trace, shoot_annulus, shoot_ball, shoot_neumann)
