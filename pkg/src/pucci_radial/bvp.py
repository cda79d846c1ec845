"""Boundary-value solvers built on the shooting maps.

Annulus problems fit the initial slope ``alpha`` so that a radius produced by
the shot (the k-th zero, or the first critical point for the mixed
Dirichlet-Neumann problem) lands on ``b``. The bracket is grown from the
large-parameter side, where those radii tend to ``a``, so bisection stays on
the unbounded component of the set of finite shots. Ball problems need no
fitting: a single shot from the centre is rescaled so that its k-th zero
lands on ``R``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

from .diagnostics import CheckReport, residual
from .exceptions import (InvalidArgumentError, NoBracketError, NoKthZeroError,
                         NoRootInComponentError)
from .ode import SolverControls
from .operators import GeneralRadial, PucciKind, dual_operator
from .problem import Annulus, Ball, ProblemSpec, Sign
from .profile import RadialProfile
from .shooting import ShotResult, shoot_annulus, shoot_ball, shoot_neumann

__all__ = [
    "NodalSolution",
    "MixedSolution",
    "bracket_search",
    "bisect_bracket",
    "solve_dirichlet_annulus",
    "solve_nodal_annulus",
    "solve_mixed_dn",
    "solve_mixed_nd",
    "solve_ball",
    "rescale",
]

BISECTION_RTOL = 1e-12

# alpha -> rho(alpha) is only as smooth as the integration error; at the
# shooting default (rel_tol 1e-10) that noise alone leaves |u(b)| ~ 1e-9 * |u'(b)|
BVP_CONTROLS = SolverControls(rel_tol=1e-12, abs_tol=1e-14)


@dataclass(frozen=True)
class NodalSolution:
    """Radial solution with ``k`` nodal regions separated at ``radii``."""

    spec: ProblemSpec
    k: int
    radii: Tuple[float, ...]
    first_sign: int
    shot_parameter: float
    profile: RadialProfile
    residual: float
    boundary_defect: float
    shot: ShotResult
    residual_report: CheckReport
    bracket: Optional[Tuple[float, float]] = None
    rescale_factor: Optional[float] = None
    warnings: Tuple[str, ...] = ()

    @property
    def critical_points(self):
        return tuple(c / (self.rescale_factor or 1.0) for c in self.shot.critical_points
                     if c / (self.rescale_factor or 1.0) < self.radii[-1])


@dataclass(frozen=True)
class MixedSolution:
    """Solution of a mixed Dirichlet/Neumann annulus problem."""

    spec: ProblemSpec
    boundary: str
    shot_parameter: float
    profile: RadialProfile
    dirichlet_defect: float
    neumann_defect: float
    residual: float
    shot: ShotResult
    residual_report: CheckReport
    bracket: Optional[Tuple[float, float]] = None


def bracket_search(shot_map: Callable[[float], float], target: float, seed: float = 1.0,
                   factor: float = 4.0, max_expansions: int = 80) -> Tuple[float, float]:
    """Find ``lo < hi`` with ``shot_map(hi) < target <= shot_map(lo)``.

    ``shot_map`` is assumed to tend to a value below ``target`` as the
    parameter grows; ``inf`` (no crossing before the horizon) ranks above
    every target. The scan multiplies by ``factor`` from ``seed`` upward until
    it drops below the target, or divides downward until it rises above.
    """
    if not seed > 0:
        raise InvalidArgumentError("seed must be positive")
    scanned = []

    def above(x):
        v = shot_map(x)
        scanned.append((x, v))
        return not v < target

    x = float(seed)
    if above(x):
        for _ in range(max_expansions):
            lo, x = x, x * factor
            if not math.isfinite(x):
                break
            if not above(x):
                return lo, x
    else:
        for _ in range(max_expansions):
            hi, x = x, x / factor
            if x == 0.0:
                break
            if above(x):
                return x, hi
    rng = (min(s for s, _ in scanned), max(s for s, _ in scanned))
    raise NoBracketError(f"no bracket for target {target} over parameters {rng[0]:.3g}..{rng[1]:.3g}",
                         scanned=scanned)


def bisect_bracket(shot_map, target, lo, hi, rtol=BISECTION_RTOL, max_iter=200):
    """Shrink ``[lo, hi]`` keeping ``shot_map(hi) < target <= shot_map(lo)``."""
    for _ in range(max_iter):
        if hi - lo <= rtol * (1.0 + abs(0.5 * (lo + hi))):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if shot_map(mid) < target:
            hi = mid
        else:
            lo = mid
    return lo, hi


class _ShotCache:
    """Memoised shots so bracketing, bisection and the final profile agree."""

    def __init__(self, shoot: Callable[[float], ShotResult], radius: Callable[[ShotResult], float]):
        self.shoot, self.radius = shoot, radius
        self.shots = {}

    def __call__(self, x):
        if x not in self.shots:
            self.shots[x] = self.shoot(x)
        return self.radius(self.shots[x])


def _fit(cache: _ShotCache, target: float, inner: float, seed: float):
    lo, hi = bracket_search(cache, target, seed)
    lo, hi = bisect_bracket(cache, target, lo, hi)
    candidates = [x for x in (lo, hi) if math.isfinite(cache(x))]
    best = min(candidates, key=lambda x: abs(cache(x) - target))
    miss = abs(cache(best) - target)
    if miss > 1e-6 * (target - inner):
        raise NoRootInComponentError(
            f"bisection stagnated at parameter {best!r}: radius {cache(best)!r} vs target {target!r}"
        )
    return best, (lo, hi), cache.shots[best]


def _annulus(spec):
    if not isinstance(spec.domain, Annulus):
        raise InvalidArgumentError("annulus solver needs an Annulus domain")
    return spec.domain.a, spec.domain.b


def _shot_controls(controls, a, b, zeros):
    return controls.with_(r_max=b + (b - a), max_zeros=zeros)


def _positive_problem(spec):
    """Operator whose positive solutions give the requested sign (and the flip)."""
    if spec.sign is Sign.POSITIVE:
        return spec, 1.0
    from dataclasses import replace
    return replace(spec, kind=dual_operator(spec.kind), sign=Sign.POSITIVE), -1.0


def solve_nodal_annulus(spec: ProblemSpec, controls: SolverControls = BVP_CONTROLS,
                        k: Optional[int] = None, seed: float = 1.0) -> NodalSolution:
    """Radial solution on ``A(a, b)`` with ``k`` nodal regions.

    Negative first sign is obtained from the dual operator ``-F(-M)`` and a
    final negation.
    """
    a, b = _annulus(spec)
    k = spec.nodal_k if k is None else int(k)
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")
    work, flip = _positive_problem(spec)
    ctl = _shot_controls(controls, a, b, k + 1)

    cache = _ShotCache(lambda alpha: shoot_annulus(work, a, alpha, ctl), lambda s: s.kth_zero(k))
    alpha, bracket, shot = _fit(cache, b, a, seed)

    profile = shot.profile.restricted(a, b)
    if flip < 0:
        profile = profile.negated()
    radii = (a,) + tuple(shot.zeros[: k - 1]) + (b,)
    defect = abs(profile.u(b))
    report = residual(profile, spec, controls)
    return NodalSolution(spec, k, radii, int(flip), flip * alpha, profile, report.details["normalised_residual"],
                         defect, shot, report, bracket)


def solve_dirichlet_annulus(spec: ProblemSpec, controls: SolverControls = BVP_CONTROLS,
                            seed: float = 1.0) -> NodalSolution:
    """Positive (or negative) radial solution vanishing on both spheres."""
    return solve_nodal_annulus(spec, controls, k=1, seed=seed)


def solve_mixed_dn(spec: ProblemSpec, controls: SolverControls = BVP_CONTROLS,
                   seed: float = 1.0) -> MixedSolution:
    """``u(a) = 0`` and ``u'(b) = 0``: fit the first critical radius to ``b``."""
    a, b = _annulus(spec)
    work, flip = _positive_problem(spec)
    ctl = _shot_controls(controls, a, b, 1)

    def tau(shot):
        return shot.critical_points[0] if shot.critical_points else math.inf

    cache = _ShotCache(lambda alpha: shoot_annulus(work, a, alpha, ctl), tau)
    alpha, bracket, shot = _fit(cache, b, a, seed)
    profile = shot.profile.restricted(a, b)
    if flip < 0:
        profile = profile.negated()
    report = residual(profile, spec, controls)
    return MixedSolution(spec, "dirichlet-neumann", flip * alpha, profile, abs(profile.u(a)),
                         abs(profile.du(b)), report.details["normalised_residual"], shot, report, bracket)


def solve_mixed_nd(spec: ProblemSpec, controls: SolverControls = BVP_CONTROLS,
                   seed: float = 1.0) -> MixedSolution:
    """``u'(a) = 0`` and ``u(b) = 0``: fit the first zero of the Neumann shot."""
    a, b = _annulus(spec)
    work, flip = _positive_problem(spec)
    ctl = _shot_controls(controls, a, b, 2)
    cache = _ShotCache(lambda gamma: shoot_neumann(work, a, gamma, ctl), lambda s: s.rho)
    gamma, bracket, shot = _fit(cache, b, a, seed)
    profile = shot.profile.restricted(a, b)
    if flip < 0:
        profile = profile.negated()
    report = residual(profile, spec, controls)
    return MixedSolution(spec, "neumann-dirichlet", flip * gamma, profile, abs(profile.u(b)),
                         abs(profile.du(a)), report.details["normalised_residual"], shot, report, bracket)


def rescale(profile: RadialProfile, target_radius: float, p: float) -> RadialProfile:
    """Map a profile on ``[lo, S]`` to ``[lo R/S, R]`` via ``v(r) = q^(2/(p-1)) u(q r)``, ``q = S/R``."""
    if not target_radius > 0:
        raise InvalidArgumentError("target radius must be positive")
    return profile.scaled(profile.hi / target_radius, p)


def solve_ball(spec: ProblemSpec, controls: SolverControls = BVP_CONTROLS,
               k: Optional[int] = None) -> NodalSolution:
    """Radial solution on ``B(R)`` with ``k`` nodal regions, Pucci operators only."""
    if not isinstance(spec.domain, Ball):
        raise InvalidArgumentError("ball solver needs a Ball domain")
    if not isinstance(spec.kind, PucciKind):
        raise InvalidArgumentError("ball solver supports the Pucci operators only")
    k = spec.nodal_k if k is None else int(k)
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")
    R = spec.domain.R
    notes = []
    if not spec.exponents.at_most(spec.p, "minus"):
        notes.append(f"unsupported-regime: p={spec.p} exceeds p_minus={spec.exponents.p_minus}")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)

    gamma = float(spec.sign)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        shot = shoot_ball(spec, gamma, controls.with_(max_zeros=k))
    if len(shot.zeros) < k:
        raise NoKthZeroError(
            f"shot from the centre has {len(shot.zeros)} zero(s) before r={shot.trajectory.r_end}, "
            f"{k} needed" + ("" if not notes else f" ({notes[0]})")
        )
    rho_k = shot.zeros[k - 1]
    base = shot.profile.restricted(0.0, rho_k)
    profile = rescale(base, R, spec.p)
    q = rho_k / R
    radii = (0.0,) + tuple(z / q for z in shot.zeros[: k - 1]) + (R,)
    report = residual(profile, spec, controls)
    return NodalSolution(spec, k, radii, int(spec.sign), gamma, profile, report.details["normalised_residual"],
                         abs(profile.u(R)), shot, report, rescale_factor=q, warnings=tuple(notes))
