"""Numerical certificates for shots and boundary-value solutions.

Every check returns a :class:`CheckReport` whose ``margin`` is normalised by
the dominant side of the inequality, so that a positive margin means the
claim holds with slack and ``passed`` is ``margin >= -tolerance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .exceptions import InvalidArgumentError
from .ode import SolverControls
from .operators import PucciParams, exponents, normal_form_function, radial_operator
from .problem import ProblemSpec
from .profile import RadialProfile
from .shooting import EnergyTrace, ShotResult

__all__ = [
    "CheckReport",
    "check_energy_monotonicity",
    "check_tau_bounds",
    "check_hopf_bound",
    "check_convex_increasing_exclusion",
    "check_nodal_count",
    "c_p_quadrature",
    "residual",
]

DEFAULT_TOL = 1e-7


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    margin: float
    location: Optional[float]
    tolerance: float
    details: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_margin(cls, name, margin, location, tolerance, **details):
        return cls(name, bool(margin >= -tolerance), float(margin),
                   None if location is None else float(location), float(tolerance), details)

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "margin": self.margin,
            "location": self.location,
            "tolerance": self.tolerance,
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _normalised(lhs, rhs, sense):
    """Signed slack of ``lhs >= rhs`` (sense='ge') or ``lhs <= rhs``."""
    scale = max(abs(lhs), abs(rhs), 1e-300)
    gap = lhs - rhs if sense == "ge" else rhs - lhs
    return gap / scale


def _increment_margin(values, radii, increasing):
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return math.inf, None
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return 0.0, None
    inc = np.diff(values) / scale
    if not increasing:
        inc = -inc
    i = int(np.argmin(inc))
    return float(inc[i]), float(radii[i + 1])


def check_energy_monotonicity(trace: EnergyTrace, tol: float = 1e-8) -> CheckReport:
    """E1 up and E2 down on ``[tau, rho]``; calE1 up and calE2 down on ``[a, tau]``."""
    r = trace.radii
    inner, outer = trace.inner, trace.outer
    parts = {
        "E1_outer_increasing": _increment_margin(trace.E1[outer], r[outer], True),
        "E2_outer_decreasing": _increment_margin(trace.E2[outer], r[outer], False),
        "calE1_inner_increasing": _increment_margin(trace.calE1[inner], r[inner], True),
        "calE2_inner_decreasing": _increment_margin(trace.calE2[inner], r[inner], False),
    }
    worst = min(parts, key=lambda k: parts[k][0])
    margin, loc = parts[worst]
    return CheckReport.from_margin("energy_monotonicity", margin, loc, tol,
                                   worst=worst, margins={k: v[0] for k, v in parts.items()})


def c_p_quadrature(p: float, tol: float = 1e-12) -> float:
    """``c_p = int_0^1 ds / sqrt(1 - s^(p+1))``.

    With ``s = 1 - t^2`` the integrand becomes ``2t / sqrt(1 - (1-t^2)^(p+1))``,
    which is bounded (it tends to ``2/sqrt(p+1)`` at ``t = 0``).
    """
    if not p >= 1:
        raise InvalidArgumentError(f"c_p needs p >= 1, got {p}")
    q = p + 1.0

    def integrand(t):
        if t == 0.0:
            return 2.0 / math.sqrt(q)
        return 2.0 * t / math.sqrt(-math.expm1(q * math.log1p(-t * t)))

    val, _ = quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
    return val


def check_tau_bounds(shot: ShotResult, params: PucciParams, p: float, a: float, alpha: float,
                     tol: float = DEFAULT_TOL) -> CheckReport:
    """Two lower and two upper bounds on the maximum ``u(tau)`` of the first arch."""
    if not shot.critical_points:
        raise InvalidArgumentError("shot has no critical point")
    tau = shot.critical_points[0]
    ut = abs(shot.values_at_critical[0])
    alpha = abs(alpha)
    lam, Lam = params.lam, params.Lam
    nt = exponents(params).n_tilde_minus

    margins = {}
    lhs = ut ** (p + 1)
    margins["lbtau1"] = _normalised(lhs, 0.5 * lam * (p + 1) * (a / tau) ** (2 * (nt - 1)) * alpha ** 2, "ge")
    margins["ubtau1"] = _normalised(lhs, 0.5 * Lam * (p + 1) * alpha ** 2, "le")
    cp = c_p_quadrature(p)
    margins["ubtau2"] = _normalised(ut, (math.sqrt(0.5 * Lam * (p + 1)) * cp / (tau - a)) ** (2 / (p - 1)), "le")
    notes = []
    if nt > 2:
        rhs = (a ** (nt - 1) * alpha / (nt - 2) * (a ** (2 - nt) - tau ** (2 - nt))
               - ut ** p * (tau - a) ** 2 / (2 * lam))
        margins["lbtau2"] = _normalised(ut, rhs, "ge")
    else:
        notes.append("lbtau2 skipped: n_tilde_minus = 2")
    worst = min(margins, key=margins.get)
    return CheckReport.from_margin("tau_bounds", margins[worst], tau, tol,
                                   worst=worst, margins=margins, c_p=cp, notes=notes)


def check_hopf_bound(shot: ShotResult, params: PucciParams, a: float, alpha: float,
                     tol: float = DEFAULT_TOL) -> CheckReport:
    """``|u'(rho)| >= sqrt(lam/Lam) (a/rho)^(n_tilde_minus - 1) |alpha|`` with opposite sign."""
    if not shot.zeros:
        return CheckReport("hopf_bound", True, math.nan, None, tol,
                           {"applicable": False, "classification": shot.classification.value})
    rho = shot.zeros[0]
    nt = exponents(params).n_tilde_minus
    bound = math.sqrt(params.lam / params.Lam) * (a / rho) ** (nt - 1) * abs(alpha)
    slope = shot.slopes_at_zeros[0] * math.copysign(1.0, alpha)
    margin = _normalised(slope, -bound, "le")
    return CheckReport.from_margin("hopf_bound", margin, rho, tol, applicable=True,
                                   slope=shot.slopes_at_zeros[0], bound=-math.copysign(bound, alpha),
                                   hopf_sign_ok=slope < 0)


def _curvature_samples(profile: RadialProfile, r, u, du, g):
    """``u''`` from a centred difference of ``u'`` where the stencil fits, else from the ODE."""
    lo, hi = profile.domain
    h = 1e-4 * (hi - lo)
    inner = (r - 2 * h >= lo) & (r + 2 * h <= hi)
    ddu = np.empty_like(r)
    ri = r[inner]
    ddu[inner] = (8.0 * (profile.du(ri + h) - profile.du(ri - h))
                  - (profile.du(ri + 2 * h) - profile.du(ri - 2 * h))) / (12.0 * h)
    ddu[~inner] = [g(x, y, z) for x, y, z in zip(r[~inner], u[~inner], du[~inner])]
    return ddu


def check_convex_increasing_exclusion(profile: RadialProfile, spec: ProblemSpec, tol: float = 1e-10,
                                      samples: int = 4001) -> CheckReport:
    """No sample is simultaneously positive, increasing and convex (mirrored for u < 0).

    ``u''`` is reconstructed by differencing the profile's ``u'``, so the
    check also applies to profiles that do not come from the ODE.
    """
    r, u, du = profile.sample(samples)
    g = normal_form_function(spec.kind, spec.params, spec.p)
    keep = r > 0
    r, u, du = r[keep], u[keep], du[keep]
    ddu = _curvature_samples(profile, r, u, du, g)
    s = np.sign(u)
    bad = (s * u > tol) & (s * du > tol) & (s * ddu > tol)
    worst = float(np.max(np.where((s * u > tol) & (s * du > tol), s * ddu, -np.inf), initial=-np.inf))
    loc = float(r[np.argmax(bad)]) if np.any(bad) else None
    return CheckReport("convex_increasing_exclusion", not bool(np.any(bad)),
                       -worst if math.isfinite(worst) else math.inf, loc, tol,
                       {"violations": int(np.sum(bad))})


def check_nodal_count(profile: RadialProfile, k: int, first_sign: int, samples: int = 10_000,
                      floor: float = 1e-12) -> CheckReport:
    """Exactly ``k - 1`` strict sign changes inside the domain, starting with ``first_sign``.

    Samples whose modulus is below ``floor`` times the profile maximum are
    treated as zeros and skipped.
    """
    r, u, _ = profile.sample(samples + 2)
    r, u = r[1:-1], u[1:-1]
    cut = floor * float(np.max(np.abs(u)))
    keep = np.abs(u) > cut
    s = np.sign(u[keep])
    changes = int(np.count_nonzero(s[1:] != s[:-1]))
    starts_right = bool(s.size) and int(s[0]) == int(np.sign(first_sign))
    ok = changes == k - 1 and starts_right
    where = r[keep][1:][s[1:] != s[:-1]]
    return CheckReport("nodal_count", ok, 0.0 if ok else -1.0, None, 0.0,
                       {"sign_changes": changes, "expected": k - 1, "first_sign_ok": starts_right,
                        "change_locations": [float(x) for x in where]})


def _sign_change_roots(func, grid, values):
    roots = []
    idx = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    for i in idx:
        try:
            roots.append(brentq(func, grid[i], grid[i + 1], xtol=1e-14))
        except ValueError:
            roots.append(0.5 * (grid[i] + grid[i + 1]))
    exact = grid[values == 0]
    return np.concatenate([np.asarray(roots, dtype=float), exact])


def residual(solution, spec: ProblemSpec, controls: SolverControls = SolverControls(),
             tol: float = 1e-6, points: int = 2000) -> CheckReport:
    """Finite-difference certificate of ``F(r, u'', u'/r) + |u|^(p-1) u = 0``.

    ``u''`` comes from the fourth-order centred difference of the profile's
    ``u'`` at spacing ``h = 1e-4 * (domain length)``. Points within two
    stencil widths of a zero of ``u``, ``u'`` or ``u''`` (the switching
    surfaces of the operator) are excluded, as are points with
    ``|u|`` or ``|u'|`` below ``10 * abs_tol``. The reported margin is minus
    the largest residual divided by ``max |u|^p``.
    """
    profile = solution.profile if hasattr(solution, "profile") else solution
    if not isinstance(profile, RadialProfile):
        raise InvalidArgumentError("residual needs a RadialProfile or an object carrying one")
    lo, hi = profile.domain
    length = hi - lo
    h = 1e-4 * length
    if not length > 0 or points < 10:
        raise InvalidArgumentError("profile too short for differencing")
    r = np.linspace(lo + 3 * h, hi - 3 * h, points)
    u, du = profile(r)
    dp1, dm1 = profile.du(r + h), profile.du(r - h)
    dp2, dm2 = profile.du(r + 2 * h), profile.du(r - 2 * h)
    ddu = (8.0 * (dp1 - dm1) - (dp2 - dm2)) / (12.0 * h)
    p = spec.p
    src = np.abs(u) ** (p - 1.0) * u
    res = np.abs(radial_operator(spec.kind, spec.params, r, ddu, du / r) + src)

    g = normal_form_function(spec.kind, spec.params, p, controls.abs_tol)

    def curvature(x):
        ux, dux = profile(x)
        return g(x, ux, dux)

    ddu_model = np.array([g(ri, ui, dui) for ri, ui, dui in zip(r, u, du)])
    kinks = np.concatenate([
        _sign_change_roots(lambda x: profile.u(x), r, u),
        _sign_change_roots(lambda x: profile.du(x), r, du),
        _sign_change_roots(curvature, r, ddu_model),
    ])
    mask = (np.abs(u) >= 10 * controls.abs_tol) & (np.abs(du) >= 10 * controls.abs_tol)
    for k in kinks:
        mask &= np.abs(r - k) > 2 * h
    if np.count_nonzero(mask) < 10:
        raise InvalidArgumentError("too few admissible points for the residual check")

    scale = float(np.max(np.abs(u)) ** p)
    if scale == 0.0:
        raise InvalidArgumentError("profile vanishes identically")
    masked = np.where(mask, res, -np.inf)
    i = int(np.argmax(masked))
    raw = float(res[i])
    normalised = raw / scale
    return CheckReport.from_margin("residual", -normalised, r[i], tol, max_residual=raw,
                                   normalised_residual=normalised, normalisation=scale,
                                   spacing=h, excluded=int(points - np.count_nonzero(mask)))
