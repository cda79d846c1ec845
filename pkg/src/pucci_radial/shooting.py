"""Cauchy problems for the radial equation and their shot records.

Three starts are supported: the inner radius of an annulus with
``u(a) = 0, u'(a) = slope``, the centre of a ball with ``u(0) = gamma``, and
a Neumann start ``u(a) = gamma, u'(a) = 0``. Each shot is integrated with the
same normal form across sign changes, so the k-th zero of a single
trajectory is the outer end of the k-th nodal region.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import IntegrationError, InvalidArgumentError
from .ode import Event, SolverControls, Status, Trajectory, integrate
from .operators import GeneralRadial, PucciKind, PucciParams, exponents, normal_form_function
from .problem import ProblemSpec
from .profile import RadialProfile

__all__ = [
    "Classification",
    "ShotResult",
    "EnergyTrace",
    "SubcriticalityWarning",
    "shoot_annulus",
    "shoot_ball",
    "shoot_neumann",
    "center_curvature",
    "energy_trace",
]


class SubcriticalityWarning(UserWarning):
    """Raised when a ball shot is run beyond ``p_minus``."""


class Classification(enum.Enum):
    FINITE = "Finite"
    DECAYS_TO_ZERO = "DecaysToZero"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ShotResult:
    start: Tuple[float, float, float]
    parameter: float
    zeros: Tuple[float, ...]
    critical_points: Tuple[float, ...]
    slopes_at_zeros: Tuple[float, ...]
    values_at_critical: Tuple[float, ...]
    classification: Classification
    profile: RadialProfile
    trajectory: Trajectory
    status: Status
    warnings: Tuple[str, ...] = ()

    @property
    def tau(self) -> float:
        """First critical radius."""
        return self.critical_points[0]

    @property
    def rho(self) -> float:
        """First zero, ``inf`` when none was found."""
        return self.zeros[0] if self.zeros else math.inf

    def kth_zero(self, k: int) -> float:
        return self.zeros[k - 1] if len(self.zeros) >= k else math.inf


def _rhs(spec: ProblemSpec, controls: SolverControls):
    g = normal_form_function(spec.kind, spec.params, spec.p, controls.abs_tol)

    def rhs(r, y):
        return (y[1], g(r, y[0], y[1]))

    return rhs


def _events(controls):
    return [
        Event(lambda r, y: y[0], controls.max_zeros, "zero"),
        Event(lambda r, y: y[1], 0, "critical"),
    ]


def _run(spec, r0, state0, controls, parameter, series=None):
    traj = integrate(_rhs(spec, controls), r0, state0, controls, _events(controls))
    if series is not None:
        traj = traj.prepend_step(*series)

    zeros, slopes, crit, crit_vals = [], [], [], []
    for hit in traj.events:
        if hit.name == "zero":
            zeros.append(hit.r)
            slopes.append(float(hit.state[1]))
        else:
            crit.append(hit.r)
            crit_vals.append(float(hit.state[0]))

    notes: List[str] = []
    if traj.status is Status.BLOW_UP and not zeros:
        raise IntegrationError(
            f"solution exceeded {controls.blowup_threshold} at r={traj.r_end} before its first zero; "
            "check the integrator controls"
        )
    if len(zeros) >= controls.max_zeros:
        cls = Classification.FINITE
    elif traj.status is Status.REACHED_HORIZON:
        u_end, du_end = traj.state_end
        if abs(u_end) < controls.decay_threshold and u_end * du_end < 0:
            cls = Classification.DECAYS_TO_ZERO
        else:
            cls = Classification.UNDETERMINED
    else:
        cls = Classification.UNDETERMINED
        notes.append(f"integration ended with status {traj.status.value} at r={traj.r_end}")

    start = (float(traj.r0), float(traj.dense(traj.r0)[0]), float(traj.dense(traj.r0)[1]))
    return ShotResult(
        start=start,
        parameter=float(parameter),
        zeros=tuple(zeros),
        critical_points=tuple(crit),
        slopes_at_zeros=tuple(slopes),
        values_at_critical=tuple(crit_vals),
        classification=cls,
        profile=RadialProfile.from_trajectory(traj),
        trajectory=traj,
        status=traj.status,
        warnings=tuple(notes),
    )


def shoot_annulus(spec: ProblemSpec, a: float, slope: float,
                  controls: SolverControls = SolverControls()) -> ShotResult:
    """Integrate ``u(a) = 0, u'(a) = slope`` outward until ``max_zeros`` zeros."""
    if not a > 0:
        raise InvalidArgumentError(f"inner radius must be positive, got {a}")
    if slope == 0 or not math.isfinite(slope):
        raise InvalidArgumentError("initial slope must be finite and nonzero")
    return _run(spec, float(a), (0.0, float(slope)), controls, slope)


def shoot_neumann(spec: ProblemSpec, a: float, gamma: float,
                  controls: SolverControls = SolverControls()) -> ShotResult:
    """Integrate ``u(a) = gamma, u'(a) = 0`` outward; ``zeros[0]`` is sigma(gamma)."""
    if not a > 0:
        raise InvalidArgumentError(f"start radius must be positive, got {a}")
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InvalidArgumentError("Neumann start value must be positive")
    return _run(spec, float(a), (float(gamma), 0.0), controls, gamma)


def center_curvature(kind, params: PucciParams, p: float, gamma: float, r: float = 1.0) -> float:
    """``u''(0)``: solves ``F(c I) = -|gamma|^(p-1) gamma`` for ``c``."""
    t = -abs(gamma) ** (p - 1.0) * gamma
    n = params.n
    if kind is PucciKind.PLUS:
        return t / (n * params.Lam) if t > 0 else t / (n * params.lam)
    if kind is PucciKind.MINUS:
        return t / (n * params.lam) if t > 0 else t / (n * params.Lam)
    if isinstance(kind, GeneralRadial):
        # c -> F(r, c, c) has slope in [n lam, n Lam]
        half = abs(t) / (n * params.lam) * (1.0 + 1e-9)
        lo, hi = -half, half
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if kind(r, mid, mid) < t:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    raise InvalidArgumentError(f"unknown operator kind {kind!r}")


def shoot_ball(spec: ProblemSpec, center_value: float,
               controls: SolverControls = SolverControls()) -> ShotResult:
    """Shoot from the centre with ``u(0) = center_value, u'(0) = 0``.

    The first stretch ``[0, h0]`` uses ``u = gamma + c r^2 / 2`` with
    ``h0 = sqrt(abs_tol) * max(1, |gamma|)^((1-p)/2)``.
    """
    gamma = float(center_value)
    if gamma == 0 or not math.isfinite(gamma):
        raise InvalidArgumentError("centre value must be finite and nonzero")
    p = spec.p
    h0 = math.sqrt(controls.abs_tol) * max(1.0, abs(gamma)) ** ((1.0 - p) / 2.0)
    c = center_curvature(spec.kind, spec.params, p, gamma, r=h0)
    c2 = 0.5 * c * h0 ** 2
    c1 = c * h0
    coeffs = np.zeros((5, 2))
    coeffs[0] = (gamma, 0.0)
    coeffs[1] = (0.0, c1)
    coeffs[2] = (c2, 0.0)
    shot = _run(spec, h0, (gamma + c2, c1), controls, gamma, series=(0.0, h0, coeffs))
    if shot.classification is not Classification.FINITE and not spec.exponents.at_most(p, "minus"):
        msg = (f"no zero #{controls.max_zeros} before r={shot.trajectory.r_end}; "
               f"p={p} exceeds p_minus={spec.exponents.p_minus}")
        warnings.warn(msg, SubcriticalityWarning, stacklevel=2)
        shot = _with_note(shot, msg)
    return shot


def _with_note(shot, note):
    from dataclasses import replace
    return replace(shot, warnings=shot.warnings + (note,))


@dataclass(frozen=True)
class EnergyTrace:
    """Energies on the first arch; ``radii[:tau_index + 1]`` is the inner branch."""

    radii: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    calE1: np.ndarray
    calE2: np.ndarray
    tau_index: int

    @property
    def inner(self):
        return slice(0, self.tau_index + 1)

    @property
    def outer(self):
        return slice(self.tau_index, len(self.radii))


def energy_energies(r, u, du, params: PucciParams, p: float):
    """The four energy functions at samples ``(r, u, u')``."""
    nt = exponents(params).n_tilde_minus
    w = r ** (2.0 * (nt - 1.0))
    kin = 0.5 * du ** 2
    pot = np.abs(u) ** (p + 1.0) / (p + 1.0)
    return (w * (kin + pot / params.Lam), kin + pot / params.lam,
            w * (kin + pot / params.lam), kin + pot / params.Lam)


def energy_trace(shot: ShotResult, params: PucciParams, p: float, samples: int = 2001) -> EnergyTrace:
    """Sample the four first-arch energies on ``[r0, tau]`` and ``[tau, rho]``."""
    if not shot.critical_points:
        raise InvalidArgumentError("shot has no critical point")
    r0 = shot.start[0]
    tau = shot.critical_points[0]
    end = shot.zeros[0] if shot.zeros else shot.profile.hi
    inner = np.linspace(r0, tau, samples)
    outer = np.linspace(tau, end, samples)[1:]
    outer[-1] = end
    radii = np.concatenate([inner, outer])
    u, du = shot.profile(radii)
    E1, E2, cE1, cE2 = energy_energies(radii, u, du, params, p)
    return EnergyTrace(radii, E1, E2, cE1, cE2, samples - 1)
