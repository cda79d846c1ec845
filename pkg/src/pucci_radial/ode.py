"""Adaptive explicit Runge-Kutta integration with dense output and events.

The method is the Dormand-Prince 5(4) pair (local extrapolation, FSAL) with
Hairer's quartic continuous extension and a proportional-integral step size
controller. Integration only runs forward in ``r``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .exceptions import EventBracketError, InvalidArgumentError, ResourceError

__all__ = ["SolverControls", "Status", "Event", "EventHit", "Trajectory", "integrate", "locate_event"]


@dataclass(frozen=True)
class SolverControls:
    """Tolerances and budgets shared by all shooting routines.

    ``r_max=None`` resolves to ``1e4 * max(r0, 1)`` at the start radius.
    ``h_init=None`` picks the first step automatically.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: Optional[float] = None
    h_min: float = 1e-14
    r_max: Optional[float] = None
    blowup_threshold: float = 1e12
    decay_threshold: float = 1e-10
    event_tol: float = 1e-12
    max_zeros: int = 1
    max_steps: int = 2_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "h_min", "blowup_threshold", "decay_threshold", "event_tol"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.h_init is not None and not self.h_min < self.h_init:
            raise InvalidArgumentError("h_min must be smaller than h_init")
        if self.r_max is not None and not math.isfinite(self.r_max):
            raise InvalidArgumentError("r_max must be finite")
        if self.max_zeros < 1 or self.max_steps < 1:
            raise InvalidArgumentError("max_zeros and max_steps must be positive")

    def horizon(self, r0: float) -> float:
        return self.r_max if self.r_max is not None else 1e4 * max(r0, 1.0)

    def with_(self, **changes) -> "SolverControls":
        return replace(self, **changes)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


class Status(enum.Enum):
    REACHED_HORIZON = "ReachedHorizon"
    EVENT_STOPPED = "EventStopped"
    BLOW_UP = "BlowUp"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class Event:
    """Sign-change event ``func(r, state)``.

    ``terminal=0`` only records crossings; ``terminal=k`` stops the
    integration at the k-th crossing.
    """

    func: Callable[[float, np.ndarray], float]
    terminal: int = 1
    name: str = ""

    def __call__(self, r, y):
        return self.func(r, y)


@dataclass(frozen=True)
class EventHit:
    name: str
    index: int
    r: float
    state: np.ndarray
    step: int


# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
_D1 = -12715105075 / 11282082432
_D3 = 87487479700 / 32700410799
_D4 = -10690763975 / 1880347072
_D5 = 701980252875 / 199316789632
_D6 = -1453857185 / 822651844
_D7 = 69997945 / 29380423

# PI controller (Hairer & Wanner, DOPRI5 defaults)
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_SAFE = 0.9
_FAC_MIN, _FAC_MAX = 0.2, 10.0


class Trajectory:
    """Accepted steps of one integration with their quartic interpolants.

    Step ``i`` covers ``[r_start[i], r_start[i] + h[i]]`` and carries monomial
    coefficients ``coeffs[i]`` in ``theta = (r - r_start[i]) / h[i]``; the
    last step may be cut short by a terminal event at ``r_end``.
    """

    def __init__(self, r_start, h, coeffs, r_end, state_end, status, events, stats):
        self.r_start = np.asarray(r_start, dtype=float)
        self.h = np.asarray(h, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.r_end = float(r_end)
        self.state_end = np.array(state_end, dtype=float)
        self.status = status
        self.events: List[EventHit] = list(events)
        self.stats = dict(stats)
        self.r_start.flags.writeable = False
        self.coeffs.flags.writeable = False

    @property
    def r0(self) -> float:
        return float(self.r_start[0]) if len(self.r_start) else self.r_end

    @property
    def nodes(self) -> np.ndarray:
        return np.append(self.r_start, self.r_end)

    @property
    def states(self) -> np.ndarray:
        if len(self.coeffs) == 0:
            return self.state_end[None, :]
        return np.vstack([self.coeffs[:, 0, :], self.state_end[None, :]])

    def __len__(self):
        return len(self.r_start)

    def step_dense(self, i: int, r):
        theta = (r - self.r_start[i]) / self.h[i]
        c = self.coeffs[i]
        return c[0] + theta * (c[1] + theta * (c[2] + theta * (c[3] + theta * c[4])))

    def dense(self, r):
        """Interpolated state at ``r`` (scalar -> (d,), array -> (N, d))."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr < self.r0) or np.any(r_arr > self.r_end):
            raise InvalidArgumentError(f"radius outside [{self.r0}, {self.r_end}]")
        if len(self.r_start) == 0:
            out = np.repeat(self.state_end[None, :], len(r_arr), axis=0)
        else:
            idx = np.searchsorted(self.r_start, r_arr, side="right") - 1
            idx = np.clip(idx, 0, len(self.r_start) - 1)
            theta = ((r_arr - self.r_start[idx]) / self.h[idx])[:, None]
            c = self.coeffs[idx]
            out = c[:, 0] + theta * (c[:, 1] + theta * (c[:, 2] + theta * (c[:, 3] + theta * c[:, 4])))
            at_end = r_arr == self.r_end
            out[at_end] = self.state_end
        return out[0] if np.ndim(r) == 0 else out

    def prepend_step(self, r0, h, coeffs) -> "Trajectory":
        """New trajectory with an extra leading polynomial step (series starts)."""
        if abs((r0 + h) - self.r0) > 1e-15 * max(1.0, abs(self.r0)):
            raise InvalidArgumentError("prepended step must end at the trajectory start")
        coeffs = np.asarray(coeffs, dtype=float)[None, :, :]
        return Trajectory(
            np.concatenate([[r0], self.r_start]),
            np.concatenate([[h], self.h]),
            np.concatenate([coeffs, self.coeffs]) if len(self.coeffs) else coeffs,
            self.r_end,
            self.state_end,
            self.status,
            [replace(e, step=e.step + 1) for e in self.events],
            self.stats,
        )


def _initial_step(rhs, r0, y0, f0, rel_tol, abs_tol, span):
    sc = abs_tol + rel_tol * np.abs(y0)
    d0 = np.max(np.abs(y0) / sc)
    d1 = np.max(np.abs(f0) / sc)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = np.asarray(rhs(r0 + h0, y1), dtype=float)
    d2 = np.max(np.abs(f1 - f0) / sc) / h0
    dmax = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dmax <= 1e-15 else (0.01 / dmax) ** 0.2
    return min(100 * h0, h1, span)


def integrate(rhs: Callable[[float, np.ndarray], Sequence[float]], r0: float, state0,
              controls: SolverControls = SolverControls(), stop_events: Sequence = ()) -> Trajectory:
    """Integrate ``y' = rhs(r, y)`` forward from ``r0`` to the horizon.

    ``stop_events`` holds :class:`Event` objects or bare callables (treated
    as terminal at the first crossing). Crossings at ``r0`` itself are not
    reported.
    """
    events = [e if isinstance(e, Event) else Event(e, 1, getattr(e, "__name__", "")) for e in stop_events]
    r_max = controls.horizon(r0)
    if not r0 < r_max:
        raise InvalidArgumentError(f"start radius {r0} must be below the horizon {r_max}")
    y = np.array(state0, dtype=float)
    f = np.asarray(rhs(r0, y), dtype=float)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(f))):
        raise InvalidArgumentError("right-hand side is not finite at the initial state")

    rtol, atol = controls.rel_tol, controls.abs_tol
    h = controls.h_init if controls.h_init is not None else _initial_step(rhs, r0, y, f, rtol, atol, r_max - r0)
    r = float(r0)
    g_prev = [float(e(r, y)) for e in events]
    counts = [0] * len(events)
    hits: List[EventHit] = []
    r_start, hs, coeffs = [], [], []
    status = Status.REACHED_HORIZON
    err_old = 1e-4
    rejected = False
    n_acc = n_rej = 0
    n_rhs = 1

    while r < r_max:
        if n_acc + n_rej >= controls.max_steps:
            raise ResourceError(f"exceeded max_steps={controls.max_steps} at r={r}")
        last = False
        if r + h >= r_max:
            h = r_max - r
            last = True

        k1 = f
        k2 = np.asarray(rhs(r + _C[1] * h, y + h * (_A21 * k1)), dtype=float)
        k3 = np.asarray(rhs(r + _C[2] * h, y + h * (_A31 * k1 + _A32 * k2)), dtype=float)
        k4 = np.asarray(rhs(r + _C[3] * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3)), dtype=float)
        k5 = np.asarray(rhs(r + _C[4] * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4)),
                        dtype=float)
        y_stage = y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5)
        k6 = np.asarray(rhs(r + h, y_stage), dtype=float)
        y_new = y + h * (_A71 * k1 + _A73 * k3 + _A74 * k4 + _A75 * k5 + _A76 * k6)
        r_new = r_max if last else r + h
        k7 = np.asarray(rhs(r_new, y_new), dtype=float)
        n_rhs += 6

        err_vec = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if not math.isfinite(err):
            err = 1e10

        fac11 = err ** _EXPO if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / err_old ** _BETA
            fac = min(1 / _FAC_MIN, max(1 / _FAC_MAX, fac / _SAFE))
            h_next = h / fac
            if rejected:
                h_next = min(h_next, h)
            err_old = max(err, 1e-4)
            rejected = False
            n_acc += 1

            ydiff = y_new - y
            bspl = h * k1 - ydiff
            rc4 = ydiff - h * k7 - bspl
            rc5 = h * (_D1 * k1 + _D3 * k3 + _D4 * k4 + _D5 * k5 + _D6 * k6 + _D7 * k7)
            c = np.array([y, ydiff + bspl, rc4 + rc5 - bspl, -(rc4 + 2 * rc5), rc5])
            step_idx = len(r_start)
            r_start.append(r)
            hs.append(h)
            coeffs.append(c)

            # events inside (r, r_new]
            stop_at = None
            found = []
            g_new = [float(e(r_new, y_new)) for e in events]
            for j, e in enumerate(events):
                gp, gn = g_prev[j], g_new[j]
                if gp != 0.0 and (gp * gn < 0.0 or gn == 0.0):
                    found.append((_refine(e, r, h, c, r_new, controls.event_tol), j))
            for r_ev, j in sorted(found):
                if stop_at is not None:
                    break
                counts[j] += 1
                st = _poly(c, (r_ev - r) / h) if r_ev != r_new else y_new.copy()
                hits.append(EventHit(events[j].name, j, float(r_ev), st, step_idx))
                if events[j].terminal and counts[j] >= events[j].terminal:
                    stop_at = (r_ev, st)
            g_prev = g_new

            if stop_at is not None:
                r, y = stop_at
                status = Status.EVENT_STOPPED
                break
            r, y, f = r_new, y_new, k7
            if float(np.max(np.abs(y))) > controls.blowup_threshold:
                status = Status.BLOW_UP
                break
            h = h_next
        else:
            n_rej += 1
            rejected = True
            h = h / min(1 / _FAC_MIN, fac11 / _SAFE)
            if h < controls.h_min:
                status = Status.STEP_UNDERFLOW
                break

    stats = {"accepted_steps": n_acc, "rejected_steps": n_rej, "rhs_evaluations": n_rhs}
    return Trajectory(r_start, hs, np.array(coeffs).reshape(len(coeffs), 5, len(y)), r, y, status, hits, stats)


def _poly(c, theta):
    return c[0] + theta * (c[1] + theta * (c[2] + theta * (c[3] + theta * c[4])))


def _refine(event, r, h, c, r_new, event_tol):
    def g(theta):
        return float(event(r + theta * h, _poly(c, theta)))

    ga, gb = g(0.0), g(1.0)
    if gb == 0.0 or ga * gb > 0.0:
        # interpolant rounding at theta=1 disagrees with the step endpoint
        return r_new
    theta = brentq(g, 0.0, 1.0, xtol=event_tol / h, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(min(r + theta * h, r_new))


def locate_event(trajectory: Trajectory, event, bracket: int, event_tol: float = 1e-12) -> float:
    """Root of ``event`` on the dense interpolant of step ``bracket``."""
    n = len(trajectory)
    if not 0 <= bracket < n:
        raise InvalidArgumentError(f"step index {bracket} out of range")
    r0 = float(trajectory.r_start[bracket])
    h = float(trajectory.h[bracket])
    r1 = trajectory.r_end if bracket == n - 1 else r0 + h
    c = trajectory.coeffs[bracket]

    def g(r):
        return float(event(r, trajectory.dense(r) if r == r1 else _poly(c, (r - r0) / h)))

    ga, gb = g(r0), g(r1)
    if ga == 0.0:
        return r0
    if gb == 0.0:
        return r1
    if ga * gb > 0.0:
        raise EventBracketError(f"event has no sign change on step {bracket} [{r0}, {r1}]")
    return brentq(g, r0, r1, xtol=event_tol, rtol=4 * np.finfo(float).eps, maxiter=200)
