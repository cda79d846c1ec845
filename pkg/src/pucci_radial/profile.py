"""Dense radial profiles ``r -> (u(r), u'(r))`` and their rescalings."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .exceptions import InvalidArgumentError
from .ode import Trajectory

__all__ = ["RadialProfile", "TrajectorySegment", "FunctionSegment"]


class TrajectorySegment:
    """Columns ``(u, u')`` of an integrator trajectory."""

    def __init__(self, trajectory: Trajectory, lo=None, hi=None):
        self.trajectory = trajectory
        self.lo = trajectory.r0 if lo is None else float(lo)
        self.hi = trajectory.r_end if hi is None else float(hi)

    def __call__(self, s):
        y = self.trajectory.dense(s)
        return y[..., 0], y[..., 1]


class FunctionSegment:
    """Closed-form profile piece, mostly for tests and constructed inputs."""

    def __init__(self, u: Callable, du: Callable, lo: float, hi: float):
        self.u, self.du = u, du
        self.lo, self.hi = float(lo), float(hi)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.asarray(self.u(s), dtype=float), np.asarray(self.du(s), dtype=float)


class RadialProfile:
    """Piecewise dense profile viewed through an exact scaling.

    The represented function is ``v(r) = value_scale * U(radius_scale * r)``
    with ``v'(r) = slope_scale * U'(radius_scale * r)`` where ``U`` is the
    concatenation of ``segments``. Rescaling and negation only touch the
    three scale factors, so they never re-sample the data.
    """

    def __init__(self, segments: Sequence, radius_scale=1.0, value_scale=1.0, slope_scale=1.0,
                 lo=None, hi=None):
        if not segments:
            raise InvalidArgumentError("profile needs at least one segment")
        self.segments = tuple(segments)
        for left, right in zip(self.segments, self.segments[1:]):
            if not left.hi == right.lo:
                raise InvalidArgumentError("segments must be contiguous")
        self.radius_scale = float(radius_scale)
        self.value_scale = float(value_scale)
        self.slope_scale = float(slope_scale)
        src_lo, src_hi = self.segments[0].lo, self.segments[-1].hi
        self.lo = src_lo / self.radius_scale if lo is None else float(lo)
        self.hi = src_hi / self.radius_scale if hi is None else float(hi)
        if not self.lo < self.hi:
            raise InvalidArgumentError("profile domain is empty")
        slack = 1e-12 * max(1.0, abs(src_hi))
        if self.lo * self.radius_scale < src_lo - slack or self.hi * self.radius_scale > src_hi + slack:
            raise InvalidArgumentError("profile domain exceeds the underlying data")

    @classmethod
    def from_trajectory(cls, trajectory: Trajectory, lo=None, hi=None) -> "RadialProfile":
        return cls([TrajectorySegment(trajectory)], lo=lo, hi=hi)

    @classmethod
    def from_functions(cls, u, du, lo, hi) -> "RadialProfile":
        return cls([FunctionSegment(u, du, lo, hi)])

    @property
    def domain(self):
        return self.lo, self.hi

    def __call__(self, r):
        """Return ``(u, u')`` at ``r`` (scalar or array)."""
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        slack = 1e-12 * max(1.0, abs(self.hi))
        if np.any(r < self.lo - slack) or np.any(r > self.hi + slack):
            raise InvalidArgumentError(f"radius outside profile domain [{self.lo}, {self.hi}]")
        s = r * self.radius_scale
        src_lo, src_hi = self.segments[0].lo, self.segments[-1].hi
        s = np.clip(s, src_lo, src_hi)
        u = np.empty_like(s)
        du = np.empty_like(s)
        bounds = np.array([seg.hi for seg in self.segments[:-1]])
        which = np.searchsorted(bounds, s, side="right")
        for k, seg in enumerate(self.segments):
            sel = which == k
            if np.any(sel):
                u[sel], du[sel] = seg(s[sel])
        u *= self.value_scale
        du *= self.slope_scale
        if scalar:
            return float(u[0]), float(du[0])
        return u, du

    def u(self, r):
        return self(r)[0]

    def du(self, r):
        return self(r)[1]

    def sample(self, num: int = 2001):
        """Uniform samples ``(r, u, u')`` including both endpoints."""
        r = np.linspace(self.lo, self.hi, num)
        r[-1] = self.hi
        u, du = self(r)
        return r, u, du

    def _derived(self, radius_scale, value_scale, slope_scale, lo, hi):
        return RadialProfile(self.segments, radius_scale, value_scale, slope_scale, lo, hi)

    def restricted(self, lo=None, hi=None) -> "RadialProfile":
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        return self._derived(self.radius_scale, self.value_scale, self.slope_scale, lo, hi)

    def negated(self) -> "RadialProfile":
        return self._derived(self.radius_scale, -self.value_scale, -self.slope_scale, self.lo, self.hi)

    def scaled(self, factor: float, p: float) -> "RadialProfile":
        """``v(r) = factor^(2/(p-1)) u(factor r)``, the Lane-Emden invariance."""
        if not factor > 0:
            raise InvalidArgumentError("scaling factor must be positive")
        vf = factor ** (2.0 / (p - 1.0))
        sf = factor ** ((p + 1.0) / (p - 1.0))
        return self._derived(self.radius_scale * factor, self.value_scale * vf, self.slope_scale * sf,
                             self.lo / factor, self.hi / factor)
