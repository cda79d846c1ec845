"""Pucci extremal operators restricted to radial Hessians.

A radial function u(|x|) has Hessian eigenvalues u'' (simple) and u'/r
(multiplicity n-1). Every operator here is therefore handled through its
radial trace ``F(r, m, l)`` with ``m = u''`` and ``l = u'/r``, and the ODE
``-F(r, u'', u'/r) = |u|^(p-1) u`` is put in normal form by inverting the
monotone map ``m -> F(r, m, l)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .exceptions import DomainError, EllipticityViolationError, InvalidArgumentError

__all__ = [
    "INF",
    "Infinity",
    "PucciParams",
    "PucciKind",
    "GeneralRadial",
    "ExponentSet",
    "pucci_apply",
    "radial_hessian_eigenvalues",
    "radial_operator",
    "normal_form",
    "normal_form_function",
    "dual_operator",
    "exponents",
    "check_uniform_ellipticity",
]


class Infinity:
    """Marker for an infinite critical exponent.

    Ordering comparisons raise ``TypeError`` on purpose; call sites must test
    ``x is INF`` (or use :func:`float` explicitly).
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __float__(self):
        return math.inf

    def __reduce__(self):
        return (Infinity, ())

    def _refuse(self, other):
        raise TypeError("compare critical exponents through ExponentSet helpers")

    __lt__ = __le__ = __gt__ = __ge__ = _refuse


INF = Infinity()


@dataclass(frozen=True)
class PucciParams:
    """Ellipticity constants ``0 < lam <= Lam`` and dimension ``n``."""

    lam: float
    Lam: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.Lam)):
            raise InvalidArgumentError("ellipticity constants must be finite")
        if not 0 < self.lam <= self.Lam:
            raise InvalidArgumentError(
                f"need 0 < lambda <= Lambda, got lambda={self.lam}, Lambda={self.Lam}"
            )
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgumentError(f"dimension must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))


class PucciKind(enum.Enum):
    PLUS = "pucci+"
    MINUS = "pucci-"

    def __str__(self):
        return self.value


class GeneralRadial:
    """User-supplied radial operator ``evaluator(r, m, l) -> F``.

    The evaluator must be nondecreasing in ``m`` and ``l`` with increments
    between ``lam`` and ``Lam`` times the increment per eigenvalue slot, and
    must satisfy ``evaluator(r, 0, 0) == 0``.
    """

    def __init__(self, evaluator: Callable[[float, float, float], float], name: str = "general"):
        self.evaluator = evaluator
        self.name = name
        self._dual_of = None

    def __call__(self, r, m, l):
        return self.evaluator(r, m, l)

    def __repr__(self):
        return f"GeneralRadial({self.name!r})"


OperatorKind = Union[PucciKind, GeneralRadial]


@dataclass(frozen=True)
class ExponentSet:
    n_tilde_plus: float
    n_tilde_minus: float
    p_plus: Union[float, Infinity]
    p_minus: Union[float, Infinity]

    def at_most(self, p: float, which: str = "minus") -> bool:
        """True when ``p`` is at or below ``p_plus``/``p_minus``."""
        bound = self.p_minus if which == "minus" else self.p_plus
        return bound is INF or p <= bound

    def as_dict(self):
        def enc(x):
            return "inf" if x is INF else x

        return {
            "n_tilde_plus": self.n_tilde_plus,
            "n_tilde_minus": self.n_tilde_minus,
            "p_plus": enc(self.p_plus),
            "p_minus": enc(self.p_minus),
        }


def _check_radius(r):
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")


def pucci_apply(kind: PucciKind, params: PucciParams, eigenvalues: Sequence[float]) -> float:
    """Evaluate M+ or M- on a list of Hessian eigenvalues."""
    if not isinstance(kind, PucciKind):
        raise InvalidArgumentError("pucci_apply needs PucciKind.PLUS or PucciKind.MINUS")
    mu = np.asarray(eigenvalues, dtype=float)
    if mu.size == 0:
        raise InvalidArgumentError("eigenvalue list is empty")
    if not np.all(np.isfinite(mu)):
        raise InvalidArgumentError("eigenvalues must be finite")
    pos = float(mu[mu > 0].sum())
    neg = float(mu[mu < 0].sum())
    if kind is PucciKind.PLUS:
        return params.Lam * pos + params.lam * neg
    return params.lam * pos + params.Lam * neg


def radial_hessian_eigenvalues(r: float, uprime: float, usecond: float, n: int):
    """Return ``(u'', u'/r, n-1)``: the simple and the repeated eigenvalue."""
    _check_radius(r)
    return usecond, uprime / r, n - 1


def _weights(kind, params):
    # (weight on positive part, weight on negative part)
    if kind is PucciKind.PLUS:
        return params.Lam, params.lam
    return params.lam, params.Lam


def radial_operator(kind: OperatorKind, params: PucciParams, r, m, l):
    """Evaluate ``F(r, m, l)``; vectorised over numpy arrays for Pucci kinds."""
    if isinstance(kind, GeneralRadial):
        if np.ndim(m) == 0 and np.ndim(l) == 0 and np.ndim(r) == 0:
            return kind(r, m, l)
        r, m, l = np.broadcast_arrays(r, m, l)
        return np.array([kind(ri, mi, li) for ri, mi, li in zip(r.ravel(), m.ravel(), l.ravel())]).reshape(m.shape)
    wp, wn = _weights(kind, params)
    m = np.asarray(m, dtype=float)
    l = np.asarray(l, dtype=float)
    val = np.where(m > 0, wp * m, wn * m) + (params.n - 1) * np.where(l > 0, wp * l, wn * l)
    return float(val) if val.ndim == 0 else val


def _general_solve(kind, params, r, l, target, tol):
    f0 = kind(r, 0.0, l)
    radius = abs(target - f0) / params.lam
    if radius == 0.0:
        return 0.0
    radius *= 1.0 + 1e-9
    lo, hi = -radius, radius
    flo, fhi = kind(r, lo, l), kind(r, hi, l)
    if not (flo <= target <= fhi):
        raise EllipticityViolationError(
            f"F(r, m, l) does not bracket the target on [{lo}, {hi}] at r={r}, l={l}"
        )
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = kind(r, mid, l)
        if not (flo <= fm <= fhi):
            raise EllipticityViolationError(f"F(r, m, l) is not monotone in m near m={mid}")
        if fm < target:
            lo, flo = mid, fm
        elif fm > target:
            hi, fhi = mid, fm
        else:
            return mid
    return 0.5 * (lo + hi)


def normal_form_function(kind: OperatorKind, params: PucciParams, p: float, abs_tol: float = 1e-12):
    """Build a fast scalar callable ``(r, u, du) -> u''`` for the radial ODE."""
    if not p > 1:
        raise InvalidArgumentError(f"exponent must exceed 1, got {p}")
    lam, Lam, nm1 = params.lam, params.Lam, params.n - 1
    pm1 = p - 1.0

    if kind is PucciKind.PLUS:
        def g(r, u, du):
            l = du / r
            t = -(abs(u) ** pm1) * u - nm1 * (Lam * l if l > 0 else lam * l)
            return t / Lam if t > 0 else t / lam
        return g

    if kind is PucciKind.MINUS:
        def g(r, u, du):
            l = du / r
            t = -(abs(u) ** pm1) * u - nm1 * (lam * l if l > 0 else Lam * l)
            return t / lam if t > 0 else t / Lam
        return g

    if isinstance(kind, GeneralRadial):
        tol = abs_tol / Lam

        def g(r, u, du):
            return _general_solve(kind, params, r, du / r, -(abs(u) ** pm1) * u, tol)
        return g

    raise InvalidArgumentError(f"unknown operator kind {kind!r}")


def normal_form(kind: OperatorKind, params: PucciParams, r: float, u: float, uprime: float,
                p: float, abs_tol: float = 1e-12) -> float:
    """Solve ``F(r, m, u'/r) = -|u|^(p-1) u`` for ``m = u''``."""
    _check_radius(r)
    return normal_form_function(kind, params, p, abs_tol)(r, u, uprime)


def dual_operator(kind: OperatorKind) -> OperatorKind:
    """The operator ``G(M) = -F(-M)``; an involution."""
    if kind is PucciKind.PLUS:
        return PucciKind.MINUS
    if kind is PucciKind.MINUS:
        return PucciKind.PLUS
    if isinstance(kind, GeneralRadial):
        if kind._dual_of is not None:
            return kind._dual_of
        f = kind.evaluator
        dual = GeneralRadial(lambda r, m, l: -f(r, -m, -l), name=f"dual({kind.name})")
        dual._dual_of = kind
        return dual
    raise InvalidArgumentError(f"unknown operator kind {kind!r}")


def exponents(params: PucciParams) -> ExponentSet:
    ratio = params.lam / params.Lam
    nt_plus = ratio * (params.n - 1) + 1.0
    nt_minus = (params.n - 1) / ratio + 1.0
    p_plus = INF if nt_plus <= 2 else nt_plus / (nt_plus - 2.0)
    # n = 1 gives n_tilde_minus = 1 < 2; treated like the planar case
    p_minus = INF if nt_minus <= 2 else nt_minus / (nt_minus - 2.0)
    return ExponentSet(nt_plus, nt_minus, p_plus, p_minus)


def check_uniform_ellipticity(kind: OperatorKind, params: PucciParams, samples: int = 200,
                              seed: int = 0, scale: float = 10.0, rtol: float = 1e-9) -> bool:
    """Sample random increments and test the lam/Lam sandwich on each slot.

    Raises :class:`EllipticityViolationError` on the first failing sample.
    """
    rng = np.random.default_rng(seed)
    nm1 = params.n - 1
    for _ in range(samples):
        r = rng.uniform(0.1, scale)
        m, l = rng.uniform(-scale, scale, size=2)
        dm, dl = rng.uniform(0.0, scale, size=2)
        f0 = radial_operator(kind, params, r, m, l)
        inc_m = radial_operator(kind, params, r, m + dm, l) - f0
        inc_l = radial_operator(kind, params, r, m, l + dl) - f0
        slack_m = rtol * (abs(f0) + params.Lam * dm + 1.0)
        slack_l = rtol * (abs(f0) + params.Lam * nm1 * dl + 1.0)
        if not (params.lam * dm - slack_m <= inc_m <= params.Lam * dm + slack_m):
            raise EllipticityViolationError(f"m-increment out of bounds at r={r}, m={m}, l={l}")
        if not (params.lam * nm1 * dl - slack_l <= inc_l <= params.Lam * nm1 * dl + slack_l):
            raise EllipticityViolationError(f"l-increment out of bounds at r={r}, m={m}, l={l}")
    if abs(radial_operator(kind, params, 1.0, 0.0, 0.0)) > rtol:
        raise EllipticityViolationError("F(r, 0, 0) must vanish")
    return True
