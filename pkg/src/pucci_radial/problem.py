"""Problem description: operator, exponent, domain and sign pattern."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

from .exceptions import InvalidArgumentError
from .operators import OperatorKind, PucciParams, exponents

__all__ = ["Annulus", "Ball", "Sign", "ProblemSpec"]


@dataclass(frozen=True)
class Annulus:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not 0 < self.a < self.b:
            raise InvalidArgumentError(f"annulus needs 0 < a < b, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class Ball:
    R: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise InvalidArgumentError(f"ball radius must be positive, got {self.R}")


class Sign(enum.IntEnum):
    POSITIVE = 1
    NEGATIVE = -1

    @classmethod
    def parse(cls, value) -> "Sign":
        if isinstance(value, Sign):
            return value
        table = {"+": cls.POSITIVE, "positive": cls.POSITIVE, "1": cls.POSITIVE, "+1": cls.POSITIVE,
                 "-": cls.NEGATIVE, "negative": cls.NEGATIVE, "-1": cls.NEGATIVE}
        key = str(value).strip().lower()
        if key not in table:
            raise InvalidArgumentError(f"unknown sign {value!r}")
        return table[key]


@dataclass(frozen=True)
class ProblemSpec:
    """``-F(D^2 u) = |u|^(p-1) u`` on ``domain`` with ``u = 0`` on the boundary.

    ``sign`` is the sign of u on the first nodal region (next to the inner
    radius or the centre); ``nodal_k`` counts nodal regions. ``domain`` may be
    left out for bare shooting.
    """

    kind: OperatorKind
    params: PucciParams
    p: float
    domain: Optional[Union[Annulus, Ball]] = None
    sign: Sign = Sign.POSITIVE
    nodal_k: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p > 1):
            raise InvalidArgumentError(f"exponent must satisfy p > 1, got {self.p}")
        if int(self.nodal_k) != self.nodal_k or self.nodal_k < 1:
            raise InvalidArgumentError(f"nodal_k must be a positive integer, got {self.nodal_k}")
        object.__setattr__(self, "sign", Sign.parse(self.sign))

    @property
    def exponents(self):
        return exponents(self.params)
