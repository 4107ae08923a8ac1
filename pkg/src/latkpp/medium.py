"""Locally perturbed media and the KPP nonlinearity."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class MediumProfile:
    """Coefficients ``a_j = f_j(0)``: arbitrary positive values for ``|j| <= N``, 1 elsewhere."""

    N: int
    perturbation: Mapping[int, float] = field(default_factory=dict)
    background: float = 1.0

    def __post_init__(self):
        if self.N < 0 or int(self.N) != self.N:
            raise DomainError(f"perturbation radius must be a nonnegative integer, got {self.N!r}")
        if self.background != 1.0:
            raise DomainError("only background 1 is supported")
        full = {}
        for j in range(-self.N, self.N + 1):
            full[j] = float(self.perturbation.get(j, 1.0))
        extra = set(self.perturbation) - set(full)
        if extra:
            raise DomainError(f"perturbation sites {sorted(extra)} lie outside |j| <= {self.N}")
        bad = {j: v for j, v in full.items() if not v > 0}
        if bad:
            raise DomainError(f"coefficients must be positive (f_j(0) > 0), got {bad}")
        object.__setattr__(self, "perturbation", full)

    @classmethod
    def homogeneous(cls):
        return cls(0, {0: 1.0})

    @classmethod
    def single_site(cls, a0: float):
        return cls(0, {0: float(a0)})

    @classmethod
    def from_values(cls, values):
        """Medium from ``2N + 1`` values listed for ``j = -N..N``."""
        values = list(values)
        if len(values) % 2 != 1:
            raise DomainError("need an odd number of values centred at j = 0")
        n = len(values) // 2
        return cls(n, {j - n: float(v) for j, v in enumerate(values)})

    def a(self, j: int) -> float:
        return self.perturbation.get(int(j), 1.0)

    def coefficients(self, j_min: int, j_max: int) -> np.ndarray:
        """Array of ``a_j`` for ``j = j_min..j_max`` inclusive."""
        out = np.ones(j_max - j_min + 1)
        for j, v in self.perturbation.items():
            if j_min <= j <= j_max:
                out[j - j_min] = v
        return out

    @property
    def max_a(self) -> float:
        return max(max(self.perturbation.values()), 1.0)

    @property
    def min_a(self) -> float:
        return min(min(self.perturbation.values()), 1.0)

    @property
    def is_homogeneous(self) -> bool:
        return all(v == 1.0 for v in self.perturbation.values())

    def to_dict(self):
        return {"N": self.N, "perturbation": {str(j): v for j, v in sorted(self.perturbation.items())}}


@dataclass(frozen=True)
class NonlinearityModel:
    """Logistic nonlinearity ``f_j(u) = a_j - u``.

    ``L`` bounds ``|f_j'|`` from above and ``L0`` is a level beyond which every
    ``f_j`` is negative. With ``f' = -1`` the bound ``L = 1`` is attained, which
    is all the sub-solution estimate needs.
    """

    kind: str = "logistic_with_medium"
    L: float = 1.0
    L0: float | None = None

    def __post_init__(self):
        if self.kind != "logistic_with_medium":
            raise DomainError(f"unsupported nonlinearity {self.kind!r}")
        if not self.L >= 1.0:
            raise DomainError(f"L must bound |f'| = 1, got {self.L!r}")

    # the RK kernel evaluates (a - react * u) * u
    react = 1.0

    def f(self, a_j, u):
        return a_j - u

    def fprime(self, a_j, u):
        return -np.ones_like(np.asarray(u, dtype=float)) if np.ndim(u) else -1.0

    def f_at(self, medium: MediumProfile, j: int, u):
        return self.f(medium.a(j), u)

    def level(self, medium: MediumProfile) -> float:
        """``L0`` for this medium (defaults to ``max a_j``)."""
        return medium.max_a if self.L0 is None else self.L0

    def validate(self, medium: MediumProfile):
        """Check the KPP hypotheses against a medium; raises :class:`DomainError`."""
        L0 = self.level(medium)
        if L0 < medium.max_a:
            raise DomainError(f"L0 = {L0} is below max a_j = {medium.max_a}; f_j(u) >= 0 just above L0")
        if not -self.L <= -1.0 < 0.0:
            raise DomainError("f' must lie in [-L, 0)")
        return True

    def to_dict(self):
        return {"kind": self.kind, "L": self.L, "L0": self.L0}
