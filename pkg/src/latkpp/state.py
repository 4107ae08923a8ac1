"""Finite-window lattice snapshots."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

POLICIES = ("dirichlet_stationary_left_zero_right", "clamp_zero_both", "dirichlet_constant")


@dataclass
class LatticeState:
    """Values ``u_j`` for ``j = j_min .. j_min + len(values) - 1`` at time ``t``.

    Sites outside the window are held at ghost values chosen by
    ``boundary_policy``:

    ``dirichlet_stationary_left_zero_right``
        left ghost ``left_ghost`` (the stationary state there), right ghost 0;
    ``clamp_zero_both``
        both ghosts 0;
    ``dirichlet_constant``
        both ghosts given explicitly by ``left_ghost`` / ``right_ghost``.
    """

    j_min: int
    values: np.ndarray
    t: float = 0.0
    boundary_policy: str = "clamp_zero_both"
    left_ghost: float = 0.0
    right_ghost: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.boundary_policy not in POLICIES:
            raise DomainError(f"unknown boundary policy {self.boundary_policy!r}")
        self.values = np.array(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size == 0:
            raise DomainError("values must be a nonempty 1-d array")
        if self.boundary_policy == "clamp_zero_both":
            self.left_ghost = 0.0
            self.right_ghost = 0.0
        elif self.boundary_policy == "dirichlet_stationary_left_zero_right":
            self.right_ghost = 0.0

    @property
    def j_max(self) -> int:
        return self.j_min + self.values.size - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    def __len__(self):
        return self.values.size

    def value(self, j: int) -> float:
        if j < self.j_min:
            return self.left_ghost
        if j > self.j_max:
            return self.right_ghost
        return float(self.values[j - self.j_min])

    def copy(self) -> "LatticeState":
        return replace(self, values=self.values.copy(), meta=dict(self.meta))

    def extend_right(self, extra: int) -> "LatticeState":
        """Append ``extra`` sites filled with the right ghost value (in place)."""
        if extra > 0:
            self.values = np.concatenate([self.values, np.full(extra, self.right_ghost)])
        return self

    @classmethod
    def from_function(cls, fn, j_min, j_max, t=0.0, **kw):
        sites = np.arange(j_min, j_max + 1)
        return cls(j_min, np.array([fn(int(j)) for j in sites], dtype=float), t, **kw)


@dataclass
class Trajectory:
    """Snapshots ``values[k, i] = u_{j_min + i}(times[k])`` on a common window.

    Windows that grew during a run are padded on the right with the right
    ghost value.
    """

    j_min: int
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_min + self.values.shape[1])

    @property
    def stride(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def at(self, k: int) -> np.ndarray:
        return self.values[k]

    def index_of_time(self, t: float, tol: float = 1e-9) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > tol:
            raise DomainError(f"time {t} is not a sample time")
        return k

    @classmethod
    def from_states(cls, states, meta=None) -> "Trajectory":
        j_min = min(s.j_min for s in states)
        j_max = max(s.j_max for s in states)
        vals = np.empty((len(states), j_max - j_min + 1))
        for k, s in enumerate(states):
            vals[k, : s.j_min - j_min] = s.left_ghost
            vals[k, s.j_min - j_min : s.j_max - j_min + 1] = s.values
            vals[k, s.j_max - j_min + 1 :] = s.right_ghost
        return cls(j_min, np.array([s.t for s in states]), vals, dict(meta or {}))
