"""Principal eigenpairs of truncated Jacobi operators and twisted eigenvectors.

The truncated operator ``A_M`` acts on ``(phi_{-M}, ..., phi_M)`` as
``(A_M phi)_j = phi_{j+1} - 2 phi_j + phi_{j-1} + a_j phi_j`` with
``phi_{+-(M+1)} = 0``. Its principal eigenvalue ``lambda_M`` increases to the
spectral bound ``lambda >= 1`` of the full-lattice operator.

The twisted problem
``e^{-mu} phi_{j+1} - 2 phi_j + e^{mu} phi_{j-1} + a_j phi_j = lambda(mu) phi_j``
is solved by seeding ``phi = 1`` to the right of the perturbation and
recursing leftward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels
from .dispersion import lambda_of_mu
from .errors import ConvergenceError, DomainError
from .medium import MediumProfile

RESIDUAL_TOL = 1e-10
POWER_MAX_M = 64
MAX_DOUBLING_M = 2**14
TAIL_TOL = 1e-6


class TruncatedJacobi:
    """Matrix-free handle for ``A_M`` (symmetric tridiagonal, unit off-diagonals)."""

    def __init__(self, medium: MediumProfile, M: int):
        if int(M) != M or M <= medium.N:
            raise DomainError(f"M = {M} must be an integer exceeding N = {medium.N}")
        self.medium = medium
        self.M = int(M)
        self.diag = medium.coefficients(-self.M, self.M) - 2.0

    @property
    def size(self) -> int:
        return self.diag.size

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += x[:-1]
        y[:-1] += x[1:]
        return y

    def column(self, j: int) -> np.ndarray:
        """Column of ``A_M`` for lattice index ``j``."""
        e = np.zeros(self.size)
        e[j + self.M] = 1.0
        return self.matvec(e)

    def to_dense(self) -> np.ndarray:
        n = self.size
        return np.diag(self.diag) + np.eye(n, k=1) + np.eye(n, k=-1)

    def gershgorin(self) -> tuple[float, float]:
        return float(self.diag.min() - 2.0), float(self.diag.max() + 2.0)


def build_truncated(medium: MediumProfile, M: int) -> TruncatedJacobi:
    return TruncatedJacobi(medium, M)


@dataclass(frozen=True)
class TruncatedEigenPair:
    M: int
    lambda_M: float
    phi: np.ndarray
    residual: float
    method: str
    iterations: int = 0

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def value(self, j: int) -> float:
        return float(self.phi[j + self.M]) if abs(j) <= self.M else 0.0


def perron_vector(diag: np.ndarray, lam: float) -> np.ndarray:
    """Positive eigenvector of tridiag(1, diag, 1) for its top eigenvalue ``lam``.

    Uses a twisted factorisation of ``lam I - A``: forward pivots are the
    ratios ``phi_{k+1} / phi_k`` and backward pivots the ratios
    ``phi_{k-1} / phi_k``. Both are positive for the top eigenvalue, so the
    vector is positive by construction. The two sweeps meet where the twist
    pivot is smallest.
    """
    n = diag.size
    if n == 1:
        return np.ones(1)
    c = lam - diag
    p = np.empty(n)
    s = np.empty(n)
    p[0] = c[0]
    for k in range(1, n):
        p[k] = c[k] - 1.0 / p[k - 1] if p[k - 1] != 0 else -np.inf
    s[-1] = c[-1]
    for k in range(n - 2, -1, -1):
        s[k] = c[k] - 1.0 / s[k + 1] if s[k + 1] != 0 else -np.inf
    gamma = c.copy()
    gamma[1:] -= 1.0 / p[:-1]
    gamma[:-1] -= 1.0 / s[1:]
    r = int(np.argmin(np.abs(gamma)))
    phi = np.empty(n)
    phi[r] = 1.0
    for k in range(r - 1, -1, -1):
        phi[k] = phi[k + 1] / p[k]
    for k in range(r + 1, n):
        phi[k] = phi[k - 1] / s[k]
    return phi / phi.max()


def _residual(op: TruncatedJacobi, lam: float, phi: np.ndarray) -> float:
    return float(np.max(np.abs(op.matvec(phi) - lam * phi)))


def _inverse_polish(op: TruncatedJacobi, lam: float, x: np.ndarray, steps: int = 3):
    """A few steps of shifted inverse iteration, keeping the Rayleigh quotient."""
    n = op.size
    shift = lam + 1e-12 * max(1.0, abs(lam))
    ab = np.zeros((3, n))
    ab[0, 1:] = 1.0
    ab[1] = op.diag - shift
    ab[2, :-1] = 1.0
    for _ in range(steps):
        y = solve_banded((1, 1), ab, x)
        x = y / y[np.argmax(np.abs(y))]
        lam = float(x @ op.matvec(x)) / float(x @ x)
    return lam, x


def sturm_eigenvalue(op: TruncatedJacobi) -> float:
    """Top eigenvalue of ``A_M`` by Sturm-sequence bisection."""
    lo, hi = op.gershgorin()
    return float(_kernels.sturm_largest(op.diag, lo, hi))


def principal_pair(medium: MediumProfile, M: int, method: str = "auto", maxiter: int = 500_000) -> TruncatedEigenPair:
    """Principal eigenvalue and positive sup-normalised eigenvector of ``A_M``.

    ``method="power"`` runs shifted power iteration on ``A_M + s I`` with
    ``s = 2 + max a_j``; ``"sturm"`` bisects on the Sturm count and builds the
    vector by a twisted factorisation. ``"auto"`` picks power iteration for
    ``M <= 64`` (where the spectral gap keeps it cheap) and bisection above.
    """
    op = TruncatedJacobi(medium, M)
    if method == "auto":
        method = "power" if op.M <= POWER_MAX_M else "sturm"
    iters = 0
    if method == "power":
        shift = 2.0 + medium.max_a
        x0 = np.ones(op.size)
        lam, phi, iters, res = _kernels.power_iterate(op.diag, shift, x0, 1e-15, RESIDUAL_TOL, maxiter)
        phi = np.asarray(phi)
        if res > RESIDUAL_TOL:
            # slow gap: finish with inverse iteration from the power iterate
            lam, phi = _inverse_polish(op, lam, phi)
    elif method == "sturm":
        lam = sturm_eigenvalue(op)
        phi = perron_vector(op.diag, lam)
        lam = float(phi @ op.matvec(phi)) / float(phi @ phi)
    else:
        raise DomainError(f"unknown eigensolver {method!r}")
    phi = phi / phi.max()
    res = _residual(op, lam, phi)
    if res > RESIDUAL_TOL:
        raise ConvergenceError(f"eigen-residual {res:.3e} exceeds {RESIDUAL_TOL}", data={"M": M, "lambda": lam})
    if not np.all(phi > 0):
        raise ConvergenceError("principal eigenvector is not strictly positive", data={"M": M, "lambda": lam})
    return TruncatedEigenPair(op.M, float(lam), phi, res, method, int(iters))


@dataclass(frozen=True)
class SpectralBound:
    value: float
    sequence: tuple  # ((M, lambda_M), ...)
    converged_M: int
    extrapolated: bool


def spectral_bound_details(medium: MediumProfile, tol: float = 1e-6, M0: int | None = None) -> SpectralBound:
    """``lambda = lim lambda_M`` by doubling ``M`` and Richardson extrapolation in ``(M+1)^{-2}``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    M = max(M0 or 8, medium.N + 1)
    seq = [(M, sturm_eigenvalue(TruncatedJacobi(medium, M)))]
    while True:
        M2 = 2 * M
        if M2 > MAX_DOUBLING_M:
            raise ConvergenceError(
                f"lambda_M did not settle to {tol} by M = {MAX_DOUBLING_M}", data={"sequence": tuple(seq)}
            )
        seq.append((M2, sturm_eigenvalue(TruncatedJacobi(medium, M2))))
        (m1, l1), (m2, l2) = seq[-2], seq[-1]
        if abs(l2 - l1) < tol:
            value, extrapolated = l2, False
            if len(seq) >= 3:
                l0 = seq[-3][1]
                ratio = (l2 - l1) / (l1 - l0) if l1 != l0 else 0.0
                # algebraic O(M^-2) approach gives ratio ~ 1/4; exponential approach is left alone
                if 0.15 < ratio < 0.35:
                    h1, h2 = (m1 + 1.0) ** -2, (m2 + 1.0) ** -2
                    value = max((h1 * l2 - h2 * l1) / (h1 - h2), l2)
                    extrapolated = True
            # the background a_j = 1 puts [-1, 1] in the spectrum, so lambda >= 1
            return SpectralBound(max(float(value), 1.0), tuple(seq), m2, extrapolated)
        M = M2


def spectral_bound(medium: MediumProfile, tol: float = 1e-6) -> float:
    """Spectral bound ``lambda`` of the full-lattice Jacobi operator (``>= 1``)."""
    return spectral_bound_details(medium, tol).value


# --- twisted eigenvectors ---------------------------------------------------

@dataclass(frozen=True)
class TwistedEigenvector:
    """Positive solution of the twisted problem on ``j_min .. anchor + 1``.

    Left of the perturbation ``phi_j = C1 + C2 e^{2 mu j}``; ``tail_class`` is
    ``"decays_to_zero"`` when ``C1`` vanishes to tolerance and
    ``"limit_positive"`` otherwise, with ``limit`` the value of ``C1``.
    """

    mu: float
    gamma: float
    j_min: int
    values: np.ndarray
    N: int
    C1: float
    C2: float
    tail_class: str
    limit: float
    fit_residual: float

    @property
    def j_max(self) -> int:
        return self.j_min + self.values.size - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    @property
    def phi(self) -> dict:
        return {int(j): float(v) for j, v in zip(self.sites, self.values)}

    def value(self, j):
        """``phi_j`` for any integer (array) ``j``; uses the tail formula left of the window."""
        j = np.asarray(j)
        out = np.ones(j.shape, dtype=float)
        inside = (j >= self.j_min) & (j <= self.j_max)
        out[inside] = self.values[j[inside] - self.j_min]
        left = j < self.j_min
        out[left] = self.C1 + self.C2 * np.exp(2.0 * self.mu * j[left])
        return out if out.ndim else float(out)

    def values_on(self, j_min: int, j_max: int) -> np.ndarray:
        return self.value(np.arange(j_min, j_max + 1))

    def sup(self) -> float:
        return float(max(self.values.max(), 1.0))

    def inf(self) -> float:
        lo = float(self.values.min())
        return min(lo, self.limit) if self.tail_class == "limit_positive" else 0.0

    def untwisted(self, j_min: int, j_max: int) -> np.ndarray:
        """``psi_j = e^{-mu j} phi_j``."""
        j = np.arange(j_min, j_max + 1)
        return np.exp(-self.mu * j) * self.value(j)


@dataclass(frozen=True)
class SignFailure:
    """Leftward recursion lost positivity at ``first_nonpositive`` (possibly beyond the window)."""

    mu: float
    gamma: float
    first_nonpositive: int
    within_window: bool
    j_min: int
    values: np.ndarray = field(repr=False)
    C1: float = math.nan
    C2: float = math.nan


def _recurse(medium, mu, gamma, window_left, anchor):
    n = anchor + 1 - window_left + 1
    vals = np.empty(n)
    vals[-1] = vals[-2] = 1.0
    em, ep = math.exp(-mu), math.exp(mu)
    a = medium.coefficients(window_left, anchor + 1)
    for i in range(n - 2, 0, -1):
        # row at site j = window_left + i solved for phi_{j-1}
        nxt = ((gamma + 2.0 - a[i]) * vals[i] - em * vals[i + 1]) / ep
        if not math.isfinite(nxt) or abs(nxt) > 1e300:
            raise ConvergenceError("twisted recursion overflowed", data={"j": window_left + i - 1})
        vals[i - 1] = nxt
    return vals


def _fit_tail(mu, j_min, vals, N):
    """Exact two-point solve for ``C1, C2`` next to the perturbation, checked on the rest of the tail."""
    j1, j2 = -N - 1, -N - 2
    if j2 < j_min:
        raise DomainError("window must extend at least two sites left of the perturbation")
    v1, v2 = vals[j1 - j_min], vals[j2 - j_min]
    e1, e2 = math.exp(2.0 * mu * j1), math.exp(2.0 * mu * j2)
    C2 = (v1 - v2) / (e1 - e2)
    C1 = v1 - C2 * e1
    tail_j = np.arange(j_min, j1 + 1)
    fit = C1 + C2 * np.exp(2.0 * mu * tail_j)
    scale = max(1.0, abs(C1), abs(C2))
    resid = float(np.max(np.abs(fit - vals[: tail_j.size]))) / scale
    return C1, C2, resid


def twisted_eigenvector(
    medium: MediumProfile,
    mu: float,
    window_left: int | None = None,
    anchor: int | None = None,
    tail_tol: float = TAIL_TOL,
):
    """Leftward construction of the twisted eigenvector for decay rate ``mu``.

    Returns a :class:`TwistedEigenvector` when every value (including the
    fitted tail beyond the window) stays positive, else a :class:`SignFailure`
    pointing at the first nonpositive index.
    """
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu!r}")
    N = medium.N
    window_left = -(N + 200) if window_left is None else int(window_left)
    anchor = N + 1 if anchor is None else int(anchor)
    if anchor <= N:
        raise DomainError(f"anchor {anchor} must exceed N = {N}")
    if window_left > -N - 2:
        raise DomainError(f"window_left {window_left} must be <= {-N - 2}")
    gamma = lambda_of_mu(mu)
    vals = _recurse(medium, mu, gamma, window_left, anchor)
    C1, C2, resid = _fit_tail(mu, window_left, vals, N)
    nonpos = np.nonzero(vals <= 0.0)[0]
    if nonpos.size:
        first = window_left + int(nonpos[-1])
        return SignFailure(mu, gamma, first, True, window_left, vals, C1, C2)
    decays = abs(C1) < tail_tol * max(1.0, abs(C2))
    if not decays and C1 < 0:
        # positive on the window but the tail crosses zero further left
        first = math.floor(math.log(-C1 / C2) / (2.0 * mu))
        first = min(first, window_left - 1)
        return SignFailure(mu, gamma, int(first), False, window_left, vals, C1, C2)
    tail_class = "decays_to_zero" if decays else "limit_positive"
    return TwistedEigenvector(
        mu, gamma, window_left, vals, N, C1, C2, tail_class, 0.0 if decays else C1, resid
    )


def twisted_residual(medium: MediumProfile, tv: TwistedEigenvector) -> np.ndarray:
    """Residual of the twisted equation at interior stored indices, scaled by the largest term."""
    v = tv.values
    a = medium.coefficients(tv.j_min, tv.j_max)[1:-1]
    em, ep = math.exp(-tv.mu), math.exp(tv.mu)
    lhs = em * v[2:] - 2.0 * v[1:-1] + ep * v[:-2] + a * v[1:-1]
    scale = np.maximum.reduce([em * np.abs(v[2:]), 2.0 * np.abs(v[1:-1]), ep * np.abs(v[:-2]), 1e-300 + 0 * v[1:-1]])
    return (lhs - tv.gamma * v[1:-1]) / scale


def untwisted_residual(medium: MediumProfile, tv: TwistedEigenvector, j_min: int, j_max: int) -> np.ndarray:
    """Relative residual of ``psi_{j+1} - 2 psi_j + psi_{j-1} + a_j psi_j = gamma psi_j``."""
    psi = tv.untwisted(j_min - 1, j_max + 1)
    a = medium.coefficients(j_min, j_max)
    lhs = psi[2:] - 2.0 * psi[1:-1] + psi[:-2] + a * psi[1:-1]
    scale = np.maximum(np.abs(psi[2:]) + 2.0 * np.abs(psi[1:-1]) + np.abs(psi[:-2]), 1e-300)
    return (lhs - tv.gamma * psi[1:-1]) / scale


def sign_changes(values) -> int:
    s = np.sign(np.asarray(values))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))
