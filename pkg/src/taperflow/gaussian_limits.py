"""Gaussian limit processes on a grid and the tempered FBM kernels.

Grid samplers factor the covariance matrix with a pivoted Cholesky
decomposition that stops at numerical rank, so degenerate kernels such as
``K(s, t) = s t`` (the random line ``B(1) t``) are sampled exactly.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy import special

from ._numerics import integrate, integrate_log
from .errors import DomainError, NumericalError

RANK_TOL = 1e-10


def fbm_covariance(H: float) -> Callable:
    if not 0 < H < 1:
        raise DomainError(f"H must lie in (0, 1), got {H}")

    def K(s, t):
        s = np.asarray(s, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        return 0.5 * (np.abs(t) ** (2 * H) + np.abs(s) ** (2 * H) - np.abs(t - s) ** (2 * H))

    return K


def pivoted_cholesky(C: np.ndarray, tol: float = RANK_TOL):
    """L with C[p][:, p] ~= L L^T, stopping once every remaining pivot <= tol * trace.

    Returns ``(L, perm)`` with ``L`` of shape (N, rank) in the original order.
    Raises ``NumericalError`` if a pivot is clearly negative.
    """
    C = np.array(C, dtype=np.float64)
    N = C.shape[0]
    trace = float(np.trace(C))
    if trace <= 0:
        return np.zeros((N, 0)), np.arange(N)
    floor = tol * trace
    d = np.diag(C).copy()
    L = np.zeros((N, N))
    perm = np.arange(N)
    rank = 0
    for k in range(N):
        j = k + int(np.argmax(d[perm[k:]]))
        perm[[k, j]] = perm[[j, k]]
        p = perm[k]
        if d[p] <= floor:
            break
        piv = math.sqrt(d[p])
        L[p, k] = piv
        rest = perm[k + 1:]
        L[rest, k] = (C[rest, p] - L[rest, :k] @ L[p, :k]) / piv
        d[rest] -= L[rest, k] ** 2
        rank += 1
    if np.min(d) < -1e3 * floor:
        raise NumericalError("covariance is not positive semidefinite",
                             {"min_residual_pivot": float(np.min(d)), "trace": trace})
    return L[:, :rank], perm


def _jittered_cholesky(C):
    trace = float(np.trace(C))
    eye = np.eye(C.shape[0])
    jitter = 1e-12
    while jitter <= 1e-6:
        try:
            return np.linalg.cholesky(C + jitter * trace * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= 10
    w = np.linalg.eigvalsh(C)
    raise NumericalError("covariance is indefinite beyond the jitter budget",
                         {"min_eigenvalue": float(w[0]), "trace": trace})


class GaussianGridProcess:
    """Centred Gaussian vector (U(t_1), ..., U(t_N)) with covariance ``kernel``."""

    def __init__(self, grid: Sequence[float], kernel: Callable):
        g = np.asarray(grid, dtype=np.float64)
        if g.ndim != 1 or g.size == 0 or np.any(np.diff(g) <= 0) or np.any(g <= 0):
            raise DomainError("grid must be strictly increasing and positive")
        self.grid = g
        C = np.array([[kernel(s, t) for t in g] for s in g], dtype=np.float64)
        if not np.allclose(C, C.T, rtol=1e-12, atol=1e-14 * abs(np.trace(C))):
            raise NumericalError("kernel matrix is not symmetric", {})
        self.cov = 0.5 * (C + C.T)
        self.jitter = 0.0
        try:
            self.factor, _ = pivoted_cholesky(self.cov)
        except NumericalError:
            self.factor, self.jitter = _jittered_cholesky(self.cov)

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    def reconstruction_error(self) -> float:
        return float(np.max(np.abs(self.factor @ self.factor.T - self.cov)))

    def sample(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        z = rng.standard_normal((size, self.rank))
        return z @ self.factor.T


def sample_gaussian(grid, kernel, rng, size: int = 1) -> np.ndarray:
    return GaussianGridProcess(grid, kernel).sample(rng, size)


# --- tempered kernels ---------------------------------------------------------

def _tempered_difference(y, t, a, lam):
    """(t + y)**a e**(-lam (t+y)) - y**a e**(-lam y) for y > 0, without cancellation."""
    return y**a * np.exp(-lam * y) * np.expm1(a * np.log1p(t / y) - lam * t)


def _moving_average(a, lam, t, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = (x < t) & (x >= 0)
    out[inside] = (t - x[inside]) ** a * np.exp(-lam * (t - x[inside]))
    before = x < 0
    out[before] = _tempered_difference(-x[before], t, a, lam)
    return out


def tfbm_kernel(alpha: float, lam: float, t: float) -> Callable:
    """g(x) = (t-x)_+^-alpha e^{-lam (t-x)_+} - (-x)_+^-alpha e^{-lam (-x)_+}, with 0**a := 0."""
    if not alpha < 0.5:
        raise DomainError("alpha must be < 1/2")
    if lam < 0:
        raise DomainError("lambda must be nonnegative")

    def g(x):
        if t <= 0:
            return np.zeros_like(np.asarray(x, dtype=np.float64))
        return _moving_average(-alpha, lam, t, x)

    return g


def tfbm2_kernel(H: float, lam: float, t: float, prefactor: str = "lambda") -> Callable:
    """h(t; x) of the second-kind tempered FBM.

    ``prefactor='lambda'`` multiplies the integral term by lambda (the variant
    that reduces to FBM at lambda = 0); ``'bare'`` keeps the integral alone.
    """
    if not 0 < H < 1:
        raise DomainError("H must lie in (0, 1)")
    if lam < 0:
        raise DomainError("lambda must be nonnegative")
    if prefactor not in ("lambda", "bare"):
        raise DomainError("prefactor must be 'lambda' or 'bare'")
    a = H - 0.5

    def integral_term(x):
        # int_0^t (s-x)_+^a e^{-lam (s-x)_+} ds = int_{max(-x,0)}^{t-x} w^a e^{-lam w} dw
        lo = np.maximum(-x, 0.0)
        hi = np.maximum(t - x, 0.0)
        if lam == 0:
            return (hi ** (a + 1) - lo ** (a + 1)) / (a + 1)
        scale = special.gamma(a + 1) / lam ** (a + 1)
        return scale * (special.gammainc(a + 1, lam * hi) - special.gammainc(a + 1, lam * lo))

    def h(x):
        x = np.asarray(x, dtype=np.float64)
        if t <= 0:
            return np.zeros_like(x)
        out = _moving_average(a, lam, t, x)
        weight = lam if prefactor == "lambda" else 1.0
        if weight != 0:
            out = out + weight * integral_term(x)
        return out

    return h


def kernel_variance(kernel: Callable, t: float, power: float, *, epsrel: float = 1e-11) -> float:
    """int k(x)**2 dx over (-inf, t] for a moving-average kernel of ``t``.

    ``power`` is the exponent of the local singularity of ``k**2`` at ``x = t``
    and ``x = 0`` (``-2 alpha`` for g, ``2H - 1`` for h).
    """
    if t <= 0:
        return 0.0
    f = lambda x: float(kernel(np.array([x]))[0]) ** 2  # noqa: E731
    sing = power if power < 0 else None
    inside = integrate(f, 0.0, t, left_power=sing, right_power=sing, epsrel=epsrel)
    near = integrate(lambda u: f(-u), 0.0, t, left_power=sing, epsrel=epsrel)
    far = integrate_log(lambda u: f(-u), t, math.inf, epsrel=epsrel)
    return inside + near + far
