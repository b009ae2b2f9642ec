"""Representation coefficients of the partial sums of a truncated linear process.

With the filter cut at ``lam``, the partial sum over ``k = 1..m`` (``m = [nt]``)
is the finite weighted innovation sum ``S = sum_j d_j xi_j`` with::

    d_j = sum_{k=1}^{m} a~_{k-j},        1 - lam <= j <= m.

Writing ``P`` for the prefix sums of ``a~`` and ``u = -j``:

* ``1 <= j <= m``:      ``d_j = P[min(m - j, lam)]``
* ``0 <= u <= lam - 1``: ``d_j = P[min(u + m, lam)] - P[u]``

so every coefficient costs O(1) after one cumulative pass.

Filters whose lag runs into the hundreds of millions (weak tapering at
large n) are never materialized. The coefficients are split into an exact
head ``u < U``, an exact tail of partial windows ``u > lam - m``, and a far
field ``U <= u <= lam - m`` of full windows ``sum_{i=u+1}^{u+m} i**-beta``.
The far field is handled by a closed-form window sum and Euler-Maclaurin
summation over ``u``; its coefficients are smooth and monotone there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._numerics import em_sum, power_window_sum, window_length
from .errors import ConfigurationError, DegenerateError, DomainError, EmptyWindowError
from .filters import as_filter, case_parts, check_beta

# Above this many full windows the far field switches to closed form.
EXACT_CAP = 1 << 22
# Length of the exactly computed head u < HEAD in the split layout.
HEAD = 1 << 20

_LD = np.longdouble


@dataclass(frozen=True)
class FarField:
    """Full windows ``u = lo..hi`` of a power filter, one window length per row."""

    beta: float
    lo: int
    hi: int
    windows: tuple

    @property
    def count(self) -> int:
        return max(0, self.hi - self.lo + 1)

    def window(self, row, u):
        return power_window_sum(self.beta, u, self.windows[row])

    def power_sum(self, row, p) -> float:
        if self.count == 0:
            return 0.0
        if self.beta == 0.0:
            return self.count * float(self.windows[row]) ** p
        return em_sum(lambda u: np.abs(self.window(row, u)) ** p, self.lo, self.hi)

    def cross_sum(self, r1, r2) -> float:
        if self.count == 0:
            return 0.0
        if self.beta == 0.0:
            return self.count * float(self.windows[r1]) * float(self.windows[r2])
        return em_sum(lambda u: self.window(r1, u) * self.window(r2, u), self.lo, self.hi)

    def max_abs(self, row) -> float:
        # window sums of a nonincreasing positive sequence are monotone in u
        if self.count == 0:
            return 0.0
        ends = self.window(row, np.array([float(self.lo), float(self.hi)]))
        return float(np.max(np.abs(ends)))


@dataclass(frozen=True)
class JointWeights:
    """Coefficients of several partial sums over a common innovation index.

    ``weights[r, k]`` multiplies innovation ``index[k]`` in ``S_n(t_r)``;
    ``far`` (possibly ``None``) covers the innovations that are not listed.
    """

    n: int
    lam: int
    m: tuple
    index: np.ndarray
    weights: np.ndarray  # long double, shape (rows, len(index))
    far: FarField | None

    def far_covariance(self) -> np.ndarray:
        rows = len(self.m)
        out = np.zeros((rows, rows))
        if self.far is None:
            return out
        for r in range(rows):
            for s in range(r, rows):
                out[r, s] = out[s, r] = self.far.cross_sum(r, s)
        return out

    def covariance(self) -> np.ndarray:
        """Exact ``Cov(S_n(t_r), S_n(t_s))`` for unit-variance innovations."""
        w = self.weights
        near = np.asarray(w @ w.T, dtype=np.float64)
        return near + self.far_covariance()


def _split_layout(filt, m_max) -> bool:
    return (filt.lam - m_max + 1 > EXACT_CAP
            and getattr(filt, "window_closed_form", None) is not None)


def joint_weights(filter, n: int, t_grid: Sequence[float], *, head: int = HEAD) -> JointWeights:
    """Coefficients d_{n,j,t} for every t in ``t_grid`` on one shared index."""
    filt = as_filter(filter)
    lam = filt.lam
    ms = tuple(window_length(n, t) for t in t_grid)
    if not ms:
        raise ConfigurationError("t_grid is empty")
    if min(ms) == 0:
        raise EmptyWindowError(f"[n t] = 0 for n={n}, t={min(t_grid)}")
    m_max = max(ms)
    j_pos = np.arange(1, m_max + 1)

    if not _split_layout(filt, m_max):
        P = np.cumsum(filt.coefficients(0, lam).astype(_LD))
        u = np.arange(lam - 1, -1, -1)  # j = 1 - lam .. 0 in ascending order
        index = np.concatenate([-u, j_pos])
        w = np.zeros((len(ms), index.size), dtype=_LD)
        for r, m in enumerate(ms):
            w[r, :lam] = P[np.minimum(u + m, lam)] - P[u]
            k = m - j_pos[:m]
            w[r, lam:lam + m] = P[np.minimum(k, lam)]
        return JointWeights(int(n), lam, ms, index, w, None)

    if head + m_max > lam - m_max:
        raise ConfigurationError("head window overlaps the tail; lower `head`")
    P = np.cumsum(filt.coefficients(0, head - 1 + m_max).astype(_LD))
    u_head = np.arange(head - 1, -1, -1)
    # partial windows u = lam-m_max+1 .. lam-1 use a local reverse cumsum of a_i
    base = lam - m_max + 2
    a_tail = filt.coefficients(base, lam).astype(_LD)
    R = np.concatenate([np.cumsum(a_tail[::-1])[::-1], np.zeros(1, dtype=_LD)])
    u_tail = np.arange(lam - 1, lam - m_max, -1)
    index = np.concatenate([-u_tail, -u_head, j_pos])
    w = np.zeros((len(ms), index.size), dtype=_LD)
    nt, nh = u_tail.size, u_head.size
    for r, m in enumerate(ms):
        stop = np.minimum(u_tail + m, lam)  # last included index
        w[r, :nt] = R[u_tail + 1 - base] - R[stop + 1 - base]
        w[r, nt:nt + nh] = P[u_head + m] - P[u_head]
        w[r, nt + nh:nt + nh + m] = P[m - j_pos[:m]]
    far = FarField(float(filt.spec.beta), head, lam - m_max, ms)
    return JointWeights(int(n), lam, ms, index, w, far)


class CoefficientProfile:
    """The coefficients d_{n,j,t}, j = 1 - lam .. m, of one partial sum.

    ``index``/``values`` list every coefficient that is stored explicitly; the
    remaining ones (if any) are described by ``far`` and enter every
    aggregate (``total``, ``power_sum``, ``max_abs``, ``v1_v2``).
    """

    def __init__(self, n, t, m, lam, index, values, far=None):
        self.n = n
        self.t = t
        self.m = m
        self.lam = lam
        self.index = index
        self._d = values  # long double
        self.far = far
        assert index.size == 0 or index.min() >= 1 - lam, "support starts at 1 - lam"

    @property
    def values(self) -> np.ndarray:
        return self._d.astype(np.float64)

    @property
    def is_complete(self) -> bool:
        return self.far is None or self.far.count == 0

    def __repr__(self):
        return (f"CoefficientProfile(n={self.n}, t={self.t}, m={self.m}, lam={self.lam}, "
                f"explicit={self.index.size}, far={0 if self.far is None else self.far.count})")

    def power_sum(self, p: float) -> float:
        """sum_j |d_j|**p over the full support."""
        near = float(np.sum(np.abs(self._d) ** p))
        return near + (self.far.power_sum(0, p) if self.far is not None else 0.0)

    def total(self) -> float:
        """sum_j d_j**2."""
        return self.power_sum(2)

    def v1_v2(self) -> tuple[float, float]:
        d2 = self._d**2
        v1 = float(np.sum(d2[self.index <= 0]))
        if self.far is not None:
            v1 += self.far.power_sum(0, 2)
        v2 = float(np.sum(d2[self.index > 0]))
        return v1, v2

    def max_abs(self, region: str = "all") -> float:
        """max |d_j| over j <= 0 ('B'), j > 0 ('A') or everywhere."""
        absd = np.abs(self._d)
        if region == "A":
            sel = absd[self.index > 0]
            return float(sel.max()) if sel.size else 0.0
        sel = absd[self.index <= 0] if region == "B" else absd
        best = float(sel.max()) if sel.size else 0.0
        if self.far is not None:
            best = max(best, self.far.max_abs(0))
        return best


def d_coefficients(filter, n: int, t: float, *, head: int = HEAD) -> CoefficientProfile:
    """Coefficient profile of S_n(t) in O(m + lam) (or O(m + head) for huge lam)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    jw = joint_weights(filter, n, [t], head=head)
    return CoefficientProfile(int(n), float(t), jw.m[0], jw.lam, jw.index, jw.weights[0], jw.far)


def exact_variance(profile: CoefficientProfile, sigma2: float = 1.0) -> float:
    if sigma2 < 0:
        raise DomainError("sigma2 must be nonnegative")
    return sigma2 * profile.total()


def v1_v2(profile: CoefficientProfile) -> tuple[float, float]:
    return profile.v1_v2()


def max_window_sums(filter, n: int, t: float) -> tuple[float, float]:
    """(I1, I2): the largest coefficient before and inside the summation window."""
    prof = d_coefficients(filter, n, t)
    return prof.max_abs("B"), prof.max_abs("A")


def lyapunov_fraction(profile_t: CoefficientProfile, profile_1: CoefficientProfile,
                      delta: float, moment_ratio: float) -> float:
    """sum_j |d_{n,j,t}|**(2+delta) / (sum_j d_{n,j,1}**2)**(1+delta/2) times the moment ratio."""
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    denom = profile_1.total()
    if not denom > 0:
        raise DegenerateError("the t = 1 profile has zero variance")
    if moment_ratio == 0:
        return 0.0
    p = 2.0 + delta
    return profile_t.power_sum(p) / denom ** (p / 2.0) * moment_ratio


def delta_for_case(case: int, beta: float) -> float:
    """Moment order excess usable in the Lyapunov condition for case ``case``.

    Negative dependence (j = 3, 6, 9) limits it to min(1, (3 - 2 beta) / (2 (beta - 1)));
    every other case takes delta = 1.
    """
    _, dependence = case_parts(case)
    check_beta(dependence, beta)
    if dependence == "ND":
        return min(1.0, (3.0 - 2.0 * beta) / (2.0 * (beta - 1.0)))
    return 1.0
