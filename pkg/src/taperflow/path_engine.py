"""Sample paths and partial sums of the truncated linear process.

``X_k = sum_{i=0}^{lam} a~_i xi_{k-i}`` for ``k = 1..M`` needs the innovations
``xi_{1-lam} .. xi_M``; the ``valid`` part of their convolution with the
filter is exactly ``X_1..X_M``. A circular (FFT) convolution of length
``L >= M + lam`` leaves that part free of wrap-around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import fft as sfft

from ._numerics import window_length
from .errors import CapacityError, ConfigurationError, DomainError
from .filters import as_filter
from .innovations import InnovationModel

FFT_THRESHOLD = 4096
# Largest number of innovations drawn for one path.
MAX_INNOVATIONS = 1 << 24


def replication_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for (seed, key...) — identical in serial and parallel runs."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key)))


@dataclass
class PathConfig:
    filter: object
    innovation: InnovationModel
    n: int
    t_grid: Sequence[float]
    seed: int = 0
    fft_threshold: int = FFT_THRESHOLD
    max_innovations: int = MAX_INNOVATIONS
    _filt: object = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError("n must be >= 1")
        t = np.asarray(self.t_grid, dtype=np.float64)
        if t.ndim != 1 or t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ConfigurationError("t_grid must be strictly increasing and positive")
        self._filt = as_filter(self.filter)

    @property
    def lam(self) -> int:
        return self._filt.lam

    @property
    def length(self) -> int:
        """M = [n max(t_grid)]."""
        return window_length(self.n, max(self.t_grid))

    def coefficients(self) -> np.ndarray:
        if self.lam + 1 > self.max_innovations:
            raise CapacityError(f"filter length {self.lam + 1} exceeds the cap {self.max_innovations}")
        return self._filt.coefficients()


def convolve_valid(x: np.ndarray, a: np.ndarray, *, method: str = "auto",
                   fft_threshold: int = FFT_THRESHOLD) -> np.ndarray:
    """``np.convolve(x, a, 'valid')`` along the last axis, directly or by real FFT."""
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    total = x.shape[-1]
    lam = a.size - 1
    if total < a.size:
        raise DomainError("fewer innovations than filter coefficients")
    if method == "auto":
        method = "fft" if total > fft_threshold else "direct"
    if method == "direct":
        if x.ndim == 1:
            return np.convolve(x, a, mode="valid")
        return np.stack([np.convolve(row, a, mode="valid") for row in x.reshape(-1, total)]
                        ).reshape(*x.shape[:-1], total - lam)
    if method != "fft":
        raise ConfigurationError(f"unknown convolution method {method!r}")
    size = 1 << max(0, math.ceil(math.log2(total)))
    spec = sfft.rfft(x, n=size, axis=-1) * sfft.rfft(a, n=size)
    return sfft.irfft(spec, n=size, axis=-1)[..., lam:total]


def draw_innovations(config: PathConfig, rng: np.random.Generator, size=None) -> np.ndarray:
    """Innovations xi_{1-lam} .. xi_M (shape ``size + (M + lam,)``)."""
    count = config.length + config.lam
    if count > config.max_innovations:
        raise CapacityError(f"{count} innovations exceed the cap {config.max_innovations}")
    shape = (count,) if size is None else tuple(np.atleast_1d(size)) + (count,)
    return config.innovation.sample(rng, shape, config.n)


def generate_path(config: PathConfig, rng: np.random.Generator | None = None, *,
                  method: str = "auto") -> np.ndarray:
    """One path X_1..X_M; ``rng`` defaults to a stream seeded by ``config.seed``."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    xi = draw_innovations(config, rng)
    return convolve_valid(xi, config.coefficients(), method=method,
                          fft_threshold=config.fft_threshold)


def partial_sums(path: np.ndarray, n: int, t_grid: Sequence[float]) -> np.ndarray:
    """S_n(t) = X_1 + ... + X_[nt] for each t (last axis of ``path`` is time)."""
    path = np.asarray(path, dtype=np.float64)
    ms = [window_length(n, t) for t in t_grid]
    if max(ms, default=0) > path.shape[-1]:
        raise DomainError("path is shorter than [n max(t)]")
    cs = np.cumsum(path, axis=-1)
    zero = np.zeros(path.shape[:-1])
    return np.stack([cs[..., m - 1] if m > 0 else zero for m in ms], axis=-1)


def z_values(S, A2: float):
    if not A2 > 0:
        raise DomainError("A2 must be positive")
    return np.asarray(S, dtype=np.float64) / math.sqrt(A2)


class ReducedGaussianSums:
    """Exact-in-law draws of (S_n(t))_t for Gaussian innovations and a very long filter.

    Coefficients that are stored explicitly multiply explicitly drawn
    innovations; the far field of full windows, a Gaussian vector with the
    exactly summed covariance, is drawn as one aggregate.
    """

    def __init__(self, filter, n: int, t_grid: Sequence[float], *, head: int = 1 << 17):
        from .coefficients import joint_weights

        self.jw = joint_weights(filter, n, t_grid, head=head)
        self.weights = np.ascontiguousarray(self.jw.weights.astype(np.float64).T)
        far = self.jw.far_covariance()
        vals, vecs = np.linalg.eigh(far)
        self.far_factor = vecs * np.sqrt(np.clip(vals, 0.0, None))

    @property
    def explicit(self) -> int:
        return self.weights.shape[0]

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        near = rng.standard_normal(self.explicit) @ self.weights
        return near + self.far_factor @ rng.standard_normal(self.far_factor.shape[1])
