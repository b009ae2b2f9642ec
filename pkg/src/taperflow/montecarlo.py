"""Seeded Monte Carlo experiments and exact convergence tables.

Every replication owns the random stream ``SeedSequence(seed, spawn_key=(n_index, rep))``
and replications are processed in fixed-size chunks, so results do not
depend on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from ._numerics import window_length
from .coefficients import d_coefficients, delta_for_case, joint_weights, lyapunov_fraction
from .errors import CapacityError, ConfigurationError, DegenerateError, DomainError, EmptyWindowError
from .filters import FilterSpec, build_filter, classify_innovation_taper
from .innovations import InnovationModel
from .limit_theory import limit_law
from .path_engine import (FFT_THRESHOLD, MAX_INNOVATIONS, PathConfig, ReducedGaussianSums,
                          convolve_valid, draw_innovations, partial_sums, replication_rng)

CHUNK = 32
NORMALIZERS = ("asymptotic", "exact")
ROUTES = ("auto", "path", "reduced")
MIN_NORMALITY_REPS = 100


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("TAPERFLOW_THREADS", "1") or 1)
    return max(1, int(threads))


@dataclass(frozen=True)
class ExperimentConfig:
    case: int
    beta: float = 0.0
    gamma1: float | None = None
    c: float = 1.0
    innovation: InnovationModel = field(default_factory=InnovationModel.gaussian)
    n_list: tuple = (1000,)
    t_grid: tuple = (1.0,)
    reps: int = 4000
    seed: int = 0
    cov_pairs: tuple = ((0.5, 1.0),)
    normalizer: str = "asymptotic"
    route: str = "auto"

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("n_list", tuple(int(n) for n in self.n_list))
        set_("t_grid", tuple(float(t) for t in self.t_grid))
        set_("cov_pairs", tuple((float(s), float(t)) for s, t in self.cov_pairs))
        if not isinstance(self.reps, (int, np.integer)) or self.reps < 1:
            raise ConfigurationError("reps must be a positive integer")
        if not self.n_list or min(self.n_list) < 1:
            raise ConfigurationError("n_list must hold positive sizes")
        if not self.t_grid or min(self.t_grid) <= 0:
            raise ConfigurationError("t_grid must hold positive times")
        if any(min(p) <= 0 for p in self.cov_pairs):
            raise ConfigurationError("covariance pairs need positive times")
        if self.normalizer not in NORMALIZERS:
            raise ConfigurationError(f"normalizer must be one of {NORMALIZERS}")
        if self.route not in ROUTES:
            raise ConfigurationError(f"route must be one of {ROUTES}")
        law = limit_law(self.case, self.beta, self.gamma1, self.c)
        set_("gamma1", law.gamma1)
        set_("c", law.c)
        FilterSpec.for_case(self.case, self.beta, self.gamma1, self.c)
        inn = self.innovation
        if inn.kind == "tapered-pareto":
            try:
                kind = classify_innovation_taper(inn.gamma, inn.alpha)
            except DomainError as exc:
                raise ConfigurationError(str(exc)) from None
            if kind != "hard":
                raise ConfigurationError(
                    f"{kind} tapering (gamma={inn.gamma}, 1/alpha={1 / inn.alpha:.6g}) is out of "
                    "scope: only hard tapering (gamma < 1/alpha) has a Gaussian limit here")

    @property
    def law(self):
        return limit_law(self.case, self.beta, self.gamma1, self.c)

    @property
    def times(self) -> tuple:
        """Every time at which S_n(t) is needed: the grid, t = 1 and the covariance pairs."""
        ts = set(self.t_grid) | {1.0}
        for s, t in self.cov_pairs:
            ts |= {s, t}
        return tuple(sorted(ts))


# --- statistics ---------------------------------------------------------------

@dataclass(frozen=True)
class NormalityDiagnostics:
    ks: float
    skew: float
    exkurt: float
    size: int

    @property
    def skew_se(self) -> float:
        return math.sqrt(6.0 / self.size)

    @property
    def exkurt_se(self) -> float:
        return math.sqrt(24.0 / self.size)

    def __iter__(self):
        return iter((self.ks, self.skew, self.exkurt))


def normality_diagnostics(samples, *, mean: float | None = None,
                          sd: float | None = None) -> NormalityDiagnostics:
    """KS distance to N(0,1), skewness and excess kurtosis (moment estimators).

    Samples are standardized by their empirical mean and sd unless exact
    values are given; skewness and kurtosis are scale free either way.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < MIN_NORMALITY_REPS:
        raise DomainError(f"normality diagnostics need at least {MIN_NORMALITY_REPS} samples")
    xc = x - x.mean()
    m2 = float(np.mean(xc**2))
    if not m2 > 0:
        raise DegenerateError("samples have zero variance")
    skew = float(np.mean(xc**3)) / m2**1.5
    exkurt = float(np.mean(xc**4)) / m2**2 - 3.0
    loc = x.mean() if mean is None else mean
    scale = math.sqrt(m2) if sd is None else sd
    ks = float(stats.kstest((x - loc) / scale, "norm").statistic)
    return NormalityDiagnostics(ks, skew, exkurt, int(x.size))


def variance_with_se(x):
    x = np.asarray(x, dtype=np.float64)
    xc = x - x.mean()
    s2 = float(np.mean(xc**2))
    m4 = float(np.mean(xc**4))
    var = s2 * x.size / (x.size - 1)
    return var, math.sqrt(max(m4 - s2 * s2, 0.0) / x.size)


def covariance_with_se(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    prod = (x - x.mean()) * (y - y.mean())
    cov = float(prod.sum()) / (x.size - 1)
    return cov, float(prod.std(ddof=1)) / math.sqrt(x.size)


# --- report -------------------------------------------------------------------

CSV_COLUMNS = ("case", "n", "t", "var_exact", "var_ratio", "W", "ks", "skew", "exkurt",
               "lyapunov", "seed")


@dataclass
class ExperimentReport:
    config: dict
    variance: list = field(default_factory=list)
    covariance: list = field(default_factory=list)
    normality: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(config=d["config"], variance=list(d.get("variance", [])),
                   covariance=list(d.get("covariance", [])), normality=list(d.get("normality", [])))

    def csv_rows(self):
        by_n = {row["n"]: row for row in self.normality}
        for row in self.variance:
            nrm = by_n.get(row["n"], {}) if row["t"] == 1.0 else {}
            yield {
                "case": self.config["case"], "n": row["n"], "t": row["t"],
                "var_exact": row["var_exact"], "var_ratio": row["var_exact"] / row["W"],
                "W": row["W"], "ks": nrm.get("ks"), "skew": nrm.get("skew"),
                "exkurt": nrm.get("exkurt"), "lyapunov": nrm.get("lyapunov"),
                "seed": self.config["seed"],
            }

    def row(self, n, t):
        for r in self.variance:
            if r["n"] == n and r["t"] == t:
                return r
        raise KeyError((n, t))


def _simulate_chunk(route, source, config, n, n_index, times, reps):
    out = np.empty((len(reps), len(times)))
    if route == "reduced":
        for k, rep in enumerate(reps):
            out[k] = source.sample(replication_rng(config.seed, n_index, rep))
        return out
    pc, a = source
    xi = np.stack([draw_innovations(pc, replication_rng(config.seed, n_index, rep)) for rep in reps])
    paths = convolve_valid(xi, a, fft_threshold=pc.fft_threshold)
    return partial_sums(paths, n, times)


def simulate_sums(config: ExperimentConfig, n: int, n_index: int, *, threads=None,
                  fft_threshold: int = FFT_THRESHOLD) -> tuple[np.ndarray, str]:
    """R x T array of S_n(t) over ``config.times`` and the route used."""
    times = config.times
    filt = build_filter(config.law.filter_spec, n)
    M = window_length(n, max(times))
    if window_length(n, min(times)) == 0:
        raise EmptyWindowError(f"[n t] = 0 for n={n}, t={min(times)}")
    too_long = M + filt.lam > MAX_INNOVATIONS
    route = config.route
    if route == "auto":
        route = "reduced" if too_long else "path"
    if route == "reduced" and not config.innovation.is_gaussian:
        raise ConfigurationError("the reduced route is exact only for Gaussian innovations")
    if route == "path" and too_long:
        raise CapacityError(f"M + lam = {M + filt.lam} innovations exceed the cap; "
                            "use Gaussian innovations for the reduced route")
    if route == "reduced":
        source = ReducedGaussianSums(filt, n, times)
    else:
        pc = PathConfig(filt, config.innovation, n, times, config.seed, fft_threshold)
        source = (pc, pc.coefficients())
    chunks = [range(s, min(s + CHUNK, config.reps)) for s in range(0, config.reps, CHUNK)]
    work = lambda reps: _simulate_chunk(route, source, config, n, n_index, times, reps)  # noqa: E731
    workers = worker_count(threads)
    if workers == 1:
        parts = [work(r) for r in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    return np.concatenate(parts, axis=0), route


def run_experiment(config: ExperimentConfig, *, threads=None) -> ExperimentReport:
    from .config import config_to_dict

    law = config.law
    times = config.times
    col = {t: i for i, t in enumerate(times)}
    W = law.W
    K = law.cov
    delta = delta_for_case(config.case, config.beta)
    report = ExperimentReport(config=config_to_dict(config))
    for idx, n in enumerate(config.n_list):
        filt = build_filter(law.filter_spec, n)
        sigma2 = config.innovation.variance(n)
        exact = joint_weights(filt, n, times).covariance()  # unit-variance innovations
        a2 = law.A2(n) if config.normalizer == "asymptotic" else exact[col[1.0], col[1.0]]
        a2bar = a2 * sigma2
        S, route = simulate_sums(config, n, idx, threads=threads)
        Z = S / math.sqrt(a2bar)
        for t in config.t_grid:
            var, se = variance_with_se(Z[:, col[t]])
            report.variance.append({
                "n": n, "t": t, "m": window_length(n, t), "var_emp": var, "var_se": se,
                "var_exact": exact[col[t], col[t]] / a2, "W": W(t), "route": route,
            })
        # rescaling to A_n^2 = Var S_n(1), whichever normalizer was configured
        to_self = a2 / exact[col[1.0], col[1.0]]
        for s, t in config.cov_pairs:
            cov, se = covariance_with_se(Z[:, col[s]], Z[:, col[t]])
            report.covariance.append({
                "n": n, "s": s, "t": t, "cov_emp": cov, "cov_se": se,
                "cov_exact": exact[col[s], col[t]] / a2, "kernel": K(s, t),
                "cov_emp_selfnorm": cov * to_self, "cov_se_selfnorm": se * to_self,
            })
        s1 = S[:, col[1.0]]
        if config.reps >= MIN_NORMALITY_REPS:
            diag = normality_diagnostics(s1, mean=0.0,
                                         sd=math.sqrt(sigma2 * exact[col[1.0], col[1.0]]))
        else:  # too few replications for meaningful diagnostics
            diag = NormalityDiagnostics(math.nan, math.nan, math.nan, config.reps)
        prof = d_coefficients(filt, n, 1.0)
        lyap = lyapunov_fraction(prof, prof, delta, config.innovation.moment_ratio(delta, n))
        report.normality.append({
            "n": n, "ks": diag.ks, "skew": diag.skew, "exkurt": diag.exkurt,
            "skew_se": diag.skew_se, "exkurt_se": diag.exkurt_se, "lyapunov": lyap,
            "delta": delta, "A2": a2, "sigma2": sigma2, "reps": config.reps,
        })
    return report


# --- deterministic tables ---------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    case: int
    n: int
    t: float
    m: int
    var_exact: float
    W: float
    ratio: float
    error: float
    flag: str = ""


def convergence_table(config: ExperimentConfig) -> list[ConvergenceRow]:
    """|Var Z_n(t) / W(t) - 1| from exact coefficients over n_list x t_grid.

    ``flag`` is "empty-window" when [nt] = 0 and "non-monotone" when the
    error grew relative to the previous n for the same t.
    """
    law = config.law
    W = law.W
    rows = []
    last = {}
    for n in config.n_list:
        filt = build_filter(law.filter_spec, n)
        a2 = law.A2(n)
        for t in config.t_grid:
            m = window_length(n, t)
            if m == 0:
                rows.append(ConvergenceRow(config.case, n, t, 0, math.nan, W(t), math.nan,
                                           math.nan, "empty-window"))
                continue
            v = d_coefficients(filt, n, t).total() / a2
            ratio = v / W(t)
            err = abs(ratio - 1.0)
            flag = "non-monotone" if t in last and err > last[t] else ""
            last[t] = err
            rows.append(ConvergenceRow(config.case, n, t, m, v, W(t), ratio, err, flag))
    return rows


def lyapunov_table(config: ExperimentConfig, t: float = 1.0) -> list[dict]:
    """L(2 + delta, n, t) over n_list with delta from :func:`delta_for_case`."""
    law = config.law
    delta = delta_for_case(config.case, config.beta)
    out = []
    for n in config.n_list:
        filt = build_filter(law.filter_spec, n)
        p1 = d_coefficients(filt, n, 1.0)
        pt = p1 if t == 1.0 else d_coefficients(filt, n, t)
        rho = config.innovation.moment_ratio(delta, n)
        out.append({"n": n, "t": t, "delta": delta, "moment_ratio": rho,
                    "lyapunov": lyapunov_fraction(pt, p1, delta, rho)})
    return out
