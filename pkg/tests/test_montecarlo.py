import math

import numpy as np
import pytest
from scipy import stats

from taperflow import InnovationModel
from taperflow.errors import ConfigurationError, DegenerateError
from taperflow.montecarlo import (ExperimentConfig, ExperimentReport, convergence_table,
                                  lyapunov_table, normality_diagnostics, run_experiment,
                                  simulate_sums, worker_count)


def test_zero_reps_rejected():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(case=2, beta=2.0, reps=0)


def test_soft_tapering_rejected():
    with pytest.raises(ConfigurationError, match="out of scope"):
        ExperimentConfig(case=2, beta=2.0, innovation=InnovationModel.tapered_pareto(1.5, 0.8))


def test_clt_exact_normalizer():
    # with A_n^2 = Var S_n(1) the target variance is exactly 1
    cfg = ExperimentConfig(case=2, beta=2.0, gamma1=0.5, n_list=(400,), t_grid=(1.0,), reps=2000,
                           seed=3, normalizer="exact")
    rep = run_experiment(cfg)
    row = rep.row(400, 1.0)
    assert row["var_exact"] == pytest.approx(1.0, rel=1e-14)
    assert abs(row["var_emp"] - 1.0) < 4 * row["var_se"]


def test_reports_are_deterministic_and_thread_independent():
    cfg = ExperimentConfig(case=8, beta=2.0, innovation=InnovationModel.tapered_pareto(1.5, 0.4),
                           n_list=(300, 600), t_grid=(0.5, 1.0), reps=70, seed=11)
    a = run_experiment(cfg, threads=1).to_dict()
    b = run_experiment(cfg, threads=1).to_dict()
    c = run_experiment(cfg, threads=3).to_dict()
    assert a == b == c


def test_report_round_trip():
    cfg = ExperimentConfig(case=4, beta=0.75, gamma1=1.5, n_list=(200,), reps=100, seed=7)
    rep = run_experiment(cfg)
    again = ExperimentReport.from_dict(rep.to_dict())
    assert list(again.csv_rows()) == list(rep.csv_rows())


def test_cross_oracle_variance():
    for case, beta in ((1, 0.75), (6, 1.25), (7, 0.75)):
        cfg = ExperimentConfig(case=case, beta=beta, n_list=(500,), t_grid=(0.5, 1.0), reps=1500,
                               seed=case)
        rep = run_experiment(cfg)
        for t in (0.5, 1.0):
            row = rep.row(500, t)
            assert abs(row["var_emp"] - row["var_exact"]) < 4 * row["var_se"]


def test_reduced_route_matches_path_route():
    cfg = dict(case=4, beta=0.75, gamma1=1.5, n_list=(300,), t_grid=(0.5, 1.0), reps=1500, seed=5)
    a = run_experiment(ExperimentConfig(route="path", **cfg))
    b = run_experiment(ExperimentConfig(route="reduced", **cfg))
    for t in (0.5, 1.0):
        ra, rb = a.row(300, t), b.row(300, t)
        assert ra["var_exact"] == rb["var_exact"]
        assert abs(ra["var_emp"] - rb["var_emp"]) < 4 * math.hypot(ra["var_se"], rb["var_se"])


def test_normality_diagnostics():
    x = np.random.default_rng(0).standard_normal(10_000)
    d = normality_diagnostics(x)
    assert d.ks < 0.02  # critical value at level 0.01 is about 0.0163
    two = np.tile([-1.0, 1.0], 100)
    ks, skew, exkurt = normality_diagnostics(two)
    assert skew == 0.0 and exkurt == pytest.approx(-2.0, abs=1e-14)
    with pytest.raises(DegenerateError):
        normality_diagnostics(np.ones(200))


def test_ks_rate_under_null():
    crit = stats.kstwo(10_000).ppf(0.99)
    assert crit < 0.02


def test_convergence_table_srd():
    cfg = ExperimentConfig(case=2, beta=2.0, gamma1=0.5, n_list=(10**3, 10**4, 10**5, 10**6), reps=1)
    rows = convergence_table(cfg)
    errs = [r.error for r in rows]
    assert all(a > b for a, b in zip(errs, errs[1:])) and errs[-1] <= 0.1
    assert not any(r.flag for r in rows)


def test_convergence_table_flat_and_empty():
    rows = convergence_table(ExperimentConfig(case=10, gamma1=0.5, n_list=(10**5,), reps=1))
    assert abs(rows[0].ratio - 1) < 0.02
    rows = convergence_table(ExperimentConfig(case=10, gamma1=0.5, n_list=(10,), t_grid=(0.05, 1.0),
                                              reps=1))
    assert rows[0].flag == "empty-window" and rows[1].flag == ""


def test_lyapunov_table_decays():
    cfg = ExperimentConfig(case=8, beta=2.0, innovation=InnovationModel.tapered_pareto(1.2, 0.5),
                           n_list=(10**3, 10**4, 10**5), reps=1)
    L = [r["lyapunov"] for r in lyapunov_table(cfg)]
    assert L[0] > L[1] > L[2]


def test_worker_count(monkeypatch):
    monkeypatch.setenv("TAPERFLOW_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(0) == 1
