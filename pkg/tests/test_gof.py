import logging
import os

import numpy as np
import pytest

from pltvsar.datasets.panel import (
    FixedEffectsDesign,
    ModelSpec,
    PanelLayout,
    load_panel_csv,
)
from pltvsar.datasets.weights import SarSystem, load_weights_csv, row_standardize
from pltvsar.inference.gof import (
    Decision,
    TestConfig,
    TestResult,
    bootstrap_response,
    bootstrap_test,
    count_p_value,
    decide,
    null_mean,
    residual_pool,
    w_statistic,
)
from pltvsar.loggers.console import log
from pltvsar.models.estimator import FitResult, fit, fit_full_tv
from pltvsar.simulation.dgp import DgpConfig, generate
from pltvsar.utils.errors import (
    ExplosiveBootstrapDgp,
    InvalidRss,
    PreconditionViolation,
)
from pltvsar.utils.messages import EXPLOSIVE_DGP_ERR
from pltvsar.utils.parallel import replicate_rng
from tests.helpers import random_panel
from tests.oracle import dense_pipeline


def _result(p_value, k=10):
    return TestResult(
        w_observed=1.0, w_bootstrap=np.zeros(k), p_value=p_value, k=k, seed=0
    )


@pytest.fixture(scope="module")
def simulated():
    sim = generate(DgpConfig(m=4, t_len=3, seed=7))
    result = fit(sim.data, sim.spec, sim.weights)
    tv = fit_full_tv(sim.data, result.stage1, result.bandwidth)
    return sim, result, tv


def test_w_statistic_values():
    assert w_statistic(3.0, 3.0, 10, 5) == 0.0
    assert w_statistic(2.0, 1.0, 10, 5) == pytest.approx(25.0)
    assert w_statistic(0.5, 1.0, 10, 5) == pytest.approx(-12.5)
    with pytest.raises(InvalidRss):
        w_statistic(1.0, 0.0, 10, 5)


def test_w_statistic_matches_oracle(ring4):
    data = random_panel(4, 3, p=2, seed=3)
    spec = ModelSpec(varying_cols=(0,), constant_cols=(1,))
    result = fit(data, spec, ring4, h=0.5)
    tv = fit_full_tv(data, result.stage1, result.bandwidth)
    expected = dense_pipeline(data.y, data.x, ring4.values, data.tau, 0.5, [0], [1])
    observed = w_statistic(result.rss, tv.rss, 4, 3)
    assert observed == pytest.approx(expected["w"], rel=1e-7)


def test_count_p_value():
    w_star = np.array([0.5, 1.0, 1.0, 2.0])
    assert count_p_value(1.0, w_star) == pytest.approx(0.75)
    assert count_p_value(1.0, w_star, strict=True) == pytest.approx(0.25)
    assert count_p_value(5.0, w_star) == 0.0
    values = [count_p_value(w, w_star) for w in np.linspace(-1, 3, 17)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_decide():
    assert decide(_result(0.204), 0.05) is Decision.FAIL_TO_REJECT
    assert decide(_result(0.0), 0.01) is Decision.REJECT
    assert decide(_result(0.05), 0.05) is Decision.FAIL_TO_REJECT
    with pytest.raises(PreconditionViolation):
        decide(_result(0.1), 1.0)


def test_config_requires_replicates():
    with pytest.raises(PreconditionViolation):
        TestConfig(n_bootstrap=0)


def test_null_mean_reproduces_partially_linear_fit(simulated):
    sim, result, _ = simulated
    data = sim.data
    mean = null_mean(data, result)
    d = FixedEffectsDesign(data.n, data.t_len)
    x = data.x
    t_idx = np.repeat(np.arange(data.t_len), data.n)
    expected = (
        result.beta_v[t_idx, 0] * x[:, 0]
        + result.beta_v[t_idx, 1] * x[:, 1]
        + x[:, 2:] @ result.beta_c
        + d.matvec(result.alpha[1:])
    )
    np.testing.assert_allclose(mean, expected, atol=1e-12)


def test_bootstrap_is_deterministic(simulated):
    sim, result, tv = simulated
    cfg = TestConfig(n_bootstrap=6, seed=42)
    args = (sim.data, sim.spec, sim.weights, "gaussian", result, tv)
    first = bootstrap_test(*args, cfg)
    second = bootstrap_test(*args, cfg)
    np.testing.assert_array_equal(first.w_bootstrap, second.w_bootstrap)
    assert first.p_value == second.p_value
    assert len(first.w_bootstrap) == 6
    hits = np.count_nonzero(first.w_bootstrap >= first.w_observed)
    assert first.p_value == hits / 6
    assert 0.0 <= first.p_value <= 1.0
    assert first.w_observed == pytest.approx(
        w_statistic(result.rss, tv.rss, sim.data.n, sim.data.t_len)
    )


def test_bootstrap_single_replicate(simulated):
    sim, result, tv = simulated
    cfg = TestConfig(n_bootstrap=1, seed=1)
    out = bootstrap_test(sim.data, sim.spec, sim.weights, "gaussian", result, tv, cfg)
    assert out.p_value in (0.0, 1.0)
    payload = out.to_dict()
    assert set(payload) == {"w_observed", "p_value", "k", "seed"}
    assert len(out.to_dict(include_bootstrap=True)["w_bootstrap"]) == 1


def test_bootstrap_seed_changes_draws(simulated):
    sim, result, tv = simulated
    a = bootstrap_test(
        sim.data, sim.spec, sim.weights, "gaussian", result, tv, TestConfig(4, seed=1)
    )
    b = bootstrap_test(
        sim.data, sim.spec, sim.weights, "gaussian", result, tv, TestConfig(4, seed=2)
    )
    assert not np.array_equal(a.w_bootstrap, b.w_bootstrap)


def test_residual_pool_is_centered(simulated):
    _, _, tv = simulated
    pool = residual_pool(tv.residuals)
    assert abs(pool.mean()) < 1e-12
    np.testing.assert_allclose(pool - tv.residuals, -tv.residuals.mean())

    shifted = residual_pool(np.arange(6.0) + 100.0)
    assert abs(shifted.mean()) < 1e-12
    np.testing.assert_allclose(shifted, np.arange(6.0) - 2.5)


def test_bootstrap_replicate_matches_refit(simulated):
    sim, result, tv = simulated
    out = bootstrap_test(
        sim.data, sim.spec, sim.weights, "gaussian", result, tv, TestConfig(2, seed=13)
    )
    system = SarSystem(
        sim.weights, result.rho_hat, ExplosiveBootstrapDgp, EXPLOSIVE_DGP_ERR
    )
    pool = residual_pool(tv.residuals)
    for j in range(2):
        y_star = bootstrap_response(
            pool, null_mean(sim.data, result), system, replicate_rng(13, j)
        )
        data_star = sim.data.with_response(y_star)
        refit = fit(data_star, sim.spec, sim.weights, h=result.bandwidth)
        refit_tv = fit_full_tv(data_star, refit.stage1, refit.bandwidth)
        expected = w_statistic(refit.rss, refit_tv.rss, sim.data.n, sim.data.t_len)
        assert out.w_bootstrap[j] == pytest.approx(expected, rel=1e-8, abs=1e-10)


def test_bootstrap_independent_of_worker_count(small_panel, ring4, small_spec):
    result = fit(small_panel, small_spec, ring4, h=0.5)
    tv = fit_full_tv(small_panel, result.stage1, result.bandwidth)
    args = (small_panel, small_spec, ring4, "gaussian", result, tv)
    serial = bootstrap_test(*args, TestConfig(n_bootstrap=4, seed=9, parallel=1))
    pooled = bootstrap_test(*args, TestConfig(n_bootstrap=4, seed=9, parallel=2))
    np.testing.assert_array_equal(serial.w_bootstrap, pooled.w_bootstrap)
    assert serial.p_value == pooled.p_value


def test_nonstationary_warning_only_for_observed_fit(simulated, monkeypatch, caplog):
    sim, _, _ = simulated
    monkeypatch.setattr(FitResult, "nonstationary", property(lambda self: True))
    monkeypatch.setattr(log, "propagate", True)
    with caplog.at_level(logging.WARNING, logger=log.name):
        result = fit(sim.data, sim.spec, sim.weights)
        tv = fit_full_tv(sim.data, result.stage1, result.bandwidth)
        assert len(caplog.records) == 1
        caplog.clear()
        bootstrap_test(
            sim.data, sim.spec, sim.weights, "gaussian", result, tv, TestConfig(3)
        )
    assert not [r for r in caplog.records if r.levelno >= logging.WARNING]



@pytest.mark.empirical
def test_carbon_p_value():
    panel_path = os.environ.get("PLTVSAR_CARBON_PANEL")
    weights_path = os.environ.get("PLTVSAR_CARBON_WEIGHTS")
    if not panel_path or not weights_path:
        pytest.skip("carbon dataset not configured")
    layout = PanelLayout(response="PC", covariates=["PG", "PR", "IR", "ER"])
    data = load_panel_csv(panel_path, layout)
    w = row_standardize(load_weights_csv(weights_path))
    spec = ModelSpec.from_names(data.column_names, ["PR", "ER"], ["PG", "IR"])
    result = fit(data, spec, w)
    tv = fit_full_tv(data, result.stage1, result.bandwidth)
    out = bootstrap_test(
        data, spec, w, "gaussian", result, tv, TestConfig(n_bootstrap=500, seed=555)
    )
    assert out.p_value == pytest.approx(0.204, abs=0.06)
    assert decide(out, 0.05) is Decision.FAIL_TO_REJECT
