"""Tests for fitting, model selection, and Wald/LRT inference."""

import numpy as np
import pytest
from scipy.stats import chi2

from conftest import make_dataset
from logsymcure import (
    FitResult,
    Incidence,
    ModelSpec,
    OptimConfig,
    cure_fraction_by_profile,
    default_selection_grid,
    fit,
    lr_test,
    select,
)
from logsymcure.likelihood import ParamVector, SurvivalDataset

FAST = OptimConfig(n_starts=2, seed=0)


@pytest.fixture(scope="module")
def fitted():
    spec = ModelSpec(Incidence.POISSON, "lognormal")
    data = make_dataset(seed=8, n=400, spec=spec, censor_bound=40.0)
    return data, fit(data, spec, FAST)


# ---------------------------------------------------------------------------
# fit mechanics
# ---------------------------------------------------------------------------


def test_fit_recovers_parameters_roughly(fitted):
    _, res = fitted
    assert res.converged
    assert res.lambda_hat.eta == pytest.approx(5.0, rel=0.3)
    assert res.lambda_hat.phi == pytest.approx(1.0, rel=0.5)


def test_fit_is_stationary_point(fitted):
    data, res = fitted
    ev = res.spec.make_evaluator(data)
    score = ev.score(res.lambda_hat)
    # natural-scale score scaled by parameter magnitudes stays near zero
    scale = np.maximum(np.abs(res.lambda_hat.as_array()), 1.0)
    assert np.max(np.abs(score * scale)) < 1e-3 * max(1.0, abs(res.loglik))


def test_aic_bic_identities(fitted):
    data, res = fitted
    k = res.lambda_hat.size
    assert res.aic == -2.0 * res.loglik + 2.0 * k
    assert res.bic == -2.0 * res.loglik + k * np.log(data.n)


def test_k_excludes_fixed_extras():
    spec = ModelSpec(Incidence.POISSON, "logt", 3.0)
    data = make_dataset(seed=9, n=150, spec=spec)
    res = fit(data, spec, FAST)
    # beta has 3 components; k = 3 + 2, the fixed nu is not counted
    assert res.k == 5
    assert res.aic == pytest.approx(-2.0 * res.loglik + 10.0)


def test_fit_reports_se_and_vcov(fitted):
    _, res = fitted
    assert res.se.shape == (res.k,)
    assert np.all(np.isfinite(res.se)) and np.all(res.se > 0)
    np.testing.assert_allclose(res.vcov, res.vcov.T, atol=1e-12)
    np.testing.assert_allclose(np.sqrt(np.diag(res.vcov)), res.se, rtol=1e-12)


def test_fit_to_dict_round_trip(fitted):
    _, res = fitted
    d = res.to_dict()
    assert d["model"]["incidence"] == "poisson"
    assert d["model"]["latency"] == "lognormal"
    assert set(d["estimates"]) == {"beta0", "beta[x1]", "beta[x2]", "eta", "phi"}
    assert d["aic"] == res.aic
    assert d["n"] == res.n


def test_fit_deterministic_given_config(fitted):
    data, res = fitted
    again = fit(data, res.spec, FAST)
    np.testing.assert_array_equal(
        again.lambda_hat.as_array(), res.lambda_hat.as_array()
    )
    assert again.loglik == res.loglik


# ---------------------------------------------------------------------------
# likelihood-ratio test
# ---------------------------------------------------------------------------


def test_lr_test_nested_covariate():
    spec = ModelSpec(Incidence.POISSON, "lognormal")
    data = make_dataset(seed=12, n=250, spec=spec, beta=[0.3, 0.0, 0.0])
    full = fit(data, spec, FAST)
    reduced_data = SurvivalDataset(
        y=data.y, delta=data.delta, X=data.X[:, :1], covariate_names=()
    )
    reduced = fit(reduced_data, spec, FAST)
    stat, df, p = lr_test(full, reduced)
    assert df == 2
    assert stat >= 0.0
    assert p == pytest.approx(chi2.sf(stat, df), rel=1e-10)


def test_lr_test_rejects_non_nested(fitted):
    data, full = fitted
    other = fit(data, ModelSpec(Incidence.BERNOULLI, "lognormal"), FAST)
    with pytest.raises(ValueError):
        lr_test(full, other)
    with pytest.raises(ValueError):
        lr_test(full, full)  # equal parameter counts


# ---------------------------------------------------------------------------
# cure fraction by covariate profile
# ---------------------------------------------------------------------------


def _mixture_result(beta) -> FitResult:
    spec = ModelSpec(Incidence.BERNOULLI, "lognormal")
    lam = ParamVector(beta=beta, eta=5.0, phi=1.0)
    k = lam.size
    return FitResult(
        spec=spec,
        lambda_hat=lam,
        se=np.full(k, np.nan),
        vcov=np.full((k, k), np.nan),
        loglik=0.0,
        aic=0.0,
        bic=0.0,
        n=0,
        n_events=0,
        converged=True,
        gradient_norm=0.0,
        start_index_of_best=0,
        info_positive_definite=True,
    )


def test_cure_fraction_profiles():
    res = _mixture_result([-1.551, -3.264, 3.063])
    assert cure_fraction_by_profile(res, [1.0, 0.0, 0.0]) == pytest.approx(
        0.175, abs=1e-3
    )
    assert cure_fraction_by_profile(res, [1.0, 1.0, 0.0]) == pytest.approx(
        0.008, abs=1e-3
    )
    assert cure_fraction_by_profile(res, [1.0, 0.0, 1.0]) == pytest.approx(
        0.820, abs=1e-3
    )


def test_cure_fraction_profile_dimension_check():
    res = _mixture_result([-1.551, -3.264, 3.063])
    with pytest.raises(ValueError):
        cure_fraction_by_profile(res, [1.0, 0.0])


def test_cure_fraction_profile_scaling_equivariance():
    # rescaling a design column with the inverse scaling on beta leaves the
    # linear predictor, hence the cure fraction, unchanged
    res = _mixture_result([-1.551, -3.264, 3.063])
    scaled = _mixture_result([-1.551, -3.264 / 10.0, 3.063])
    x = [1.0, 0.7, 1.0]
    x_scaled = [1.0, 7.0, 1.0]
    assert cure_fraction_by_profile(res, x) == pytest.approx(
        cure_fraction_by_profile(scaled, x_scaled), rel=1e-12
    )


# ---------------------------------------------------------------------------
# model selection
# ---------------------------------------------------------------------------


def test_default_selection_grid_shape():
    grid = default_selection_grid()
    assert len(grid) == 30
    for inc in Incidence:
        sub = [g for g in grid if g.incidence is inc]
        assert len(sub) == 10
        latencies = sorted({g.latency for g in sub})
        assert latencies == ["bs", "lognormal", "logt", "weibull"]
    assert sorted(g.extra for g in grid if g.latency == "logt") == sorted(
        [2.0, 4.0, 6.0, 8.0] * 3
    )


def test_select_orders_by_criterion():
    spec = ModelSpec(Incidence.POISSON, "lognormal")
    data = make_dataset(seed=21, n=200, spec=spec)
    grid = [
        ModelSpec(Incidence.POISSON, "lognormal"),
        ModelSpec(Incidence.POISSON, "logt", 3.0),
        ModelSpec(Incidence.POISSON, "weibull"),
    ]
    rows = select(data, grid, FAST)
    aics = [r.aic for r in rows]
    assert aics == sorted(aics)
    rows_bic = select(data, grid, FAST, criterion="bic")
    assert [r.bic for r in rows_bic] == sorted(r.bic for r in rows_bic)


def test_select_single_candidate():
    data = make_dataset(seed=22, n=120)
    rows = select(data, [ModelSpec(Incidence.POISSON, "lognormal")], FAST)
    assert len(rows) == 1
    assert rows[0].converged


def test_select_validation():
    data = make_dataset(seed=22, n=60)
    with pytest.raises(ValueError):
        select(data, [], FAST)
    with pytest.raises(ValueError):
        select(data, [ModelSpec(Incidence.POISSON, "lognormal")], FAST, criterion="dic")


def test_select_row_to_dict():
    data = make_dataset(seed=23, n=120)
    rows = select(data, [ModelSpec(Incidence.POISSON, "logt", 4.0)], FAST)
    d = rows[0].to_dict()
    assert d["incidence"] == "poisson"
    assert d["latency"] == "logt"
    assert d["extra"] == 4.0
    assert d["error"] is None


# ---------------------------------------------------------------------------
# model spec plumbing
# ---------------------------------------------------------------------------


def test_model_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(Incidence.POISSON, "gamma")
    spec = ModelSpec("bernoulli", "lognormal")
    assert spec.incidence is Incidence.BERNOULLI
    assert spec.label() == "bernoulli/lognormal/-"
    assert ModelSpec(Incidence.POISSON, "logt", 4.0).label() == "poisson/logt/4"
