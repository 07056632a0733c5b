"""Tests for the cure-fraction model algebra."""

import numpy as np
import pytest
from scipy import integrate

from logsymcure.cure import (
    THETA_CLAMP,
    CureModel,
    Incidence,
    IncidenceModel,
    Link,
    WeibullLatency,
    apply_link,
    cure_fraction,
    link_derivative,
)
from logsymcure.kernels import DensityGenerator, Family, LogSymmetricDist

LATENCY = LogSymmetricDist(DensityGenerator(Family.LOG_NORMAL), eta=2.0, phi=0.5)
THETAS = {
    Incidence.BERNOULLI: 0.3,
    Incidence.POISSON: 1.7,
    Incidence.GEOMETRIC: 0.25,
}


def model(family: Incidence, latency=LATENCY) -> CureModel:
    return CureModel(IncidenceModel(family), latency)


# ---------------------------------------------------------------------------
# closed-form survival and cure fraction
# ---------------------------------------------------------------------------


def test_bernoulli_survival_closed_form():
    m = model(Incidence.BERNOULLI)
    theta, t = 0.3, 1.7
    S = LATENCY.survival(t)
    assert m.survival_p(theta, t) == pytest.approx(theta + (1 - theta) * S, abs=1e-14)
    assert m.cure_fraction(theta) == pytest.approx(theta)


def test_poisson_survival_closed_form():
    m = model(Incidence.POISSON)
    theta, t = 1.7, 1.7
    F = LATENCY.cdf(t)
    assert m.survival_p(theta, t) == pytest.approx(np.exp(-theta * F), abs=1e-14)
    assert m.cure_fraction(theta) == pytest.approx(np.exp(-theta))


def test_geometric_survival_closed_form():
    m = model(Incidence.GEOMETRIC)
    theta, t = 0.25, 1.7
    S = LATENCY.survival(t)
    assert m.survival_p(theta, t) == pytest.approx(
        theta / (1 - (1 - theta) * S), rel=1e-13
    )
    assert m.cure_fraction(theta) == pytest.approx(theta)


@pytest.mark.parametrize("family", list(Incidence))
def test_survival_is_improper_and_monotone(family):
    m = model(family)
    theta = THETAS[family]
    grid = np.geomspace(1e-4, 1e6, 400)
    sp = m.survival_p(theta, grid)
    assert np.all(np.diff(sp) <= 1e-12)
    assert sp[0] == pytest.approx(1.0, abs=1e-6)
    assert sp[-1] == pytest.approx(m.cure_fraction(theta), abs=1e-9)


@pytest.mark.parametrize("family", list(Incidence))
def test_mass_balance(family):
    # integral of the sub-density equals the susceptible mass 1 - cure;
    # integrate in v = log t, split at the median, to tame the tails
    m = model(family)
    theta = THETAS[family]
    total = 0.0
    for a, b in ((-700.0, np.log(2.0)), (np.log(2.0), 700.0)):
        piece, _ = integrate.quad(
            lambda v: m.subdensity_p(theta, np.exp(v)) * np.exp(v), a, b, limit=800
        )
        total += piece
    assert abs(total - (1.0 - m.cure_fraction(theta))) < 1e-7


@pytest.mark.parametrize("family", list(Incidence))
def test_subdensity_is_minus_survival_derivative(family):
    m = model(family)
    theta = THETAS[family]
    h = 1e-6
    for t in (0.4, 1.0, 2.5, 8.0):
        fd = -(m.survival_p(theta, t + h) - m.survival_p(theta, t - h)) / (2 * h)
        assert m.subdensity_p(theta, t) == pytest.approx(fd, rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("family", list(Incidence))
def test_subhazard_is_ratio(family):
    m = model(family)
    theta = THETAS[family]
    t = np.array([0.5, 1.5, 4.0])
    np.testing.assert_allclose(
        m.subhazard_p(theta, t),
        m.subdensity_p(theta, t) / m.survival_p(theta, t),
        rtol=1e-12,
    )


def test_theta_limits_recover_proper_model():
    # as the cure mass vanishes the population model approaches the latency
    t = 1.3
    S = LATENCY.survival(t)
    bern = model(Incidence.BERNOULLI)
    assert bern.survival_p(1e-10, t) == pytest.approx(S, abs=1e-9)
    geo = model(Incidence.GEOMETRIC)
    assert bern.survival_p(1.0 - 1e-12, t) == pytest.approx(1.0, abs=1e-9)
    # theta -> 1: the conditional susceptible survival (Sp - theta)/(1 - theta)
    # of the geometric model tends to the latency survival
    theta = 1.0 - 1e-7
    cond = (geo.survival_p(theta, t) - theta) / (1.0 - theta)
    assert cond == pytest.approx(S, rel=1e-6)
    poi = model(Incidence.POISSON)
    assert poi.survival_p(1e-12, t) == pytest.approx(1.0, abs=1e-9)


def test_poisson_nests_mixture_weights():
    # with theta = -log(1 - pi) both models share the same cure fraction
    pi = 0.35
    theta = -np.log(1 - 0.35)
    assert model(Incidence.POISSON).cure_fraction(theta) == pytest.approx(1 - pi)


# ---------------------------------------------------------------------------
# incidence / link plumbing
# ---------------------------------------------------------------------------


def test_default_links():
    assert IncidenceModel(Incidence.BERNOULLI).link is Link.LOGISTIC
    assert IncidenceModel(Incidence.GEOMETRIC).link is Link.LOGISTIC
    assert IncidenceModel(Incidence.POISSON).link is Link.LOG


def test_log_link_rejected_for_probability_theta():
    with pytest.raises(ValueError):
        IncidenceModel(Incidence.BERNOULLI, link=Link.LOG)
    with pytest.raises(ValueError):
        IncidenceModel(Incidence.GEOMETRIC, link=Link.LOG)
    IncidenceModel(Incidence.POISSON, link=Link.LOGISTIC)  # allowed


def test_incidence_from_string():
    inc = IncidenceModel("poisson")
    assert inc.family is Incidence.POISSON
    assert inc.link is Link.LOG


def test_theta_admissible():
    assert IncidenceModel(Incidence.POISSON).theta_admissible([0.5, 3.0])
    assert not IncidenceModel(Incidence.POISSON).theta_admissible([0.5, -1.0])
    assert IncidenceModel(Incidence.BERNOULLI).theta_admissible([0.5, 0.99])
    assert not IncidenceModel(Incidence.BERNOULLI).theta_admissible([0.5, 1.5])


def test_cure_fraction_domain_checks():
    with pytest.raises(ValueError):
        cure_fraction(Incidence.POISSON, -0.1)
    with pytest.raises(ValueError):
        cure_fraction(Incidence.BERNOULLI, 1.2)
    with pytest.raises(ValueError):
        cure_fraction(Incidence.GEOMETRIC, 0.0)


def test_apply_link_logistic():
    inc = IncidenceModel(Incidence.BERNOULLI)
    beta = np.array([0.5, -1.0])
    X = np.array([[1.0, 0.0], [1.0, 2.0]])
    expected = 1.0 / (1.0 + np.exp(-(X @ beta)))
    np.testing.assert_allclose(apply_link(inc, beta, X), expected, rtol=1e-12)


def test_apply_link_log():
    inc = IncidenceModel(Incidence.POISSON)
    theta = apply_link(inc, np.array([0.3, 0.2]), np.array([1.0, 2.0]))
    assert theta == pytest.approx(np.exp(0.7))


def test_apply_link_clamps_extremes():
    inc = IncidenceModel(Incidence.BERNOULLI)
    hi = apply_link(inc, np.array([1000.0]), np.array([1.0]))
    lo = apply_link(inc, np.array([-1000.0]), np.array([1.0]))
    assert hi == pytest.approx(1.0 - THETA_CLAMP)
    assert lo == pytest.approx(THETA_CLAMP)
    poi = IncidenceModel(Incidence.POISSON)
    assert apply_link(poi, np.array([-1000.0]), np.array([1.0])) >= THETA_CLAMP
    assert np.isfinite(apply_link(poi, np.array([1000.0]), np.array([1.0])))


@pytest.mark.parametrize(
    "family", [Incidence.BERNOULLI, Incidence.POISSON]
)
def test_link_derivative_matches_fd(family):
    inc = IncidenceModel(family)
    h = 1e-6
    for lp in (-1.0, 0.0, 0.8):
        theta = apply_link(inc, np.array([lp]), np.array([1.0]))
        up = apply_link(inc, np.array([lp + h]), np.array([1.0]))
        dn = apply_link(inc, np.array([lp - h]), np.array([1.0]))
        assert link_derivative(inc, theta) == pytest.approx(
            (up - dn) / (2 * h), rel=1e-6
        )


# ---------------------------------------------------------------------------
# Weibull latency baseline
# ---------------------------------------------------------------------------


def test_weibull_validation():
    with pytest.raises(ValueError):
        WeibullLatency(shape=-1.0, scale=2.0)
    with pytest.raises(ValueError):
        WeibullLatency(shape=1.0, scale=0.0)
    with pytest.raises(ValueError):
        WeibullLatency(shape=1.0, scale=1.0).survival(-1.0)


def test_weibull_closed_forms():
    w = WeibullLatency(shape=2.0, scale=3.0)
    t = 1.5
    assert w.survival(t) == pytest.approx(np.exp(-((t / 3.0) ** 2)))
    assert w.cdf(t) == pytest.approx(1.0 - w.survival(t))
    h = 1e-7
    fd = -(w.survival(t + h) - w.survival(t - h)) / (2 * h)
    assert w.density(t) == pytest.approx(fd, rel=1e-6)


def test_weibull_sampler_moments():
    w = WeibullLatency(shape=1.5, scale=2.0)
    rng = np.random.default_rng(7)
    draws = w.sample(rng, 50000)
    from scipy.special import gamma

    assert draws.mean() == pytest.approx(2.0 * gamma(1 + 1 / 1.5), rel=0.02)


def test_cure_model_with_weibull_latency():
    m = CureModel(IncidenceModel(Incidence.POISSON), WeibullLatency(1.5, 2.0))
    theta = 1.2
    total, _ = integrate.quad(
        lambda t: m.subdensity_p(theta, t), 1e-12, np.inf, limit=400
    )
    assert abs(total - (1.0 - np.exp(-theta))) < 1e-7
