import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from discrete_gof.errors import DegenerateLawError, DomainError, InvalidParameterError, InvalidStateError
from discrete_gof.model import (
    ConditionalLaw,
    InfoState,
    ObservationSeries,
    OrderedChoiceSpec,
    PoissonSpec,
    lambda_path,
    law_at,
    mixture_law,
    ordered_cdf,
    ordered_law,
    ordered_pmf_matrix,
    poisson_cdf,
    poisson_kmax,
    poisson_law,
    quantile,
    simulate,
)

from oracles import normal_cdf, poisson_cdf_series

PROBIT3 = OrderedChoiceSpec("probit", 4)


def test_ordered_cdf_endpoints_and_values():
    omega = InfoState(np.zeros(1))
    theta = np.array([0.0, 0.0, 1.0, 2.0])
    assert ordered_cdf(PROBIT3, theta, omega, 0) == 0.0
    assert ordered_cdf(PROBIT3, theta, omega, 4) == 1.0
    assert ordered_cdf(PROBIT3, theta, omega, 1) == pytest.approx(0.5, abs=1e-15)
    assert ordered_cdf(PROBIT3, theta, omega, 2) == pytest.approx(normal_cdf(1.0), abs=1e-12)
    assert ordered_cdf(PROBIT3, theta, omega, 2) == pytest.approx(0.841345, abs=1e-6)


def test_ordered_cdf_logit_and_dynamic_index():
    spec = OrderedChoiceSpec("logit", 3, dynamic=True)
    theta = np.array([0.5, -1.0, -0.2, 0.8])
    omega = InfoState(np.array([2.0]), y_lag=3)
    eta = 0.5 * 2.0 - 1.0 * 3
    assert ordered_cdf(spec, theta, omega, 1) == pytest.approx(1 / (1 + math.exp(-(-0.2 - eta))), abs=1e-14)


def test_ordered_cdf_errors():
    omega = InfoState(np.zeros(1))
    with pytest.raises(InvalidParameterError):
        ordered_cdf(PROBIT3, np.array([0.0, 1.0, 0.5, 2.0]), omega, 1)
    with pytest.raises(DomainError):
        ordered_cdf(PROBIT3, np.array([0.0, 0.0, 1.0, 2.0]), omega, 5)


def test_poisson_cdf_examples():
    assert poisson_cdf(None, 1.0, 1) == pytest.approx(math.exp(-1), abs=1e-15)
    assert poisson_cdf(None, 2.0, 3) == pytest.approx(5 * math.exp(-2), abs=1e-14)
    assert poisson_cdf(None, 2.0, poisson_kmax(2.0)) == 1.0
    with pytest.raises(InvalidStateError):
        poisson_cdf(None, 0.0, 1)


@given(st.floats(0.05, 40.0), st.integers(1, 30))
@settings(max_examples=100, deadline=None)
def test_poisson_cdf_matches_series(lam, k):
    expected = 1.0 if k >= poisson_kmax(lam) else poisson_cdf_series(lam, k - 1)
    assert poisson_cdf(None, lam, k) == pytest.approx(expected, abs=1e-12)


def _identity_series(counts, y0=None):
    y = np.asarray(counts) + 1
    return ObservationSeries(y=y, x=np.zeros((len(y), 0)), y0=None if y0 is None else y0 + 1)


def test_lambda_path_examples():
    s = _identity_series([0, 3, 1, 2])
    lam, _ = lambda_path(PoissonSpec("identity-ar", lambda0=1.0), [1.0, 0.0, 0.0], s)
    assert np.allclose(lam, 1.0)
    s = _identity_series([1, 0, 4], y0=2)
    lam, _ = lambda_path(PoissonSpec("identity-ar", lambda0=1.0), [0.5, 0.3, 0.2], s)
    assert lam[0] == pytest.approx(1.2, abs=1e-14)
    assert lam[1] == pytest.approx(0.5 + 0.3 * 1.2 + 0.2 * 1, abs=1e-14)


@pytest.mark.parametrize(
    "spec,theta,p",
    [
        (PoissonSpec("identity-ar", lambda0=2.0), [0.6, 0.35, 0.3], 0),
        (PoissonSpec("log-ar"), [0.3, 0.4, 0.25], 2),
        (PoissonSpec("exp-static"), [0.5, -0.3], 2),
    ],
)
def test_lambda_gradient_matches_finite_differences(spec, theta, p):
    rng = np.random.default_rng(1)
    T = 60
    x = np.column_stack([np.ones(T), rng.standard_normal(T)])[:, :p] if p else np.zeros((T, 0))
    series = simulate(spec, theta, x, rng) if p else simulate(spec, theta, np.zeros((T, 0)), rng)
    theta = np.asarray(theta, dtype=float)
    lam, dlam = lambda_path(spec, theta, series)
    h = 1e-6
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        fd = (lambda_path(spec, theta + e, series)[0] - lambda_path(spec, theta - e, series)[0]) / (2 * h)
        assert np.max(np.abs(fd - dlam[:, i]) / np.maximum(1.0, np.abs(fd))) <= 1e-5


def test_lambda_hessian_identity_ar():
    spec = PoissonSpec("identity-ar", lambda0=2.0)
    theta = np.array([0.6, 0.35, 0.3])
    series = simulate(spec, theta, np.zeros((50, 0)), np.random.default_rng(4))
    _, _, d2 = lambda_path(spec, theta, series, hessian=True)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (lambda_path(spec, theta + e, series)[1] - lambda_path(spec, theta - e, series)[1]) / (2 * h)
        assert np.allclose(fd, d2[:, :, i], atol=1e-6)


def test_quantile_examples():
    law = ConditionalLaw.from_pmf([0.2, 0.5, 0.3])
    assert quantile(law, 0.2) == 1
    assert quantile(law, 0.200001) == 2
    assert quantile(law, 1.0) == 3
    assert quantile(poisson_law(3.0), 1.0) == poisson_kmax(3.0)
    for bad in (0.0, -0.1, 1.01):
        with pytest.raises(DomainError):
            quantile(law, bad)


def test_degenerate_law_rejected():
    with pytest.raises(DegenerateLawError):
        ConditionalLaw.from_pmf([0.5, 0.0, 0.5])
    with pytest.raises(DegenerateLawError):
        ConditionalLaw([0.3, 0.9])


def test_mixture_law():
    F = ConditionalLaw.from_pmf([0.2, 0.5, 0.3])
    H = ConditionalLaw.from_pmf([0.4, 0.4, 0.2])
    assert np.allclose(mixture_law(F, H, 0.0, 100).cdf_values, F.cdf_values)
    assert mixture_law(F, H, 1.0, 100).pmf(1) == pytest.approx(0.22, abs=1e-15)
    near = mixture_law(F, H, 10 * (1 - 1e-9), 100)
    assert np.allclose(near.cdf_values, H.cdf_values, atol=1e-8)
    with pytest.raises(DomainError):
        mixture_law(F, H, 10.0, 100)
    with pytest.raises(DomainError):
        mixture_law(F, H, -0.1, 100)


def test_simulate_is_deterministic():
    x = np.random.default_rng(0).standard_normal((200, 2))
    theta = [1.0, -1.0, -1.0, 0.0, 1.0]
    a = simulate(PROBIT3, theta, x, np.random.default_rng(9))
    b = simulate(PROBIT3, theta, x, np.random.default_rng(9))
    assert np.array_equal(a.y, b.y)


def test_simulate_static_probit_cell_frequencies():
    T = 100_000
    rng = np.random.default_rng(123)
    x = rng.standard_normal((T, 2))
    theta = np.array([0.8, -0.5, -1.0, 0.2, 1.1])
    s = simulate(PROBIT3, theta, x, rng)
    P = ordered_pmf_matrix(PROBIT3, theta, x)
    target = P.mean(axis=0)
    freq = np.bincount(s.y, minlength=5)[1:] / T
    se = np.sqrt(target * (1 - target) / T)
    assert np.all(np.abs(freq - target) <= 3 * se)


def test_simulate_dynamic_probit_is_serially_dependent():
    spec = OrderedChoiceSpec("probit", 3, dynamic=True)
    x = np.zeros((5000, 1))
    s = simulate(spec, [0.0, 1.5, 1.5, 3.5], x, np.random.default_rng(2), y0=2)
    table = np.zeros((3, 3))
    np.add.at(table, (s.y[:-1] - 1, s.y[1:] - 1), 1)
    chi2, pval, *_ = stats.chi2_contingency(table)
    assert pval < 1e-6


def test_simulate_poisson_mean():
    spec = PoissonSpec("identity-ar", lambda0=3.0, y0=3)
    s = simulate(spec, [0.6, 0.5, 0.3], np.zeros((20_000, 0)), np.random.default_rng(3))
    assert abs((s.y - 1).mean() - 3.0) < 0.15


def test_observation_series_validation():
    with pytest.raises(DomainError):
        ObservationSeries(y=[0, 1, 2], x=np.zeros((3, 0)), K=3)
    with pytest.raises(DomainError):
        ObservationSeries(y=[1, 4, 2], x=np.zeros((3, 0)), K=3)
    s = ObservationSeries(y=[2, 1, 3], x=np.zeros((3, 1)), K=3)
    assert s.lagged_y().tolist() == [2, 2, 1]


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

ordered_thetas = st.tuples(
    st.sampled_from(["probit", "logit"]),
    st.integers(2, 6),
    st.lists(st.floats(-2, 2), min_size=2, max_size=2),
    st.floats(-1.5, 1.5),
    st.floats(-3, 0),
    st.lists(st.floats(0.05, 1.5), min_size=5, max_size=5),
    st.lists(st.floats(-2, 2), min_size=2, max_size=2),
    st.integers(1, 6),
)


@given(ordered_thetas)
@settings(max_examples=150, deadline=None)
def test_ordered_law_is_proper(args):
    link, K, beta, rho, tau1, gaps, x, lag = args
    spec = OrderedChoiceSpec(link, K, dynamic=True)
    tau = tau1 + np.concatenate(([0.0], np.cumsum(gaps[: K - 2])))
    theta = np.concatenate((beta, [rho], tau))
    try:
        law = ordered_law(spec, theta, InfoState(np.array(x), y_lag=min(lag, K)))
    except DegenerateLawError:
        return  # extreme index: a cell fell below the floor and was rejected
    c = law.cdf_values
    assert c[0] == 0.0 and c[-1] == 1.0
    assert np.all(np.diff(c) > 0)
    assert abs(law.pmf_values.sum() - 1.0) <= 1e-10
    for k in range(1, K + 1):
        assert quantile(law, c[k]) == k


@given(st.floats(0.01, 200.0))
@settings(max_examples=100, deadline=None)
def test_poisson_law_is_proper(lam):
    law = poisson_law(lam)
    assert abs(law.pmf_values.sum() - 1.0) <= 1e-10
    assert np.all(law.pmf_values > 0)
    for k in range(1, law.K + 1):
        assert quantile(law, law.cdf_values[k]) == k


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_simulate_pure_function_of_seed(seed):
    x = np.linspace(-1, 1, 40)[:, None]
    spec = OrderedChoiceSpec("logit", 3, dynamic=True)
    a = simulate(spec, [1.0, -0.5, -0.5, 0.5], x, np.random.default_rng(seed))
    b = simulate(spec, [1.0, -0.5, -0.5, 0.5], x, np.random.default_rng(seed))
    assert np.array_equal(a.y, b.y) and a.y0 == b.y0


def test_law_at_matches_lambda_path():
    spec = PoissonSpec("identity-ar", lambda0=2.0)
    theta = [0.6, 0.35, 0.3]
    s = simulate(spec, theta, np.zeros((30, 0)), np.random.default_rng(5))
    lam, _ = lambda_path(spec, theta, s)
    law = law_at(spec, theta, s, 7)
    assert law.cdf(3) == pytest.approx(poisson_cdf_series(lam[7], 2), abs=1e-12)
