"""Rank-size law evaluation, fitting and target discretization tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from hapaxchain.ranksize import (
    FitConfig,
    ParameterDomainError,
    UnidentifiableParameterError,
    ZMParams,
    confidence_intervals,
    fit_zm,
    target_distribution,
    zm_eval,
)

REFERENCE_PARAMS = ZMParams(alpha=6.029e8, beta=2540.0, gamma=1.896)

valid_params = st.builds(
    ZMParams,
    alpha=st.floats(min_value=1e-3, max_value=1e9),
    beta=st.floats(min_value=-0.99, max_value=1e4),
    gamma=st.floats(min_value=1e-2, max_value=5.0),
)


# ----------------------------------------------------------------- zm_eval


def test_zm_eval_simple():
    assert zm_eval(ZMParams(5.0, 0.0, 1.0), 5) == pytest.approx(1.0)


def test_zm_eval_reference_point():
    # 6.029e8 / 2541^1.896, checked against high-precision arithmetic
    assert zm_eval(REFERENCE_PARAMS, 1) == pytest.approx(211.03594767, rel=1e-9)


def test_zm_eval_rejects_bad_rank():
    with pytest.raises(ParameterDomainError):
        zm_eval(REFERENCE_PARAMS, 0)


def test_zm_params_domain():
    with pytest.raises(ParameterDomainError):
        ZMParams(alpha=-1.0, beta=0.0, gamma=1.0)
    with pytest.raises(ParameterDomainError):
        ZMParams(alpha=1.0, beta=0.0, gamma=0.0)
    with pytest.raises(ParameterDomainError):
        ZMParams(alpha=1.0, beta=-1.0, gamma=1.0)


@settings(max_examples=80)
@given(valid_params, st.integers(min_value=1, max_value=10**6))
def test_zm_eval_strictly_decreasing(params, r):
    assert zm_eval(params, r) > zm_eval(params, r + 1)


# ------------------------------------------------------------------ target


def test_target_single_rank():
    t = target_distribution(ZMParams(2.0, 1.0, 1.0), 1)
    assert t.probs.tolist() == [1.0]


def test_target_reference_ratios():
    t = target_distribution(REFERENCE_PARAMS, 300)
    assert t.probs[0] / t.probs[1] == pytest.approx(1.000746, abs=1e-6)
    assert t.probs[0] / t.probs[299] == pytest.approx(1.2348, abs=1e-4)


@settings(max_examples=60)
@given(valid_params, st.integers(min_value=1, max_value=400))
def test_target_invariants(params, r_bar):
    t = target_distribution(params, r_bar)
    assert abs(t.probs.sum() - 1.0) <= 1e-12
    assert np.all(t.probs > 0)
    assert np.all(np.diff(t.probs) < 0) or r_bar == 1


def test_target_rejects_bad_rbar():
    with pytest.raises(ValueError):
        target_distribution(REFERENCE_PARAMS, 0)


# --------------------------------------------------------------------- fit


def synthetic_points(params, ranks):
    return [(int(r), zm_eval(params, int(r))) for r in ranks]


def test_fit_recovers_noiseless_params():
    true = ZMParams(alpha=100.0, beta=5.0, gamma=1.5)
    result = fit_zm(synthetic_points(true, range(1, 201)))
    assert result.params.alpha == pytest.approx(true.alpha, rel=1e-3)
    assert result.params.beta == pytest.approx(true.beta, rel=1e-3)
    assert result.params.gamma == pytest.approx(true.gamma, rel=1e-3)
    assert result.rss < 1e-8


def test_fit_pure_zipf_slope():
    true = ZMParams(alpha=1.0, beta=0.0, gamma=1.0)
    points = synthetic_points(true, range(1, 51))
    ranks = np.array([p[0] for p in points], dtype=float)
    sizes = np.array([p[1] for p in points], dtype=float)
    # independent slope oracle: log-log linear regression
    slope = sps.linregress(np.log(ranks), np.log(sizes)).slope
    assert slope == pytest.approx(-1.0, abs=1e-12)
    result = fit_zm(points)
    assert result.params.gamma == pytest.approx(1.0, abs=1e-3)


def test_fit_recovers_reference_scale():
    # Synthetic data at the calibrated-magnitude scale exercises the
    # conditioning of the solver far from its pure-Zipf start.
    ranks = np.unique(np.geomspace(1, 31074, 400).astype(int))
    result = fit_zm(synthetic_points(REFERENCE_PARAMS, ranks))
    assert result.params.alpha == pytest.approx(REFERENCE_PARAMS.alpha, rel=1e-3)
    assert result.params.beta == pytest.approx(REFERENCE_PARAMS.beta, rel=1e-3)
    assert result.params.gamma == pytest.approx(REFERENCE_PARAMS.gamma, rel=1e-3)


def test_fit_noisy_data_reasonable():
    rng = np.random.default_rng(17)
    true = ZMParams(alpha=500.0, beta=20.0, gamma=1.3)
    ranks = range(1, 301)
    sizes = [zm_eval(true, r) * (1 + 0.01 * rng.standard_normal()) for r in ranks]
    result = fit_zm(list(zip(ranks, sizes)))
    assert result.params.gamma == pytest.approx(true.gamma, rel=0.05)
    assert result.r_squared > 0.99


def test_fit_scaling_property():
    true = ZMParams(alpha=80.0, beta=3.0, gamma=1.2)
    points = synthetic_points(true, range(1, 101))
    scaled = [(r, 4.0 * s) for r, s in points]
    base = fit_zm(points)
    refit = fit_zm(scaled)
    assert refit.params.alpha == pytest.approx(4.0 * base.params.alpha, rel=1e-5)
    assert refit.params.beta == pytest.approx(base.params.beta, rel=1e-5, abs=1e-5)
    assert refit.params.gamma == pytest.approx(base.params.gamma, rel=1e-5)


def test_fit_validates_input():
    with pytest.raises(ValueError):
        fit_zm([(1, 2.0), (2, 1.0), (3, 0.5)])  # too few
    with pytest.raises(ValueError):
        fit_zm([(1, 2.0), (2, 1.0), (2, 0.7), (3, 0.5)])  # non-increasing ranks
    with pytest.raises(ValueError):
        fit_zm([(1, 2.0), (2, 1.0), (3, -0.5), (4, 0.2)])  # negative size


def test_fit_constant_sizes_flagged():
    points = [(r, 3.0) for r in range(1, 21)]
    result = fit_zm(points)
    assert result.ill_conditioned
    assert all(math.isnan(lo) and math.isnan(hi) for lo, hi in result.ci.values())


def test_fit_is_deterministic():
    true = ZMParams(alpha=100.0, beta=5.0, gamma=1.5)
    points = synthetic_points(true, range(1, 101))
    r1 = fit_zm(points)
    r2 = fit_zm(points)
    assert r1.params == r2.params
    assert r1.rss == r2.rss


# ---------------------------------------------------- confidence intervals


def test_ci_nearly_zero_width_on_noiseless_fit():
    true = ZMParams(alpha=100.0, beta=5.0, gamma=1.5)
    result = fit_zm(synthetic_points(true, range(1, 201)))
    for lo, hi in result.ci.values():
        assert hi - lo < 1e-6


def test_ci_contains_point_estimate():
    rng = np.random.default_rng(29)
    true = ZMParams(alpha=200.0, beta=10.0, gamma=1.4)
    sizes = [zm_eval(true, r) * (1 + 0.02 * rng.standard_normal()) for r in range(1, 201)]
    result = fit_zm(list(zip(range(1, 201), sizes)))
    for name, (lo, hi) in result.ci.items():
        point = getattr(result.params, name)
        assert lo <= point <= hi


def test_ci_level_nesting():
    rng = np.random.default_rng(31)
    true = ZMParams(alpha=200.0, beta=10.0, gamma=1.4)
    sizes = [zm_eval(true, r) * (1 + 0.02 * rng.standard_normal()) for r in range(1, 201)]
    points = list(zip(range(1, 201), sizes))
    fit95 = fit_zm(points, level=0.95)
    fit99 = fit_zm(points, level=0.99)
    for name in fit95.ci:
        lo95, hi95 = fit95.ci[name]
        lo99, hi99 = fit99.ci[name]
        assert lo99 < lo95 and hi99 > hi95


def test_ci_singular_covariance_raises():
    true = ZMParams(alpha=100.0, beta=5.0, gamma=1.5)
    result = fit_zm(synthetic_points(true, range(1, 51)))
    internals = result.internals
    broken = type(internals)(
        params=internals.params,
        jacobian=np.ones_like(internals.jacobian),  # perfectly collinear columns
        residuals=internals.residuals,
        n_points=internals.n_points,
    )
    with pytest.raises(UnidentifiableParameterError):
        confidence_intervals(broken, 0.95)


def test_fit_nonconvergence_carries_diagnostics():
    from hapaxchain.ranksize import FitConvergenceError

    true = ZMParams(alpha=6.029e8, beta=2540.0, gamma=1.896)
    points = synthetic_points(true, np.unique(np.geomspace(1, 31074, 300).astype(int)))
    with pytest.raises(FitConvergenceError) as err:
        fit_zm(points, config=FitConfig(max_iter=3))
    assert err.value.n_iter == 3
    assert err.value.best_params.alpha > 0
