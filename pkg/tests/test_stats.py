import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from appropriate_reliance import (ConfigError, PreconditionError, SimConfig, aggregate,
                                  bootstrap_ci, pooled_t_test, power_estimate, welch_t_test)
from appropriate_reliance.stats import (regularized_incomplete_beta, summarize, t_cdf,
                                        t_two_sided_p)

from oracles import trials_from_counts


# --------------------------------------------------------------------------
# t distribution

# Two-sided 5% and 1% critical values (six-decimal table entries).
CRITICAL = [(5, 2.570582, 4.032143), (30, 2.042272, 2.749996), (100, 1.983972, 2.625891)]


@pytest.mark.parametrize("df,t05,t01", CRITICAL)
def test_tabulated_critical_values(df, t05, t01):
    assert abs(t_two_sided_p(t05, df) - 0.05) < 1e-6
    assert abs(t_two_sided_p(t01, df) - 0.01) < 1e-6


@pytest.mark.parametrize("df", [0.5, 1, 2.5, 5, 17.3, 20, 30, 100, 1e4, 1e6, 1e7, 1e9, 1e12])
@pytest.mark.parametrize("t", [0.0, 1e-9, 0.01, 0.5, 1.0, 1.96, 3.0, 8.0, 40.0])
def test_t_cdf_against_scipy(t, df):
    assert abs(t_cdf(t, df) - sps.t.cdf(t, df)) < 1e-10
    assert abs(t_cdf(-t, df) - sps.t.cdf(-t, df)) < 1e-10


@pytest.mark.parametrize("x,a,b", [(0.3, 0.5, 2.0), (0.9, 3.0, 0.5), (0.5, 10.0, 10.0),
                                   (1e-8, 2.0, 3.0), (0.999, 50.0, 0.5)])
def test_incomplete_beta_against_scipy(x, a, b):
    from scipy.special import betainc
    assert abs(regularized_incomplete_beta(x, a, b) - betainc(a, b, x)) < 1e-12


def test_t_p_infinite():
    assert t_two_sided_p(math.inf, 3) == 0.0


# --------------------------------------------------------------------------
# Welch / pooled


def test_welch_identical_samples():
    r = welch_t_test([0.2, 0.5, 0.9], [0.2, 0.5, 0.9])
    assert r.t_statistic == 0.0
    assert r.p_value == 1.0


def test_welch_hand_computed():
    # a: mean 2, var 1; b: mean 2.5, var 5/3.  se^2 = 1/3 + 5/12 = 3/4,
    # t = -0.5 / sqrt(3/4) = -1/sqrt(3), df = (3/4)^2 / ((1/3)^2/2 + (5/12)^2/3) = 243/49.
    r = welch_t_test([1, 2, 3], [1, 2, 3, 4])
    assert r.t_statistic == pytest.approx(-1 / math.sqrt(3), abs=1e-12)
    assert r.degrees_of_freedom == pytest.approx(243 / 49, abs=1e-12)
    # Two-sided p at t = -1/sqrt(3), df = 243/49 (scipy.stats.t.sf reference).
    assert r.p_value == pytest.approx(0.5889215492858255, abs=1e-10)
    assert r.group_means == (2.0, 2.5)
    assert r.group_ns == (3, 4)


def test_pooled_hand_computed():
    # pooled var = (2 + 5) / 5 = 1.4; t = -0.5 / sqrt(1.4 * 7/12).
    r = pooled_t_test([1, 2, 3], [1, 2, 3, 4])
    assert r.t_statistic == pytest.approx(-0.5 / math.sqrt(1.4 * 7 / 12), abs=1e-12)
    assert r.degrees_of_freedom == 5
    assert r.p_value == pytest.approx(0.603896897689733, abs=1e-10)


def test_welch_undersized():
    with pytest.raises(PreconditionError):
        welch_t_test([1.0], [1.0, 2.0])


def test_welch_constant_different_means():
    with pytest.raises(PreconditionError):
        welch_t_test([0.5, 0.5], [0.7, 0.7, 0.7])


def test_welch_constant_equal_means():
    r = welch_t_test([0.5, 0.5], [0.5, 0.5, 0.5])
    assert (r.t_statistic, r.p_value) == (0.0, 1.0)


sample = st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=2, max_size=30)


@settings(max_examples=200)
@given(sample, sample)
def test_welch_matches_scipy_and_is_antisymmetric(a, b):
    try:
        ab = welch_t_test(a, b)
    except PreconditionError:
        return
    ba = welch_t_test(b, a)
    assert ba.t_statistic == -ab.t_statistic
    assert ba.p_value == ab.p_value
    assert ba.degrees_of_freedom == ab.degrees_of_freedom
    if np.var(a) > 1e-12 and np.var(b) > 1e-12:
        ref = sps.ttest_ind(a, b, equal_var=False)
        assert ab.t_statistic == pytest.approx(ref.statistic, rel=1e-9, abs=1e-9)
        assert ab.p_value == pytest.approx(ref.pvalue, rel=1e-7, abs=1e-10)


def test_p_decreases_with_mean_difference():
    base = np.array([0.1, 0.4, 0.35, 0.6, 0.5, 0.2])
    ps = [welch_t_test(base, base + shift).p_value for shift in np.linspace(0, 1, 21)]
    assert all(later <= earlier for earlier, later in zip(ps, ps[1:]))
    assert ps[0] == 1.0 and ps[-1] < 1e-4


# --------------------------------------------------------------------------
# Aggregation


def _log(per_participant):
    trials = []
    for i, c in enumerate(per_participant):
        trials += trials_from_counts(*c, pid=f"p{i}", seed=i)
    return trials


def test_aggregate_constant():
    r = aggregate(_log([(1, 1, 0, 0)] * 3), "rair")
    assert (r.mean, r.std_error, r.n_units) == (0.5, 0.0, 3)


def test_aggregate_zero_one():
    # values {0, 1}: sample std sqrt(0.5), SE sqrt(0.5)/sqrt(2) = 0.5.
    r = aggregate(_log([(0, 2, 0, 0), (3, 0, 0, 0)]), "rair")
    assert r.mean == 0.5
    assert r.std_error == pytest.approx(0.5, abs=1e-15)


def test_aggregate_exclusion():
    r = aggregate(_log([(1, 1, 0, 0), (0, 0, 2, 0)]), "rair")
    assert r.n_units == 1
    assert r.excluded == ("p1",)
    assert r.std_error is None


def test_aggregate_all_undefined():
    r = aggregate(_log([(0, 0, 1, 0)]), "rair")
    assert r.mean is None and not r.defined


def test_aggregate_micro_pools_counts():
    r = aggregate(_log([(1, 0, 0, 0), (1, 3, 0, 0)]), "rair", mode="micro")
    assert r.mean == 0.4
    assert r.std_error is None
    assert (r.pooled.numerator, r.pooled.denominator) == (2, 5)


def test_aggregate_unknown_metric():
    with pytest.raises(ValueError):
        aggregate(_log([(1, 0, 0, 0)]), "weight_on_advice")


@given(st.lists(st.tuples(*[st.integers(0, 6)] * 4), min_size=1, max_size=8), st.randoms())
def test_aggregate_permutation_invariant(per_participant, rnd):
    shuffled = list(per_participant)
    rnd.shuffle(shuffled)
    a = aggregate(_log(per_participant), "rsr")
    b = aggregate(_log(shuffled), "rsr")
    assert (a.mean, a.std_error, a.n_units) == (b.mean, b.std_error, b.n_units)
    if a.defined:
        values = [v for _, v in a.per_unit_values]
        assert min(values) <= a.mean <= max(values)


def test_summarize_edge_cases():
    assert summarize([]) == (None, None)
    assert summarize([0.3]) == (0.3, None)


# --------------------------------------------------------------------------
# Bootstrap


def test_bootstrap_constant():
    lo, hi = bootstrap_ci([0.7] * 20, seed=3)
    assert lo == pytest.approx(0.7, abs=1e-15) and hi == pytest.approx(0.7, abs=1e-15)


def test_bootstrap_deterministic_and_worker_independent():
    values = list(np.linspace(0, 1, 37) ** 2)
    a = bootstrap_ci(values, 0.9, 500, seed=11)
    assert a == bootstrap_ci(values, 0.9, 500, seed=11)
    assert a == bootstrap_ci(values, 0.9, 500, seed=11, n_workers=4)
    assert a != bootstrap_ci(values, 0.9, 500, seed=12)


def test_bootstrap_balanced_binary_against_binomial():
    # Resampling 100 values from fifty 0s and fifty 1s gives Binomial(100, 1/2) / 100.
    lo, hi = bootstrap_ci([0.0, 1.0] * 50, 0.95, 4000, seed=5)
    assert lo <= 0.5 <= hi
    assert sps.binom.ppf(0.015, 100, 0.5) / 100 <= lo <= sps.binom.ppf(0.035, 100, 0.5) / 100
    assert sps.binom.ppf(0.965, 100, 0.5) / 100 <= hi <= sps.binom.ppf(0.985, 100, 0.5) / 100
    expected_width = (sps.binom.ppf(0.975, 100, 0.5) - sps.binom.ppf(0.025, 100, 0.5)) / 100
    assert hi - lo == pytest.approx(expected_width, abs=0.03)


def _exact_resample_means(values):
    n = len(values)
    return np.sort([sum(values[i] for i in idx) / n
                    for idx in itertools.product(range(n), repeat=n)])


@pytest.mark.parametrize("values", [[0.0, 0.25, 1.0, 0.5, 0.75], [0.1, 0.9, 0.2, 0.3, 0.3, 0.6]])
def test_bootstrap_against_exhaustive_resampling(values):
    exact = _exact_resample_means(values)
    lo, hi = bootstrap_ci(values, 0.9, 5000, seed=2)
    assert np.quantile(exact, 0.04) <= lo <= np.quantile(exact, 0.06)
    assert np.quantile(exact, 0.94) <= hi <= np.quantile(exact, 0.96)


@pytest.mark.parametrize("kwargs", [dict(values=[1.0]), dict(level=1.0), dict(level=0.0),
                                    dict(n_resamples=99)])
def test_bootstrap_preconditions(kwargs):
    args = dict(values=[0.1, 0.2, 0.3], level=0.95, n_resamples=200, seed=0)
    args.update(kwargs)
    with pytest.raises(ValueError):
        bootstrap_ci(**args)


# --------------------------------------------------------------------------
# Power

DESIGN = SimConfig(n_participants=30, n_trials=16, human_accuracy=0.5, ai_accuracy=0.5,
                   follow_when_judged_correct=0.5, follow_when_judged_incorrect=0.5)


def test_power_deterministic_and_worker_independent():
    alt = DESIGN.replace(follow_when_judged_correct=0.7, follow_when_judged_incorrect=0.7)
    a = power_estimate(DESIGN, alt, n_replications=100, seed=9)
    assert a == power_estimate(DESIGN, alt, n_replications=100, seed=9)
    assert a == power_estimate(DESIGN, alt, n_replications=100, seed=9, n_workers=3)
    assert a.power == a.n_rejections / 100


def test_power_huge_effect():
    null = DESIGN.replace(n_participants=100, follow_when_judged_correct=0.1,
                          follow_when_judged_incorrect=0.1)
    alt = null.replace(follow_when_judged_correct=0.9, follow_when_judged_incorrect=0.9)
    est = power_estimate(null, alt, alpha=0.05, n_replications=1000, seed=4)
    assert est.power > 0.99


def test_power_rejects_design_mismatch():
    with pytest.raises(ConfigError):
        power_estimate(DESIGN, DESIGN.replace(n_trials=20), n_replications=100)


@pytest.mark.parametrize("kwargs", [dict(alpha=0), dict(n_replications=10), dict(metric="ai_accuracy")])
def test_power_argument_errors(kwargs):
    with pytest.raises(ValueError):
        power_estimate(DESIGN, DESIGN, **kwargs)
