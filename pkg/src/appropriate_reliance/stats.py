"""Per-participant aggregation and inference for reliance metrics."""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError, PreconditionError
from .metrics import MetricValue, RelianceScores, compute_scores
from .simulator import DESIGN_FIELDS, SimConfig, derive_seed, simulate_study
from .trials import Trial

# --------------------------------------------------------------------------
# Student t distribution

_BETACF_EPS = 1e-16
_BETACF_TINY = 1e-300
_BETACF_MAXITER = 10_000


def _betacf(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_TINY:
        d = _BETACF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_TINY:
            d = _BETACF_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETACF_TINY:
            c = _BETACF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_TINY:
            d = _BETACF_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETACF_TINY:
            c = _BETACF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge "
                          f"(a={a}, b={b}, x={x})")


_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156)


def _stirling_correction(x: float) -> float:
    # lgamma(x) - [(x - 1/2) ln x - x + ln(2 pi) / 2], valid for x >= 20.
    inv, inv2 = 1.0 / x, 1.0 / (x * x)
    total, power = 0.0, inv
    for c in _STIRLING:
        total += c * power
        power *= inv2
    return total


def _log_beta(a: float, b: float) -> float:
    small, big = min(a, b), max(a, b)
    if big < 20.0:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    # lgamma(big + small) - lgamma(big) without cancellation.
    ratio = ((big - 0.5) * math.log1p(small / big) + small * math.log(big + small) - small
             + _stirling_correction(big + small) - _stirling_correction(big))
    return math.lgamma(small) - ratio


def regularized_incomplete_beta(x: float, a: float, b: float,
                                complement: Optional[float] = None) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1.

    ``complement`` may carry ``1 - x`` computed without cancellation.
    """
    if a <= 0 or b <= 0:
        raise DomainError("beta parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    y = 1.0 - x if complement is None else complement
    if x == 0.0 or y == 0.0:
        return 0.0 if x == 0.0 else 1.0
    log_x = math.log1p(-y) if y < 0.5 else math.log(x)
    log_y = math.log1p(-x) if x < 0.5 else math.log(y)
    log_front = a * log_x + b * log_y - _log_beta(a, b)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


_ASYMPTOTIC_DF = 1e7


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    if df > _ASYMPTOTIC_DF:
        # Upper tail = Phi(-|t|) + phi(t) (|t| + |t|^3) / (4 df) + O(df^-2).
        at = abs(t)
        tail = 0.5 * math.erfc(at / math.sqrt(2.0))
        tail += math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi) * (at + at ** 3) / (4.0 * df)
        return min(1.0, 2.0 * tail)
    t2 = t * t
    return regularized_incomplete_beta(df / (df + t2), df / 2.0, 0.5,
                                       complement=t2 / (df + t2))


def t_cdf(t: float, df: float) -> float:
    tail = 0.5 * t_two_sided_p(t, df)
    return 1.0 - tail if t >= 0 else tail


# --------------------------------------------------------------------------
# Two-sample tests


@dataclass(frozen=True)
class ComparisonResult:
    metric_name: str
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    group_means: tuple[float, float]
    group_ns: tuple[int, int]
    test: str = "welch"
    groups: tuple[str, str] = ("a", "b")

    def as_dict(self) -> dict:
        return {
            "metric": self.metric_name,
            "test": self.test,
            "groups": list(self.groups),
            "t_statistic": self.t_statistic,
            "degrees_of_freedom": self.degrees_of_freedom,
            "p_value": self.p_value,
            "group_means": list(self.group_means),
            "group_ns": list(self.group_ns),
        }


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def _sample_var(xs: Sequence[float], mean: float) -> float:
    if min(xs) == max(xs):
        return 0.0
    return math.fsum((x - mean) ** 2 for x in xs) / (len(xs) - 1)


def _prepare(a, b) -> tuple[list[float], list[float]]:
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    if len(a) < 2 or len(b) < 2:
        raise PreconditionError(f"each sample needs at least 2 values, got {len(a)} and {len(b)}")
    if not all(math.isfinite(x) for x in a + b):
        raise PreconditionError("samples must contain finite values only")
    return a, b


def _finish(metric_name, test, t, df, ma, mb, na, nb, groups) -> ComparisonResult:
    return ComparisonResult(metric_name, t, df, t_two_sided_p(t, df), (ma, mb), (na, nb),
                            test, groups)


def welch_t_test(a: Sequence[float], b: Sequence[float], metric_name: str = "value",
                 groups: tuple[str, str] = ("a", "b")) -> ComparisonResult:
    """Two-sided Welch t-test of mean(a) - mean(b).

    Raises:
        PreconditionError: a sample has fewer than two values, or both samples
            are constant with different means.
    """
    a, b = _prepare(a, b)
    na, nb = len(a), len(b)
    ma, mb = _mean(a), _mean(b)
    wa = _sample_var(a, ma) / na
    wb = _sample_var(b, mb) / nb
    se2 = wa + wb
    if se2 == 0.0:
        if ma == mb:
            return ComparisonResult(metric_name, 0.0, float(na + nb - 2), 1.0,
                                    (ma, mb), (na, nb), "welch", groups)
        raise PreconditionError("both samples have zero variance and different means")
    t = (ma - mb) / math.sqrt(se2)
    # Welch-Satterthwaite, scaled to keep tiny variances from underflowing.
    scale = max(wa, wb)
    ra, rb = wa / scale, wb / scale
    df = (ra + rb) ** 2 / (ra * ra / (na - 1) + rb * rb / (nb - 1))
    return _finish(metric_name, "welch", t, df, ma, mb, na, nb, groups)


def pooled_t_test(a: Sequence[float], b: Sequence[float], metric_name: str = "value",
                  groups: tuple[str, str] = ("a", "b")) -> ComparisonResult:
    """Two-sided Student t-test with pooled variance."""
    a, b = _prepare(a, b)
    na, nb = len(a), len(b)
    ma, mb = _mean(a), _mean(b)
    df = na + nb - 2
    pooled = ((na - 1) * _sample_var(a, ma) + (nb - 1) * _sample_var(b, mb)) / df
    if pooled == 0.0:
        if ma == mb:
            return ComparisonResult(metric_name, 0.0, float(df), 1.0, (ma, mb), (na, nb),
                                    "pooled", groups)
        raise PreconditionError("both samples have zero variance and different means")
    t = (ma - mb) / math.sqrt(pooled * (1.0 / na + 1.0 / nb))
    return _finish(metric_name, "pooled", t, float(df), ma, mb, na, nb, groups)


TESTS = {"welch": welch_t_test, "pooled": pooled_t_test}


def compare(a, b, test: str = "welch", **kwargs) -> ComparisonResult:
    try:
        fn = TESTS[test]
    except KeyError:
        raise ValueError(f"unknown test {test!r}; expected one of {sorted(TESTS)}") from None
    return fn(a, b, **kwargs)


# --------------------------------------------------------------------------
# Aggregation

METRICS = ("rair", "rsr", "utilization", "initial_accuracy", "final_accuracy", "ai_accuracy")
_SCORE_FIELD = {
    "rair": "rair",
    "rsr": "rsr",
    "utilization": "advice_utilization",
    "initial_accuracy": "initial_accuracy",
    "final_accuracy": "final_accuracy",
    "ai_accuracy": "ai_accuracy",
}


def metric_of(scores: RelianceScores, metric: str) -> MetricValue:
    try:
        return getattr(scores, _SCORE_FIELD[metric])
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}") from None


@dataclass(frozen=True)
class AggregateResult:
    metric_name: str
    mode: str
    mean: Optional[float]
    std_error: Optional[float]
    n_units: int
    per_unit_values: tuple[tuple[str, float], ...] = ()
    excluded: tuple[str, ...] = ()
    pooled: Optional[MetricValue] = None  # micro mode only

    @property
    def defined(self) -> bool:
        return self.mean is not None

    def as_dict(self) -> dict:
        d = {
            "metric": self.metric_name,
            "mode": self.mode,
            "mean": self.mean,
            "std_error": self.std_error,
            "n_units": self.n_units,
            "per_unit_values": [[pid, v] for pid, v in self.per_unit_values],
            "excluded": list(self.excluded),
        }
        if self.pooled is not None:
            d["pooled"] = {"numerator": self.pooled.numerator,
                           "denominator": self.pooled.denominator}
        return d


def group_by_participant(trials: Sequence[Trial]) -> dict[str, list[Trial]]:
    groups: dict[str, list[Trial]] = defaultdict(list)
    for t in trials:
        groups[t.participant_id].append(t)
    return {pid: groups[pid] for pid in sorted(groups)}


def per_participant_scores(trials: Sequence[Trial], labels=None) -> dict[str, RelianceScores]:
    return {pid: compute_scores(ts, labels) for pid, ts in group_by_participant(trials).items()}


def summarize(values: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    """Mean and standard error (sample std / sqrt n) of ``values``.

    SE is ``None`` below two values; the mean is ``None`` for an empty list.
    """
    n = len(values)
    if n == 0:
        return None, None
    mean = min(max(_mean(values), min(values)), max(values))
    if n < 2:
        return mean, None
    return mean, math.sqrt(_sample_var(values, mean) / n)


def aggregate_scores(scores: dict[str, RelianceScores], metric: str,
                     mode: str = "macro") -> AggregateResult:
    per_unit = []
    excluded = []
    for pid in sorted(scores):
        mv = metric_of(scores[pid], metric)
        if mv.defined:
            per_unit.append((pid, float(mv.value)))
        else:
            excluded.append(pid)
    if mode == "macro":
        mean, se = summarize([v for _, v in per_unit])
        return AggregateResult(metric, mode, mean, se, len(per_unit),
                               tuple(per_unit), tuple(excluded))
    if mode == "micro":
        num = sum(metric_of(s, metric).numerator for s in scores.values())
        den = sum(metric_of(s, metric).denominator for s in scores.values())
        pooled = MetricValue(num, den)
        return AggregateResult(metric, mode, pooled.as_float(), None, len(per_unit),
                               tuple(per_unit), tuple(excluded), pooled)
    raise ValueError(f"unknown aggregation mode {mode!r}; expected 'macro' or 'micro'")


def aggregate(trials: Sequence[Trial], metric: str, mode: str = "macro",
              labels=None) -> AggregateResult:
    """Aggregate ``metric`` over the participants in ``trials``.

    ``macro`` averages per-participant values (participants with an undefined
    value are excluded and listed); ``micro`` pools the counts of everybody
    and reports no standard error.
    """
    return aggregate_scores(per_participant_scores(trials, labels), metric, mode)


# --------------------------------------------------------------------------
# Bootstrap


def _resample_mean(values: np.ndarray, seed: int, index: int) -> float:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    picks = values[rng.integers(0, values.size, size=values.size)]
    return math.fsum(picks.tolist()) / values.size


def bootstrap_means(values: Sequence[float], n_resamples: int, seed: int,
                    n_workers: int = 1) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    indices = range(n_resamples)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            means = list(pool.map(lambda i: _resample_mean(arr, seed, i), indices))
    else:
        means = [_resample_mean(arr, seed, i) for i in indices]
    return np.asarray(means)


def bootstrap_ci(values: Sequence[float], level: float = 0.95, n_resamples: int = 2000,
                 seed: int = 0, n_workers: int = 1) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean.

    Resample ``i`` draws from its own stream ``SeedSequence(seed, (i,))``, so
    the interval does not depend on ``n_workers``.
    """
    if len(values) < 2:
        raise ValueError("bootstrap needs at least 2 values")
    if not 0 < level < 1:
        raise ValueError(f"level must lie strictly between 0 and 1, got {level}")
    if n_resamples < 100:
        raise ValueError(f"n_resamples must be at least 100, got {n_resamples}")
    means = bootstrap_means(values, n_resamples, seed, n_workers)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [tail, 1.0 - tail])
    return float(lo), float(hi)


# --------------------------------------------------------------------------
# Power


@dataclass(frozen=True)
class PowerEstimate:
    null_config: SimConfig
    alt_config: SimConfig
    alpha: float
    power: float
    n_replications: int
    seed: int
    metric: str = "rair"
    test: str = "welch"
    n_rejections: int = 0
    n_skipped: int = 0

    def as_dict(self) -> dict:
        return {
            "schema": "ar-power/1",
            "metric": self.metric,
            "test": self.test,
            "alpha": self.alpha,
            "power": self.power,
            "n_replications": self.n_replications,
            "n_rejections": self.n_rejections,
            "n_skipped": self.n_skipped,
            "seed": self.seed,
            "null_config": self.null_config.to_dict(),
            "alt_config": self.alt_config.to_dict(),
        }


def _replicate(null_cfg: SimConfig, alt_cfg: SimConfig, metric: str, test: str,
               alpha: float, seed: int, r: int) -> Optional[bool]:
    a = simulate_study(null_cfg.replace(seed=derive_seed(seed, r, 0))).participant_metric(metric)
    b = simulate_study(alt_cfg.replace(seed=derive_seed(seed, r, 1))).participant_metric(metric)
    try:
        result = compare(a[~np.isnan(a)].tolist(), b[~np.isnan(b)].tolist(), test)
    except PreconditionError:
        return None
    return result.p_value < alpha


def power_estimate(null_cfg: SimConfig, alt_cfg: SimConfig, alpha: float = 0.05,
                   n_replications: int = 1000, seed: int = 0, metric: str = "rair",
                   test: str = "welch", n_workers: int = 1) -> PowerEstimate:
    """Simulated rejection rate of a two-condition comparison.

    Every replication simulates one study per config from seeds derived from
    ``(seed, replication)`` and tests the per-participant ``metric``.
    Replications where the test preconditions fail count as non-rejections
    and are reported in ``n_skipped``.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    if n_replications < 100:
        raise ValueError(f"n_replications must be at least 100, got {n_replications}")
    if metric not in ("rair", "rsr", "utilization"):
        raise ValueError(f"power analysis supports rair, rsr and utilization, not {metric!r}")
    if test not in TESTS:
        raise ValueError(f"unknown test {test!r}")
    for name in DESIGN_FIELDS:
        if getattr(null_cfg, name) != getattr(alt_cfg, name):
            raise ConfigError(f"null and alternative designs differ in {name}")

    def run(r: int) -> Optional[bool]:
        return _replicate(null_cfg, alt_cfg, metric, test, alpha, seed, r)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(run, range(n_replications)))
    else:
        outcomes = [run(r) for r in range(n_replications)]
    rejections = sum(1 for o in outcomes if o)
    skipped = sum(1 for o in outcomes if o is None)
    return PowerEstimate(null_cfg, alt_cfg, alpha, rejections / n_replications,
                         n_replications, seed, metric, test, rejections, skipped)
