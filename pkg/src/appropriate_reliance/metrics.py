"""Appropriate-reliance metrics and the random-baseline diagnosis.

RAIR (relative positive AI reliance) is the share of positive-advice trials
in which the human switched to the correct advice; RSR (relative positive
self-reliance) is the share of negative-advice trials in which the human kept
the correct initial decision. Both are exact rationals; an empty denominator
yields an undefined value rather than zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Optional, Sequence, Union

from .errors import DomainError
from .trials import OutcomeCounts, Trial, count_outcomes

Number = Union[Fraction, float, int]


@dataclass(frozen=True)
class MetricValue:
    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator < 0 or self.numerator < 0:
            raise ValueError("metric counts must be non-negative")
        if self.numerator > self.denominator:
            raise ValueError("numerator exceeds denominator")

    @property
    def defined(self) -> bool:
        return self.denominator > 0

    @property
    def value(self) -> Optional[Fraction]:
        """The exact ratio, or ``None`` when undefined."""
        if not self.denominator:
            return None
        return Fraction(self.numerator, self.denominator)

    def as_float(self) -> Optional[float]:
        v = self.value
        return None if v is None else float(v)

    def __str__(self) -> str:
        v = self.value
        return "undefined" if v is None else f"{float(v):.4f} ({self.numerator}/{self.denominator})"


UNDEFINED = MetricValue(0, 0)


@dataclass(frozen=True)
class RelianceScores:
    rair: MetricValue
    rsr: MetricValue
    advice_utilization: MetricValue
    initial_accuracy: MetricValue
    final_accuracy: MetricValue
    ai_accuracy: MetricValue


class RairStatus(enum.Enum):
    UNDER_RELIANCE = "under_reliance"
    ABOVE_BASELINE = "above_baseline"
    UNDEFINED = "undefined"


class RsrStatus(enum.Enum):
    OVER_RELIANCE = "over_reliance"
    ABOVE_BASELINE = "above_baseline"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class RelianceDiagnosis:
    threshold: Number
    rair_status: RairStatus
    rsr_status: RsrStatus
    appropriate: Optional[bool]  # None when either metric is undefined

    def as_dict(self) -> dict:
        return {
            "threshold": float(self.threshold),
            "rair_status": self.rair_status.value,
            "rsr_status": self.rsr_status.value,
            "appropriate": self.appropriate,
        }


def rair(c: OutcomeCounts) -> MetricValue:
    return MetricValue(c.n_pos_ai_reliance, c.n_pos_ai_reliance + c.n_neg_self_reliance)


def rsr(c: OutcomeCounts) -> MetricValue:
    return MetricValue(c.n_pos_self_reliance, c.n_pos_self_reliance + c.n_neg_ai_reliance)


def advice_utilization(c: OutcomeCounts) -> MetricValue:
    """Share of positive/negative-advice trials whose final decision took the
    advice. The classification analogue of weight on advice: it ignores
    whether the advice was right."""
    return MetricValue(c.n_pos_ai_reliance + c.n_neg_ai_reliance, c.n_contradiction)


def accuracies(trials: Sequence[Trial]) -> tuple[MetricValue, MetricValue, MetricValue]:
    """Return ``(initial, final, ai)`` accuracy over ``trials``.

    An empty list gives three undefined values.
    """
    n = len(trials)
    initial = sum(t.initial_correct for t in trials)
    final = sum(t.final_correct for t in trials)
    ai = sum(t.advice_correct for t in trials)
    return MetricValue(initial, n), MetricValue(final, n), MetricValue(ai, n)


def scores_from_counts(
    c: OutcomeCounts,
    acc: tuple[MetricValue, MetricValue, MetricValue] = (UNDEFINED, UNDEFINED, UNDEFINED),
) -> RelianceScores:
    return RelianceScores(rair(c), rsr(c), advice_utilization(c), *acc)


def compute_scores(trials: Sequence[Trial], labels=None) -> RelianceScores:
    """All metrics of one unit (participant, condition or whole log)."""
    trials = list(trials)
    return scores_from_counts(count_outcomes(trials, labels), accuracies(trials))


BASELINE_MODELS = ("keep_switch", "uniform_label")


def random_baseline(k: int, model: str = "keep_switch") -> Fraction:
    """Expected RAIR/RSR of a human who decides at random.

    ``keep_switch`` flips a fair coin between keeping the initial decision and
    adopting the advice, which gives 1/2 for every label-set size.
    ``uniform_label`` picks the final label uniformly from all ``k`` labels,
    which gives 1/k.
    """
    if isinstance(k, bool) or not isinstance(k, int):
        raise DomainError(f"label-set size must be an integer, got {k!r}")
    if k < 2:
        raise DomainError(f"label-set size must be at least 2, got {k}")
    if model == "keep_switch":
        return Fraction(1, 2)
    if model == "uniform_label":
        return Fraction(1, k)
    raise DomainError(f"unknown baseline model {model!r}; expected one of {BASELINE_MODELS}")


def _as_optional_number(v) -> Optional[Number]:
    if isinstance(v, MetricValue):
        return v.value
    if v is None:
        return None
    if isinstance(v, Real):
        return v
    raise TypeError(f"expected MetricValue, number or None, got {type(v).__name__}")


def diagnose_values(rair_value, rsr_value, threshold: Number) -> RelianceDiagnosis:
    """Diagnosis from raw metric values (``MetricValue``, a number or ``None``).

    A metric must be strictly greater than ``threshold`` to count as above
    baseline; equality is under- (RAIR) or over-reliance (RSR).
    """
    if not 0 <= threshold <= 1:
        raise DomainError(f"threshold must lie in [0, 1], got {threshold}")
    a = _as_optional_number(rair_value)
    b = _as_optional_number(rsr_value)
    if a is None:
        rair_status = RairStatus.UNDEFINED
    else:
        rair_status = RairStatus.ABOVE_BASELINE if a > threshold else RairStatus.UNDER_RELIANCE
    if b is None:
        rsr_status = RsrStatus.UNDEFINED
    else:
        rsr_status = RsrStatus.ABOVE_BASELINE if b > threshold else RsrStatus.OVER_RELIANCE
    if a is None or b is None:
        appropriate = None
    else:
        appropriate = (rair_status is RairStatus.ABOVE_BASELINE
                       and rsr_status is RsrStatus.ABOVE_BASELINE)
    return RelianceDiagnosis(threshold, rair_status, rsr_status, appropriate)


def diagnose(scores: RelianceScores, threshold: Number) -> RelianceDiagnosis:
    return diagnose_values(scores.rair, scores.rsr, threshold)
