"""Trial records and their classification into reliance outcomes.

A trial is one sequential decision: the human decides, sees the AI advice and
decides again. Whether advice confirms or contradicts the initial decision,
and whether the final decision ends up correct, determines the outcome class
used by the reliance metrics::

    initial    advice     relation       final      reliance
    correct    correct    confirmation   any        n/a
    incorrect  incorrect  confirmation   any        n/a
    incorrect  correct    positive       correct    positive AI reliance
    incorrect  correct    positive       incorrect  negative self-reliance
    correct    incorrect  negative       correct    positive self-reliance
    correct    incorrect  negative       incorrect  negative AI reliance

With more than two labels, advice can contradict an incorrect initial
decision with another incorrect label; that case is a neutral contradiction
and carries no reliance information.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, fields
from typing import AbstractSet, Iterable, Optional, Sequence

from .errors import SchemaError, UnknownLabelError

LABEL_FIELDS = ("ground_truth", "initial_decision", "advice", "final_decision")


@dataclass(frozen=True)
class Trial:
    participant_id: str
    condition_id: str
    trial_id: str
    ground_truth: str
    initial_decision: str
    advice: str
    final_decision: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.participant_id, self.trial_id)

    @property
    def initial_correct(self) -> bool:
        return self.initial_decision == self.ground_truth

    @property
    def advice_correct(self) -> bool:
        return self.advice == self.ground_truth

    @property
    def final_correct(self) -> bool:
        return self.final_decision == self.ground_truth


class AdviceRelation(enum.Enum):
    CONFIRMATION = "confirmation"
    POSITIVE_ADVICE = "positive_advice"
    NEGATIVE_ADVICE = "negative_advice"
    NEUTRAL_CONTRADICTION = "neutral_contradiction"


class RelianceClass(enum.Enum):
    POSITIVE_AI_RELIANCE = "positive_ai_reliance"
    NEGATIVE_SELF_RELIANCE = "negative_self_reliance"
    POSITIVE_SELF_RELIANCE = "positive_self_reliance"
    NEGATIVE_AI_RELIANCE = "negative_ai_reliance"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class OutcomeCounts:
    n_pos_ai_reliance: int = 0
    n_neg_self_reliance: int = 0
    n_pos_self_reliance: int = 0
    n_neg_ai_reliance: int = 0
    n_confirmation_correct: int = 0
    n_confirmation_incorrect: int = 0
    n_neutral_contradiction: int = 0
    n_total: int = 0

    def __post_init__(self) -> None:
        parts = [getattr(self, f.name) for f in fields(self) if f.name != "n_total"]
        if any(v < 0 for v in parts) or self.n_total < 0:
            raise ValueError("outcome counts must be non-negative")
        if sum(parts) != self.n_total:
            raise ValueError(
                f"category counts sum to {sum(parts)}, n_total is {self.n_total}"
            )

    @classmethod
    def from_categories(
        cls,
        pos_ai: int = 0,
        neg_self: int = 0,
        pos_self: int = 0,
        neg_ai: int = 0,
        confirmation_correct: int = 0,
        confirmation_incorrect: int = 0,
        neutral: int = 0,
    ) -> "OutcomeCounts":
        """Build counts from category totals, deriving ``n_total``."""
        parts = (pos_ai, neg_self, pos_self, neg_ai,
                 confirmation_correct, confirmation_incorrect, neutral)
        return cls(*parts, n_total=sum(parts))

    @property
    def n_contradiction(self) -> int:
        """Trials that inform RAIR or RSR (positive or negative advice)."""
        return (self.n_pos_ai_reliance + self.n_neg_self_reliance
                + self.n_pos_self_reliance + self.n_neg_ai_reliance)

    def __add__(self, other: "OutcomeCounts") -> "OutcomeCounts":
        if not isinstance(other, OutcomeCounts):
            return NotImplemented
        return OutcomeCounts(*(getattr(self, f.name) + getattr(other, f.name)
                               for f in fields(self)))

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate_trial(t: Trial, labels: Optional[AbstractSet[str]] = None) -> None:
    """Raise :class:`SchemaError` if ``t`` is malformed.

    Label fields must be strings; when ``labels`` is given each of them must
    belong to it.
    """
    for name in LABEL_FIELDS:
        value = getattr(t, name)
        if not isinstance(value, str) or value == "":
            raise SchemaError(f"label must be a non-empty string, got {value!r}",
                              column=name, trial_id=t.trial_id)
        if labels is not None and value not in labels:
            raise UnknownLabelError(f"label {value!r} is not in the label set",
                                    column=name, trial_id=t.trial_id)


def advice_relation(t: Trial, labels: Optional[AbstractSet[str]] = None) -> AdviceRelation:
    validate_trial(t, labels)
    if t.advice == t.initial_decision:
        return AdviceRelation.CONFIRMATION
    if t.advice_correct:
        return AdviceRelation.POSITIVE_ADVICE
    if t.initial_correct:
        return AdviceRelation.NEGATIVE_ADVICE
    return AdviceRelation.NEUTRAL_CONTRADICTION


def classify_trial(t: Trial, labels: Optional[AbstractSet[str]] = None) -> RelianceClass:
    """Map a trial to its reliance class.

    Negative-advice trials are keyed on final correctness alone, so a final
    decision that is a third, incorrect label still counts as negative AI
    reliance. :func:`is_third_label_switch` detects those trials.
    """
    relation = advice_relation(t, labels)
    if relation is AdviceRelation.POSITIVE_ADVICE:
        return (RelianceClass.POSITIVE_AI_RELIANCE if t.final_correct
                else RelianceClass.NEGATIVE_SELF_RELIANCE)
    if relation is AdviceRelation.NEGATIVE_ADVICE:
        return (RelianceClass.POSITIVE_SELF_RELIANCE if t.final_correct
                else RelianceClass.NEGATIVE_AI_RELIANCE)
    return RelianceClass.NOT_APPLICABLE


def is_third_label_switch(t: Trial) -> bool:
    """True for a contradiction trial whose final decision is neither the
    initial decision nor the advice (only possible with k > 2)."""
    return (t.advice != t.initial_decision
            and t.final_decision not in (t.initial_decision, t.advice))


_CLASS_FIELD = {
    RelianceClass.POSITIVE_AI_RELIANCE: "pos_ai",
    RelianceClass.NEGATIVE_SELF_RELIANCE: "neg_self",
    RelianceClass.POSITIVE_SELF_RELIANCE: "pos_self",
    RelianceClass.NEGATIVE_AI_RELIANCE: "neg_ai",
}


def count_outcomes(trials: Iterable[Trial],
                   labels: Optional[AbstractSet[str]] = None) -> OutcomeCounts:
    tally: Counter[str] = Counter()
    for t in trials:
        relation = advice_relation(t, labels)
        if relation is AdviceRelation.CONFIRMATION:
            tally["confirmation_correct" if t.initial_correct
                  else "confirmation_incorrect"] += 1
        elif relation is AdviceRelation.NEUTRAL_CONTRADICTION:
            tally["neutral"] += 1
        else:
            tally[_CLASS_FIELD[classify_trial(t)]] += 1
    return OutcomeCounts.from_categories(**tally)


def label_set(trials: Iterable[Trial]) -> frozenset[str]:
    """Union of every label observed in ``trials``."""
    out: set[str] = set()
    for t in trials:
        out.update(getattr(t, name) for name in LABEL_FIELDS)
    return frozenset(out)


def check_unique_keys(trials: Sequence[Trial]) -> None:
    seen: dict[tuple[str, str], int] = {}
    for i, t in enumerate(trials):
        if t.key in seen:
            raise SchemaError(f"duplicate (participant_id, trial_id) key {t.key!r} "
                              f"at positions {seen[t.key]} and {i}",
                              trial_id=t.trial_id)
        seen[t.key] = i
