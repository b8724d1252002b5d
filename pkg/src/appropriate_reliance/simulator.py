"""Monte Carlo judge-advisor simulator.

Each synthetic participant works through ``n_trials`` classification tasks:

1. ground truth is uniform over the ``k`` labels;
2. the initial decision is correct with probability ``human_accuracy``,
   otherwise uniform over the wrong labels;
3. the advice is correct with probability ``ai_accuracy``, otherwise uniform
   over the wrong labels and systematic with probability
   ``systematic_error_fraction``;
4. when advice contradicts the initial decision the human judges whether the
   advice is correct. Correct advice is judged correct with probability
   ``discrimination_pos``, systematic errors are recognised with probability
   ``discrimination_neg`` and random errors (and neutral contradictions) are
   judged at chance;
5. advice judged correct is followed with probability
   ``follow_when_judged_correct``, advice judged incorrect with probability
   ``follow_when_judged_incorrect``; otherwise the initial decision is kept.

Randomness comes from one numpy ``Generator`` per participant, seeded by
``SeedSequence(seed, spawn_key=(participant_index,))``. Each participant draws
a single ``(8, n_trials)`` block of uniforms (one row per random choice, in
the order listed above); all decisions are computed from those blocks, so a
study is reproducible regardless of how participants are scheduled.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError
from .trials import OutcomeCounts, Trial

RANDOM_ERROR_DISCRIMINATION = 0.5

_PROBABILITY_FIELDS = (
    "ai_accuracy",
    "human_accuracy",
    "systematic_error_fraction",
    "discrimination_pos",
    "discrimination_neg",
    "follow_when_judged_correct",
    "follow_when_judged_incorrect",
)

# Fields that fix the shape of a study; the rest are effect parameters.
DESIGN_FIELDS = ("n_participants", "n_trials", "k_labels", "balanced_advice", "labels")


@dataclass(frozen=True)
class SimConfig:
    n_participants: int = 100
    n_trials: int = 16
    k_labels: int = 2
    ai_accuracy: float = 0.5
    human_accuracy: float = 0.5
    systematic_error_fraction: float = 1.0
    discrimination_pos: float = 0.5
    discrimination_neg: float = 0.5
    follow_when_judged_correct: float = 1.0
    follow_when_judged_incorrect: float = 0.0
    seed: int = 0
    condition: str = "sim"
    # Exactly round(ai_accuracy * n_trials) correct advice trials per
    # participant, in shuffled order, instead of independent draws.
    balanced_advice: bool = False
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        for name in ("n_participants", "n_trials"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        if isinstance(self.k_labels, bool) or not isinstance(self.k_labels, int) or self.k_labels < 2:
            raise ConfigError(f"k_labels must be an integer >= 2, got {self.k_labels!r}")
        for name in _PROBABILITY_FIELDS:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be a probability in [0, 1], got {v!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.condition, str) or not self.condition:
            raise ConfigError("condition must be a non-empty string")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.k_labels or len(set(labels)) != len(labels):
                raise ConfigError(f"labels must be {self.k_labels} distinct strings")
            if not all(isinstance(x, str) and x for x in labels):
                raise ConfigError("labels must be non-empty strings")
            object.__setattr__(self, "labels", labels)

    @property
    def label_names(self) -> tuple[str, ...]:
        if self.labels is not None:
            return self.labels
        return tuple(f"c{i}" for i in range(self.k_labels))

    def replace(self, **changes: Any) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        if d["labels"] is not None:
            d["labels"] = list(d["labels"])
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown SimConfig field(s): {', '.join(unknown)}")
        data = dict(data)
        if data.get("labels") is not None:
            data["labels"] = tuple(data["labels"])
        return cls(**data)


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit seed derived deterministically from ``seed`` and ``keys``."""
    state = np.random.SeedSequence(seed, spawn_key=tuple(keys)).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))


def participant_rng(seed: int, participant_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(participant_index,)))


ERROR_NONE, ERROR_SYSTEMATIC, ERROR_RANDOM = 0, 1, 2
_ERROR_NAMES = ("none", "systematic", "random")


# Rows of the per-participant uniform block, drawn in one call.
_U_TRUTH, _U_INITIAL_OK, _U_INITIAL_WRONG, _U_ADVICE_OK, _U_ADVICE_WRONG, \
    _U_SYSTEMATIC, _U_JUDGE, _U_ACT = range(8)
_N_STREAMS = 8


def _participant_uniforms(cfg: SimConfig, index: int) -> np.ndarray:
    return participant_rng(cfg.seed, index).random((_N_STREAMS, cfg.n_trials))


def _wrong_label(truth: np.ndarray, u: np.ndarray, k: int) -> np.ndarray:
    # Uniform over the k - 1 labels other than truth.
    return (truth + 1 + np.floor(u * (k - 1)).astype(np.int64)) % k


def _simulate_arrays(cfg: SimConfig, u: np.ndarray) -> dict[str, np.ndarray]:
    """Apply the generative model to uniforms of shape (streams, participants, trials)."""
    k, n = cfg.k_labels, cfg.n_trials
    truth = np.floor(u[_U_TRUTH] * k).astype(np.int64)
    initial_ok = u[_U_INITIAL_OK] < cfg.human_accuracy
    initial = np.where(initial_ok, truth, _wrong_label(truth, u[_U_INITIAL_WRONG], k))

    if cfg.balanced_advice:
        n_correct = int(round(cfg.ai_accuracy * n))
        rank = np.argsort(np.argsort(u[_U_ADVICE_OK], axis=-1, kind="stable"),
                          axis=-1, kind="stable")
        advice_ok = rank < n_correct
    else:
        advice_ok = u[_U_ADVICE_OK] < cfg.ai_accuracy
    advice = np.where(advice_ok, truth, _wrong_label(truth, u[_U_ADVICE_WRONG], k))
    systematic = u[_U_SYSTEMATIC] < cfg.systematic_error_fraction
    error_type = np.where(advice_ok, ERROR_NONE,
                          np.where(systematic, ERROR_SYSTEMATIC, ERROR_RANDOM))

    contradiction = advice != initial
    # Probability that the advice is judged correct.
    p_judged_correct = np.where(
        advice_ok, cfg.discrimination_pos,
        np.where(initial_ok & (error_type == ERROR_SYSTEMATIC), 1.0 - cfg.discrimination_neg,
                 RANDOM_ERROR_DISCRIMINATION))
    judged_correct = u[_U_JUDGE] < p_judged_correct
    p_follow = np.where(judged_correct, cfg.follow_when_judged_correct,
                        cfg.follow_when_judged_incorrect)
    followed = contradiction & (u[_U_ACT] < p_follow)
    final = np.where(followed, advice, initial)

    return {
        "truth": truth, "initial": initial, "advice": advice, "final": final,
        "error_type": error_type, "contradiction": contradiction,
        "judged_correct": judged_correct, "followed": followed,
    }


class SimStudy:
    """A simulated log held as integer label codes.

    Trial objects are built lazily; the vectorised counters below give the
    same results as running :func:`count_outcomes` over :attr:`trials`.
    """

    def __init__(self, config: SimConfig, arrays: Mapping[str, np.ndarray]) -> None:
        self.config = config
        self.arrays = {name: np.asarray(a) for name, a in arrays.items()}
        for a in self.arrays.values():
            a.setflags(write=False)

    def __len__(self) -> int:
        return int(self.arrays["truth"].size)

    @property
    def participant_index(self) -> np.ndarray:
        return self.arrays["participant"]

    def participant_ids(self) -> list[str]:
        width = max(3, len(str(self.config.n_participants)))
        return [f"{self.config.condition}-p{i + 1:0{width}d}"
                for i in range(self.config.n_participants)]

    @cached_property
    def trials(self) -> list[Trial]:
        cfg = self.config
        names = cfg.label_names
        pids = self.participant_ids()
        width = max(2, len(str(cfg.n_trials)))
        a = self.arrays
        out = []
        for row in range(len(self)):
            out.append(Trial(
                participant_id=pids[int(a["participant"][row])],
                condition_id=cfg.condition,
                trial_id=f"t{int(a['trial'][row]) + 1:0{width}d}",
                ground_truth=names[a["truth"][row]],
                initial_decision=names[a["initial"][row]],
                advice=names[a["advice"][row]],
                final_decision=names[a["final"][row]],
            ))
        return out

    def _category_masks(self) -> dict[str, np.ndarray]:
        a = self.arrays
        init_ok = a["initial"] == a["truth"]
        adv_ok = a["advice"] == a["truth"]
        fin_ok = a["final"] == a["truth"]
        confirm = a["advice"] == a["initial"]
        pa = ~confirm & adv_ok
        na = ~confirm & ~adv_ok & init_ok
        return {
            "pos_ai": pa & fin_ok,
            "neg_self": pa & ~fin_ok,
            "pos_self": na & fin_ok,
            "neg_ai": na & ~fin_ok,
            "confirmation_correct": confirm & init_ok,
            "confirmation_incorrect": confirm & ~init_ok,
            "neutral": ~confirm & ~adv_ok & ~init_ok,
        }

    def counts(self) -> OutcomeCounts:
        return OutcomeCounts.from_categories(
            **{name: int(m.sum()) for name, m in self._category_masks().items()})

    def participant_counts(self) -> dict[str, np.ndarray]:
        """Per-participant category counts, indexed by participant number."""
        p = self.participant_index
        size = self.config.n_participants
        return {name: np.bincount(p, weights=m, minlength=size).astype(np.int64)
                for name, m in self._category_masks().items()}

    def participant_metric(self, metric: str) -> np.ndarray:
        """Per-participant metric values as floats; NaN where undefined."""
        c = self.participant_counts()
        if metric == "rair":
            num, den = c["pos_ai"], c["pos_ai"] + c["neg_self"]
        elif metric == "rsr":
            num, den = c["pos_self"], c["pos_self"] + c["neg_ai"]
        elif metric == "utilization":
            num = c["pos_ai"] + c["neg_ai"]
            den = num + c["neg_self"] + c["pos_self"]
        else:
            raise ValueError(f"unsupported metric {metric!r} for the fast path")
        out = np.full(den.shape, np.nan)
        ok = den > 0
        out[ok] = num[ok] / den[ok]
        return out

    def provenance(self) -> list[dict[str, Any]]:
        """Hidden per-trial state, aligned with :attr:`trials`."""
        a = self.arrays
        rows = []
        for row, t in enumerate(self.trials):
            contradiction = bool(a["contradiction"][row])
            rows.append({
                "participant_id": t.participant_id,
                "trial_id": t.trial_id,
                "advice_correct": bool(a["advice"][row] == a["truth"][row]),
                "error_type": _ERROR_NAMES[int(a["error_type"][row])],
                "judged_correct": bool(a["judged_correct"][row]) if contradiction else None,
                "followed_advice": bool(a["followed"][row]),
            })
        return rows

    def provenance_json(self) -> str:
        doc = {"schema": "ar-provenance/1", "config": self.config.to_dict(),
               "trials": self.provenance()}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def simulate_study(cfg: SimConfig, n_workers: int = 1) -> SimStudy:
    if not isinstance(cfg, SimConfig):
        raise ConfigError(f"expected SimConfig, got {type(cfg).__name__}")
    indices = range(cfg.n_participants)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            blocks = list(pool.map(lambda i: _participant_uniforms(cfg, i), indices))
    else:
        blocks = [_participant_uniforms(cfg, i) for i in indices]
    # (streams, participants, trials), flattened participant-major below.
    u = np.stack(blocks, axis=1)
    arrays = {name: a.reshape(-1) for name, a in _simulate_arrays(cfg, u).items()}
    arrays["participant"] = np.repeat(np.arange(cfg.n_participants), cfg.n_trials)
    arrays["trial"] = np.tile(np.arange(cfg.n_trials), cfg.n_participants)
    return SimStudy(cfg, arrays)


def simulate_conditions(cfgs: Sequence[SimConfig], n_workers: int = 1) -> list[Trial]:
    """Concatenated trials of several single-condition studies."""
    names = [c.condition for c in cfgs]
    if len(set(names)) != len(names):
        raise ConfigError(f"condition names must be distinct, got {names}")
    out: list[Trial] = []
    for cfg in cfgs:
        out.extend(simulate_study(cfg, n_workers).trials)
    return out


def effective_discrimination(cfg: SimConfig) -> float:
    """Probability that negative advice is recognised as incorrect."""
    s = cfg.systematic_error_fraction
    return s * cfg.discrimination_neg + (1 - s) * RANDOM_ERROR_DISCRIMINATION


def expected_metrics(cfg: SimConfig) -> tuple[float, float]:
    """Closed-form ``(E[RAIR], E[RSR])`` of the generative model."""
    f = cfg.follow_when_judged_correct
    g = cfg.follow_when_judged_incorrect
    d_pos = cfg.discrimination_pos
    d_eff = effective_discrimination(cfg)
    expected_rair = d_pos * f + (1 - d_pos) * g
    expected_rsr = 1 - (d_eff * g + (1 - d_eff) * f)
    return expected_rair, expected_rsr


def solve_follow_rates(target_rair: float, target_rsr: float, cfg: SimConfig) -> SimConfig:
    """Return ``cfg`` with follow rates chosen so that :func:`expected_metrics`
    hits the targets, keeping the discrimination parameters fixed.

    The two expectations are linear in the follow rates; the system is
    singular when ``discrimination_pos + effective discrimination == 1``.
    """
    d_pos = Fraction(cfg.discrimination_pos)
    d_eff = Fraction(effective_discrimination(cfg))
    coeff = 1 - d_eff - d_pos
    if coeff == 0:
        raise ConfigError("follow rates are not identifiable when discrimination_pos + "
                          "effective negative discrimination equals 1")
    gap = (1 - Fraction(target_rsr)) - Fraction(target_rair)
    delta = gap / coeff
    g = Fraction(target_rair) - d_pos * delta
    f = g + delta
    if not (0 <= f <= 1 and 0 <= g <= 1):
        raise ConfigError(f"targets ({target_rair}, {target_rsr}) need follow rates "
                          f"f={float(f):.4f}, g={float(g):.4f} outside [0, 1]")
    return cfg.replace(follow_when_judged_correct=float(f),
                       follow_when_judged_incorrect=float(g))
