"""Independent reference computations used by several test modules."""

from fractions import Fraction
import random

from conftest import binary_trial


def scan_metrics(trials):
    """RAIR, RSR and advice utilization by a direct scan over trials."""
    pa = pa_ok = na = na_ok = adopted = 0
    for t in trials:
        if t.advice == t.initial_decision:
            continue
        if t.advice == t.ground_truth and t.initial_decision != t.ground_truth:
            pa += 1
            pa_ok += t.final_decision == t.ground_truth
        elif t.initial_decision == t.ground_truth and t.advice != t.ground_truth:
            na += 1
            na_ok += t.final_decision == t.ground_truth
        else:
            continue
        adopted += t.final_decision == t.advice
    ratio = lambda n, d: Fraction(n, d) if d else None
    return ratio(pa_ok, pa), ratio(na_ok, na), ratio(adopted, pa + na)


def trials_from_counts(pos_ai, neg_self, pos_self, neg_ai, conf_ok=0, conf_bad=0,
                       pid="p1", seed=0):
    """A shuffled binary log realizing the given category counts."""
    patterns = ([(False, True, True)] * pos_ai + [(False, True, False)] * neg_self
                + [(True, False, True)] * pos_self + [(True, False, False)] * neg_ai
                + [(True, True, True)] * conf_ok + [(False, False, False)] * conf_bad)
    random.Random(seed).shuffle(patterns)
    return [binary_trial(*p, pid=pid, tid=f"t{i}") for i, p in enumerate(patterns)]
