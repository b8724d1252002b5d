"""
Classifying trials and computing RAIR / RSR
===========================================

A trial is one round of the judge-advisor loop: a person decides, sees the
AI advice, then decides again. Only trials where the advice disagrees with
the first decision say anything about reliance.
"""

from appropriate_reliance import (Trial, classify_trial, compute_scores, diagnose,
                                  random_baseline)

# Four people rate the same two reviews. Ground truth and advice differ by row.
rows = [
    # pid, trial, truth, initial, advice, final
    ("p1", "t1", "fake", "real", "fake", "fake"),   # took good advice
    ("p1", "t2", "real", "fake", "real", "fake"),   # ignored good advice
    ("p2", "t1", "fake", "fake", "real", "fake"),   # kept a correct first call
    ("p2", "t2", "real", "real", "fake", "fake"),   # followed bad advice
    ("p3", "t1", "fake", "fake", "fake", "fake"),   # agreement: no information
]
trials = [Trial(pid, "demo", tid, truth, init, adv, fin)
          for pid, tid, truth, init, adv, fin in rows]

for t in trials:
    print(f"{t.participant_id}/{t.trial_id}: {classify_trial(t).value}")

# Pool the whole log. Metrics are exact fractions; `as_float` is for display.
scores = compute_scores(trials)
print("RAIR =", scores.rair.value, " RSR =", scores.rsr.value)

# The reference point is what a coin-flipping keep/switch agent would score.
tau = random_baseline(2)
print("baseline", tau, "->", diagnose(scores, tau).as_dict())
