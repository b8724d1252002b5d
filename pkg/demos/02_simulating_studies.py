"""
Simulating a judge-advisor study
================================

The simulator draws people who judge whether the advice is right with some
discrimination and then follow it at one of two rates. Closed forms give the
expected metrics, so a target point in reliance space can be dialled in.
"""

from appropriate_reliance import (SimConfig, aggregate, expected_metrics, simulate_study,
                                  solve_follow_rates)

base = SimConfig(n_participants=100, n_trials=16, ai_accuracy=0.5, human_accuracy=0.5,
                 balanced_advice=True, discrimination_pos=0.6, discrimination_neg=0.6,
                 seed=11)

# Ask for RAIR 0.30 and RSR 0.72 and read off the follow rates that produce it.
cfg = solve_follow_rates(0.30, 0.72, base)
print(f"follow when judged correct {cfg.follow_when_judged_correct:.3f}, "
      f"when judged incorrect {cfg.follow_when_judged_incorrect:.3f}")
print("expected (RAIR, RSR):", tuple(round(v, 3) for v in expected_metrics(cfg)))

# One simulated study of 1,600 trials lands near that point.
study = simulate_study(cfg)
for metric in ("rair", "rsr"):
    agg = aggregate(study.trials, metric)
    print(f"{metric}: {agg.mean:.3f} +/- {agg.std_error:.3f} over {agg.n_units} people")

# Hidden simulator state travels separately from the log itself.
print(study.provenance_json()[:120], "...")
