"""
Comparing conditions and planning sample size
=============================================
"""

from appropriate_reliance import (SimConfig, bootstrap_ci, power_estimate, simulate_study,
                                  solve_follow_rates, welch_t_test)

base = SimConfig(n_participants=100, n_trials=16, balanced_advice=True,
                 discrimination_pos=0.6, discrimination_neg=0.6)
ai = solve_follow_rates(0.30, 0.72, base.replace(condition="AI", seed=1))
xai = solve_follow_rates(0.39, 0.72, base.replace(condition="XAI", seed=2))

# Per-person RAIR values; people with no informative trials come back as NaN.
a = [v for v in simulate_study(ai).participant_metric("rair") if v == v]
b = [v for v in simulate_study(xai).participant_metric("rair") if v == v]

res = welch_t_test(a, b, metric_name="rair", groups=("AI", "XAI"))
print(f"t = {res.t_statistic:.3f}, df = {res.degrees_of_freedom:.1f}, p = {res.p_value:.4f}")
print("95% bootstrap interval for AI RAIR:", bootstrap_ci(a, n_resamples=1000, seed=3))

# How often would a study of this size detect the 0.09 RAIR gap?
for n in (50, 100, 200):
    est = power_estimate(ai.replace(n_participants=n), xai.replace(n_participants=n),
                         n_replications=200, seed=4)
    print(f"{n:>3} per arm: power {est.power:.2f}")
