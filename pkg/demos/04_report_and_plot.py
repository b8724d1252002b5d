"""
From a CSV log to a report and a reliance-space plot
====================================================

This is the same path the command line takes:

    appropriate-reliance simulate cfg.json --seed 7 | appropriate-reliance analyze - \
        | appropriate-reliance plot - > plot.svg
"""

import pathlib
import tempfile

from appropriate_reliance import (ReportOptions, SimConfig, build_report, parse_log,
                                  render_reliance_plot, serialize_log, simulate_conditions)

cfgs = [
    SimConfig(condition="AI", follow_when_judged_correct=0.34, follow_when_judged_incorrect=0.24,
              discrimination_pos=0.6, discrimination_neg=0.6, balanced_advice=True, seed=1),
    SimConfig(condition="XAI", follow_when_judged_correct=0.61, follow_when_judged_incorrect=0.06,
              discrimination_pos=0.6, discrimination_neg=0.6, balanced_advice=True, seed=2),
]
csv_text = serialize_log(simulate_conditions(cfgs))
print(csv_text.splitlines()[0])

# Read it back as any external log would be read, with schema checks.
trials = parse_log(csv_text.encode())
report = build_report(trials, ReportOptions(bootstrap_resamples=500, seed=5))
print(report.to_text())

out = pathlib.Path(tempfile.gettempdir()) / "reliance.svg"
render_reliance_plot(report, out)
print("plot written to", out)
