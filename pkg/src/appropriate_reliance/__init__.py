"""Appropriate-reliance metrics for sequential human-AI decision-making.

Classify trials, compute RAIR/RSR with inference, diagnose over- and
under-reliance against a random baseline, and simulate judge-advisor studies.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DomainError, DuplicateKeyError, EmptyLogError,
                     MissingColumnError, PlotError, PreconditionError, RelianceError,
                     SchemaError, UnknownLabelError)
from .trials import (AdviceRelation, OutcomeCounts, RelianceClass, Trial, advice_relation,
                     classify_trial, count_outcomes, is_third_label_switch)
from .metrics import (MetricValue, RelianceDiagnosis, RelianceScores, accuracies,
                      advice_utilization, compute_scores, diagnose, diagnose_values,
                      random_baseline, rair, rsr)
from .simulator import (SimConfig, SimStudy, expected_metrics, simulate_conditions,
                        simulate_study, solve_follow_rates)
from .stats import (AggregateResult, ComparisonResult, PowerEstimate, aggregate,
                    bootstrap_ci, pooled_t_test, power_estimate, welch_t_test)
from .report import (AnalysisReport, ReportOptions, build_report, load_report, parse_log,
                     serialize_log)
from .plot import plot_data_csv, render_reliance_plot
