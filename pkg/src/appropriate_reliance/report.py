"""Trial-log ingestion and analysis reports.

Logs are CSV with the header::

    participant_id,condition,trial_id,ground_truth,initial_decision,advice,final_decision

(any column order is accepted on input; output always uses this order) or a
JSON mirror of it::

    {"schema": "ar-log/1", "labels": [...], "trials": [{...}, ...]}

Reports serialize to JSON under the schema tag ``ar-report/1``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import IO, Any, Iterable, Optional, Sequence, Union

from . import __version__
from .errors import (DuplicateKeyError, EmptyLogError, MissingColumnError, PreconditionError,
                     SchemaError, UnknownLabelError)
from .metrics import RelianceDiagnosis, diagnose_values, random_baseline
from .stats import (METRICS, AggregateResult, ComparisonResult, aggregate_scores,
                    bootstrap_ci, compare, per_participant_scores)
from .trials import Trial, count_outcomes, is_third_label_switch, label_set

CSV_COLUMNS = ("participant_id", "condition", "trial_id", "ground_truth",
               "initial_decision", "advice", "final_decision")
LABEL_COLUMNS = ("ground_truth", "initial_decision", "advice", "final_decision")
LOG_SCHEMA = "ar-log/1"
REPORT_SCHEMA = "ar-report/1"
COMPARED_METRICS = ("rair", "rsr")

Source = Union[bytes, str, os.PathLike, IO]


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    data = source.read()
    return data.encode("utf-8") if isinstance(data, str) else data


def _decode(raw: bytes) -> str:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaError(f"input is not valid UTF-8: {exc}") from None
    return text.lstrip("﻿")


def _make_trials(rows: Iterable[tuple[int, dict]], labels: Optional[frozenset[str]]) -> list[Trial]:
    trials = []
    first_line: dict[tuple[str, str], int] = {}
    for line, row in rows:
        for col in ("participant_id", "trial_id") + LABEL_COLUMNS:
            value = row.get(col)
            if not isinstance(value, str) or value == "":
                raise SchemaError(f"empty or missing value for {col!r}", column=col, line=line)
        if labels is not None:
            for col in LABEL_COLUMNS:
                if row[col] not in labels:
                    raise UnknownLabelError(f"label {row[col]!r} is not in the label set",
                                            column=col, line=line)
        t = Trial(
            participant_id=row["participant_id"],
            condition_id=row.get("condition") or "default",
            trial_id=row["trial_id"],
            ground_truth=row["ground_truth"],
            initial_decision=row["initial_decision"],
            advice=row["advice"],
            final_decision=row["final_decision"],
        )
        if t.key in first_line:
            raise DuplicateKeyError(t.key, (first_line[t.key], line))
        first_line[t.key] = line
        trials.append(t)
    if not trials:
        raise EmptyLogError("log contains no trials")
    return trials


def _parse_csv(text: str, labels) -> list[Trial]:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyLogError("log is empty", line=1) from None
    header = [h.strip() for h in header]
    for col in CSV_COLUMNS:
        if col == "condition":
            continue
        if col not in header:
            raise MissingColumnError(f"missing required column {col!r}", column=col, line=1)

    def rows():
        for values in reader:
            line = reader.line_num
            if not values or all(v == "" for v in values):
                continue
            if len(values) != len(header):
                raise SchemaError(f"expected {len(header)} fields, found {len(values)}", line=line)
            yield line, dict(zip(header, values))

    return _make_trials(rows(), labels)


def _parse_json(text: str, labels) -> list[Trial]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if isinstance(doc, list):
        records = doc
    elif isinstance(doc, dict):
        if doc.get("schema", LOG_SCHEMA) != LOG_SCHEMA:
            raise SchemaError(f"unsupported log schema {doc.get('schema')!r}")
        records = doc.get("trials")
        if records is None:
            raise MissingColumnError("missing 'trials' array", column="trials")
        if labels is None and doc.get("labels") is not None:
            labels = frozenset(doc["labels"])
    else:
        raise SchemaError("JSON log must be an object or an array")

    def rows():
        for i, rec in enumerate(records):
            # JSON positions are reported as record numbers (header-less).
            if not isinstance(rec, dict):
                raise SchemaError("trial record must be an object", line=i + 1)
            for col in CSV_COLUMNS:
                if col != "condition" and col not in rec:
                    raise MissingColumnError(f"missing required field {col!r}",
                                             column=col, line=i + 1)
            yield i + 1, {k: (str(v) if isinstance(v, (int, float)) and not isinstance(v, bool)
                              else v) for k, v in rec.items()}

    return _make_trials(rows(), labels)


def parse_log(source: Source, format: str = "csv",
              labels: Optional[Iterable[str]] = None) -> list[Trial]:
    """Parse and validate a trial log.

    Args:
        source: Raw bytes, a path, or an open (binary or text) file.
        format: ``"csv"`` or ``"json"``.
        labels: The declared label set. Without it, a JSON log's ``labels``
            entry is used; otherwise any non-empty label is accepted.

    Raises:
        MissingColumnError, UnknownLabelError, DuplicateKeyError, EmptyLogError:
            each carrying the 1-based line (CSV) or record number (JSON).
    """
    label_filter = frozenset(labels) if labels is not None else None
    text = _decode(_read_bytes(source))
    if not text.strip():
        raise EmptyLogError("log is empty", line=1)
    if format == "csv":
        return _parse_csv(text, label_filter)
    if format == "json":
        return _parse_json(text, label_filter)
    raise ValueError(f"unknown log format {format!r}; expected 'csv' or 'json'")


def _row(t: Trial) -> list[str]:
    return [t.participant_id, t.condition_id, t.trial_id, t.ground_truth,
            t.initial_decision, t.advice, t.final_decision]


def serialize_log(trials: Sequence[Trial], format: str = "csv",
                  labels: Optional[Iterable[str]] = None) -> str:
    if format == "csv":
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(_row(t) for t in trials)
        return buf.getvalue()
    if format == "json":
        declared = sorted(labels if labels is not None else label_set(trials))
        doc = {"schema": LOG_SCHEMA, "labels": declared,
               "trials": [dict(zip(CSV_COLUMNS, _row(t))) for t in trials]}
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown log format {format!r}; expected 'csv' or 'json'")


def input_digest(trials: Sequence[Trial]) -> str:
    """SHA-256 of the canonical CSV serialization."""
    return "sha256:" + hashlib.sha256(serialize_log(trials).encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class ReportOptions:
    threshold: Optional[float] = None  # None: random baseline of the label set
    mode: str = "macro"
    test: str = "welch"
    baseline_model: str = "keep_switch"
    bootstrap_resamples: int = 0  # 0 disables bootstrap intervals
    bootstrap_level: float = 0.95
    seed: Optional[int] = None
    strict: bool = False
    labels: Optional[tuple[str, ...]] = None

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "mode": self.mode,
            "test": self.test,
            "baseline_model": self.baseline_model,
            "bootstrap_resamples": self.bootstrap_resamples,
            "bootstrap_level": self.bootstrap_level,
            "seed": self.seed,
            "strict": self.strict,
            "labels": list(self.labels) if self.labels is not None else None,
        }


@dataclass(frozen=True)
class ConditionSummary:
    condition: str
    n_participants: int
    n_trials: int
    counts: dict[str, int]
    aggregates: dict[str, AggregateResult]
    diagnosis: RelianceDiagnosis
    bootstrap: dict[str, Optional[tuple[float, float]]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "condition": self.condition,
            "n_participants": self.n_participants,
            "n_trials": self.n_trials,
            "counts": self.counts,
            "metrics": {name: agg.as_dict() for name, agg in self.aggregates.items()},
            "diagnosis": self.diagnosis.as_dict(),
        }
        if self.bootstrap:
            d["bootstrap"] = {k: (list(v) if v is not None else None)
                              for k, v in self.bootstrap.items()}
        return d


@dataclass(frozen=True)
class AnalysisReport:
    conditions: list[ConditionSummary]
    comparisons: list[ComparisonResult]
    skipped_comparisons: list[dict]
    exclusions: dict[str, dict[str, list[str]]]
    warnings: list[str]
    anomalies: list[dict]
    threshold: float
    labels: list[str]
    options: ReportOptions
    input_digest: str
    tool_version: str = __version__

    def condition(self, name: str) -> ConditionSummary:
        for c in self.conditions:
            if c.condition == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "tool_version": self.tool_version,
            "input_digest": self.input_digest,
            "options": self.options.as_dict(),
            "labels": self.labels,
            "threshold": self.threshold,
            "conditions": [c.as_dict() for c in self.conditions],
            "comparisons": [c.as_dict() for c in self.comparisons],
            "skipped_comparisons": self.skipped_comparisons,
            "exclusions": self.exclusions,
            "anomalies": self.anomalies,
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def to_text(self) -> str:
        return format_report_text(self.to_dict())


def _conditions(trials: Sequence[Trial]) -> dict[str, list[Trial]]:
    by_cond: dict[str, list[Trial]] = {}
    for t in trials:
        by_cond.setdefault(t.condition_id, []).append(t)
    return {c: by_cond[c] for c in sorted(by_cond)}


def build_report(trials: Sequence[Trial], options: Optional[ReportOptions] = None) -> AnalysisReport:
    """Aggregate, diagnose and compare every condition of a parsed log."""
    options = options or ReportOptions()
    trials = list(trials)
    if not trials:
        raise EmptyLogError("cannot report on an empty log")
    labels = frozenset(options.labels) if options.labels is not None else label_set(trials)
    k = max(len(labels), 2)
    threshold = (float(random_baseline(k, options.baseline_model))
                 if options.threshold is None else float(options.threshold))
    if options.bootstrap_resamples and options.seed is None:
        raise ValueError("bootstrap intervals require an explicit seed")

    warnings: list[str] = []
    summaries = []
    unit_values: dict[str, dict[str, list[float]]] = {}
    exclusions: dict[str, dict[str, list[str]]] = {}
    for cond, ctrials in _conditions(trials).items():
        scores = per_participant_scores(ctrials, labels)
        aggs = {m: aggregate_scores(scores, m, options.mode) for m in METRICS}
        diag = diagnose_values(aggs["rair"].mean, aggs["rsr"].mean, threshold)
        boot: dict[str, Optional[tuple[float, float]]] = {}
        if options.bootstrap_resamples:
            for m in COMPARED_METRICS:
                vals = [v for _, v in aggs[m].per_unit_values]
                boot[m] = (bootstrap_ci(vals, options.bootstrap_level,
                                        options.bootstrap_resamples, options.seed)
                           if len(vals) >= 2 else None)
        summaries.append(ConditionSummary(
            cond, len(scores), len(ctrials), count_outcomes(ctrials).as_dict(),
            aggs, diag, boot))
        unit_values[cond] = {m: [v for _, v in aggs[m].per_unit_values] for m in COMPARED_METRICS}
        excl = {m: list(aggs[m].excluded) for m in COMPARED_METRICS if aggs[m].excluded}
        if excl:
            exclusions[cond] = excl
        for m in COMPARED_METRICS:
            if not aggs[m].defined:
                warnings.append(f"condition {cond!r}: {m} is undefined (no qualifying trials)")

    if all(s.counts["n_pos_ai_reliance"] + s.counts["n_neg_self_reliance"]
           + s.counts["n_pos_self_reliance"] + s.counts["n_neg_ai_reliance"] == 0
           for s in summaries):
        warnings.insert(0, "WARNING: the log has no positive- or negative-advice trials; "
                           "all reliance metrics are undefined")

    comparisons = []
    skipped = []
    for a, b in combinations([s.condition for s in summaries], 2):
        for m in COMPARED_METRICS:
            va, vb = unit_values[a][m], unit_values[b][m]
            if len(va) < 2 or len(vb) < 2:
                skipped.append({"groups": [a, b], "metric": m,
                                "reason": "fewer than 2 participants with a defined value"})
                continue
            try:
                comparisons.append(compare(va, vb, options.test, metric_name=m, groups=(a, b)))
            except PreconditionError as exc:
                skipped.append({"groups": [a, b], "metric": m, "reason": str(exc)})

    anomalies = []
    if options.strict:
        anomalies = [{"participant_id": t.participant_id, "trial_id": t.trial_id,
                      "condition": t.condition_id, "kind": "third_label_final"}
                     for t in trials if is_third_label_switch(t)]
        if anomalies:
            warnings.append(f"{len(anomalies)} trial(s) end on a label that is neither the "
                            "initial decision nor the advice")

    return AnalysisReport(summaries, comparisons, skipped, exclusions, warnings, anomalies,
                          threshold, sorted(labels), options, input_digest(trials))


def _fmt(v: Optional[float], digits: int = 3) -> str:
    return "undefined" if v is None else f"{v:.{digits}f}"


def format_report_text(doc: dict) -> str:
    """Human-readable rendering of a report dictionary."""
    lines = [f"appropriate-reliance report ({doc['schema']}, tool {doc['tool_version']})",
             f"input: {doc['input_digest']}",
             f"threshold: {doc['threshold']:.3f}", ""]
    for w in doc["warnings"]:
        lines.append(f"! {w}")
    if doc["warnings"]:
        lines.append("")
    for c in doc["conditions"]:
        lines.append(f"[{c['condition']}] {c['n_participants']} participants, "
                     f"{c['n_trials']} trials")
        for name, m in c["metrics"].items():
            se = f" +/- {_fmt(m['std_error'])}" if m["std_error"] is not None else ""
            lines.append(f"  {name:<17} {_fmt(m['mean'])}{se}  (n={m['n_units']})")
        d = c["diagnosis"]
        appropriate = {True: "yes", False: "no", None: "undefined"}[d["appropriate"]]
        lines.append(f"  RAIR: {d['rair_status']}, RSR: {d['rsr_status']}, "
                     f"appropriate reliance: {appropriate}")
        lines.append("")
    for cmp in doc["comparisons"]:
        a, b = cmp["groups"]
        lines.append(f"{cmp['metric']} {a} vs {b}: t={cmp['t_statistic']:.3f}, "
                     f"df={cmp['degrees_of_freedom']:.1f}, p={cmp['p_value']:.4f} "
                     f"({cmp['test']})")
    for s in doc["skipped_comparisons"]:
        a, b = s["groups"]
        lines.append(f"{s['metric']} {a} vs {b}: skipped, {s['reason']}")
    return "\n".join(lines).rstrip() + "\n"


def load_report(source: Source) -> dict:
    """Read a JSON report written by :meth:`AnalysisReport.to_json`."""
    doc = json.loads(_decode(_read_bytes(source)))
    if not isinstance(doc, dict) or doc.get("schema") != REPORT_SCHEMA:
        raise SchemaError(f"not an {REPORT_SCHEMA} document")
    return doc
