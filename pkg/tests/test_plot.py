import csv
import io
import xml.etree.ElementTree as ET

import pytest

from appropriate_reliance import (PlotError, ReportOptions, Trial, build_report, plot_data_csv,
                                  render_reliance_plot)
from appropriate_reliance.plot import Canvas

from conftest import binary_trial
from oracles import trials_from_counts

NS = {"svg": "http://www.w3.org/2000/svg"}
CANVAS = Canvas()


def _relabel(trials, condition):
    return [Trial(t.participant_id + condition, condition, t.trial_id, t.ground_truth,
                  t.initial_decision, t.advice, t.final_decision) for t in trials]


def _report(*conditions, threshold=0.5):
    trials = []
    for name, units in conditions:
        for i, c in enumerate(units):
            trials += _relabel(trials_from_counts(*c, pid=f"p{i}", seed=i), name)
    return build_report(trials, ReportOptions(threshold=threshold))


def _markers(svg):
    root = ET.fromstring(svg.encode())
    out = {}
    for g in root.iterfind(".//svg:g[@class='condition']", NS):
        circle = g.find("svg:circle", NS)
        out[g.get("data-condition")] = (float(circle.get("cx")), float(circle.get("cy")), g)
    return root, out


def test_under_reliance_marker_upper_left():
    svg = render_reliance_plot(_report(("AI", [(3, 7, 18, 7)])))
    _, markers = _markers(svg)
    cx, cy, _ = markers["AI"]
    assert cx < CANVAS.x(0.5) and cy < CANVAS.y(0.5)  # svg y grows downwards
    assert cx == pytest.approx(CANVAS.x(0.3), abs=0.01)
    assert cy == pytest.approx(CANVAS.y(0.72), abs=0.01)


def test_optimal_marker_top_right_corner():
    _, markers = _markers(render_reliance_plot(_report(("best", [(4, 0, 4, 0)]))))
    cx, cy, _ = markers["best"]
    assert (cx, cy) == (pytest.approx(CANVAS.x(1)), pytest.approx(CANVAS.y(1)))


def test_axes_threshold_and_labels():
    svg = render_reliance_plot(_report(("AI", [(3, 7, 18, 7)]), threshold=0.4))
    root = ET.fromstring(svg.encode())
    texts = {t.get("class"): t.text for t in root.iterfind(".//svg:text", NS) if t.get("class")}
    assert texts["x-label"] == "RAIR" and texts["y-label"] == "RSR"
    lines = root.findall(".//svg:line[@class='threshold']", NS)
    assert len(lines) == 2 and all(l.get("stroke-dasharray") for l in lines)
    vertical, horizontal = lines
    assert float(vertical.get("x1")) == pytest.approx(CANVAS.x(0.4), abs=0.01)
    assert float(horizontal.get("y1")) == pytest.approx(CANVAS.y(0.4), abs=0.01)
    axes = root.find(".//svg:rect[@class='axes']", NS)
    assert float(axes.get("x")) == CANVAS.x(0) and float(axes.get("width")) == CANVAS.plot_w
    region = root.find(".//svg:rect[@class='ar-region']", NS)
    assert float(region.get("x")) == pytest.approx(CANVAS.x(0.4), abs=0.01)
    assert "<script" not in svg and "@import" not in svg and "href" not in svg


def test_error_bars_span_one_standard_error():
    report = _report(("AI", [(1, 1, 3, 1), (3, 1, 2, 2), (0, 2, 3, 0)]))
    agg = report.conditions[0].aggregates
    _, markers = _markers(render_reliance_plot(report))
    cx, cy, g = markers["AI"]
    bars = g.findall("svg:line", NS)
    horizontal = bars[0]
    vertical = bars[3]
    assert float(horizontal.get("x1")) == pytest.approx(
        CANVAS.x(agg["rair"].mean - agg["rair"].std_error), abs=0.01)
    assert float(horizontal.get("x2")) == pytest.approx(
        CANVAS.x(agg["rair"].mean + agg["rair"].std_error), abs=0.01)
    assert float(vertical.get("y2")) == pytest.approx(
        CANVAS.y(agg["rsr"].mean + agg["rsr"].std_error), abs=0.01)


def test_legend_lists_conditions_in_order():
    svg = render_reliance_plot(_report(("AI", [(3, 7, 18, 7)]), ("XAI", [(4, 6, 18, 7)])))
    root = ET.fromstring(svg.encode())
    assert [t.text for t in root.iterfind(".//svg:text[@class='legend']", NS)] == ["AI", "XAI"]


def _log():
    trials = []
    for name, units in (("AI", [(3, 7, 18, 7), (2, 2, 3, 3)]), ("XAI", [(4, 6, 18, 7)])):
        for i, c in enumerate(units):
            trials += _relabel(trials_from_counts(*c, pid=f"p{i}", seed=i), name)
    return trials


def test_byte_stable(tmp_path):
    report = build_report(_log())
    a = render_reliance_plot(report, tmp_path / "a.svg")
    assert render_reliance_plot(build_report(_log())) == a
    assert (tmp_path / "a.svg").read_bytes() == a.encode()
    assert render_reliance_plot(report.to_dict()) == a


def test_undefined_condition_is_gap_with_footnote():
    trials = _relabel(trials_from_counts(3, 7, 18, 7), "AI") + \
        _relabel(trials_from_counts(0, 0, 5, 1), "empty")
    svg = render_reliance_plot(build_report(trials))
    _, markers = _markers(svg)
    assert set(markers) == {"AI"}
    assert "not plotted (undefined RAIR or RSR): empty" in svg


def test_no_plottable_condition():
    trials = [binary_trial(True, True, True, pid=f"p{i}") for i in range(2)]
    with pytest.raises(PlotError):
        render_reliance_plot(build_report(trials))


def test_bootstrap_error_bars():
    trials = []
    for i, c in enumerate([(1, 1, 3, 1), (3, 1, 2, 2), (0, 2, 3, 0), (2, 2, 2, 2)]):
        trials += trials_from_counts(*c, pid=f"p{i}", seed=i)
    report = build_report(trials, ReportOptions(bootstrap_resamples=300, seed=1))
    lo, hi = report.conditions[0].bootstrap["rair"]
    _, markers = _markers(render_reliance_plot(report, error_bars="bootstrap"))
    horizontal = markers["c"][2].find("svg:line", NS)
    assert float(horizontal.get("x1")) == pytest.approx(CANVAS.x(lo), abs=0.01)
    assert float(horizontal.get("x2")) == pytest.approx(CANVAS.x(hi), abs=0.01)


def test_plot_data_csv():
    trials = _relabel(trials_from_counts(3, 7, 18, 7), "AI") + \
        _relabel(trials_from_counts(0, 0, 5, 1), "empty")
    rows = list(csv.DictReader(io.StringIO(plot_data_csv(build_report(trials)))))
    assert rows[0]["condition"] == "AI"
    assert float(rows[0]["rair"]) == 0.3 and float(rows[0]["rsr"]) == 0.72
    assert rows[1]["rair"] == "" and float(rows[1]["threshold"]) == 0.5
