"""Reliance-space plot: RAIR on x, RSR on y, both on [0, 1].

The SVG is written by hand (no plotting backend) so identical reports give
byte-identical files. Dashed lines mark the random baseline on both axes; the
shaded upper-right quadrant is the appropriate-reliance region.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Optional, Union
from xml.sax.saxutils import escape, quoteattr

from .errors import PlotError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass(frozen=True)
class PlotPoint:
    condition: str
    rair: float
    rsr: float
    rair_err: tuple[float, float]  # (below, above) extents
    rsr_err: tuple[float, float]


@dataclass(frozen=True)
class Canvas:
    width: int = 520
    height: int = 480
    left: int = 70
    right: int = 150  # room for the legend
    top: int = 30
    bottom: int = 70

    @property
    def plot_w(self) -> int:
        return self.width - self.left - self.right

    @property
    def plot_h(self) -> int:
        return self.height - self.top - self.bottom

    def x(self, v: float) -> float:
        return self.left + v * self.plot_w

    def y(self, v: float) -> float:
        return self.top + (1.0 - v) * self.plot_h


def _report_dict(report) -> dict:
    return report.to_dict() if hasattr(report, "to_dict") else report


def _clip(v: float) -> float:
    return min(1.0, max(0.0, v))


def plot_points(report, error_bars: str = "se") -> tuple[list[PlotPoint], list[str]]:
    """Plottable points and the names of conditions left out as undefined."""
    doc = _report_dict(report)
    points, missing = [], []
    for c in doc["conditions"]:
        rair, rsr = c["metrics"]["rair"], c["metrics"]["rsr"]
        if rair["mean"] is None or rsr["mean"] is None:
            missing.append(c["condition"])
            continue
        if error_bars == "bootstrap" and c.get("bootstrap"):
            errs = []
            for name, m in (("rair", rair), ("rsr", rsr)):
                iv = c["bootstrap"].get(name)
                errs.append((m["mean"] - iv[0], iv[1] - m["mean"]) if iv else (0.0, 0.0))
        elif error_bars in ("se", "bootstrap"):
            errs = [(m["std_error"] or 0.0,) * 2 for m in (rair, rsr)]
        else:
            raise ValueError(f"unknown error-bar style {error_bars!r}")
        points.append(PlotPoint(c["condition"], rair["mean"], rsr["mean"], errs[0], errs[1]))
    return points, missing


def _n(v: float) -> str:
    return f"{v:.2f}"


def render_svg(points: list[PlotPoint], threshold: float, missing: list[str] = (),
               canvas: Canvas = Canvas()) -> str:
    cv = canvas
    x0, x1, y0, y1 = cv.x(0), cv.x(1), cv.y(0), cv.y(1)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{cv.width}" height="{cv.height}" '
        f'viewBox="0 0 {cv.width} {cv.height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{cv.width}" height="{cv.height}" fill="#ffffff"/>',
        f'<rect class="ar-region" x="{_n(cv.x(threshold))}" y="{_n(y1)}" '
        f'width="{_n(x1 - cv.x(threshold))}" height="{_n(cv.y(threshold) - y1)}" '
        'fill="#e8f4e8"/>',
    ]
    for i in range(5):
        v = i / 4
        out.append(f'<line x1="{_n(cv.x(v))}" y1="{_n(y0)}" x2="{_n(cv.x(v))}" '
                   f'y2="{_n(y0 + 5)}" stroke="#000000"/>')
        out.append(f'<text x="{_n(cv.x(v))}" y="{_n(y0 + 18)}" text-anchor="middle">{v:.2f}</text>')
        out.append(f'<line x1="{_n(x0 - 5)}" y1="{_n(cv.y(v))}" x2="{_n(x0)}" '
                   f'y2="{_n(cv.y(v))}" stroke="#000000"/>')
        out.append(f'<text x="{_n(x0 - 8)}" y="{_n(cv.y(v) + 4)}" text-anchor="end">{v:.2f}</text>')
    out += [
        f'<rect class="axes" x="{_n(x0)}" y="{_n(y1)}" width="{_n(x1 - x0)}" '
        f'height="{_n(y0 - y1)}" fill="none" stroke="#000000"/>',
        f'<line class="threshold" x1="{_n(cv.x(threshold))}" y1="{_n(y0)}" '
        f'x2="{_n(cv.x(threshold))}" y2="{_n(y1)}" stroke="#555555" stroke-dasharray="6,4"/>',
        f'<line class="threshold" x1="{_n(x0)}" y1="{_n(cv.y(threshold))}" '
        f'x2="{_n(x1)}" y2="{_n(cv.y(threshold))}" stroke="#555555" stroke-dasharray="6,4"/>',
        f'<text class="x-label" x="{_n((x0 + x1) / 2)}" y="{_n(y0 + 38)}" '
        'text-anchor="middle">RAIR</text>',
        f'<text class="y-label" x="{_n(x0 - 48)}" y="{_n((y0 + y1) / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 {_n(x0 - 48)} {_n((y0 + y1) / 2)})">RSR</text>',
    ]
    legend_x = x1 + 20
    for i, p in enumerate(points):
        color = PALETTE[i % len(PALETTE)]
        px, py = cv.x(p.rair), cv.y(p.rsr)
        xl, xr = cv.x(_clip(p.rair - p.rair_err[0])), cv.x(_clip(p.rair + p.rair_err[1]))
        yb, yt = cv.y(_clip(p.rsr - p.rsr_err[0])), cv.y(_clip(p.rsr + p.rsr_err[1]))
        out += [
            f'<g class="condition" data-condition={quoteattr(p.condition)} '
            f'data-rair="{p.rair:.6f}" data-rsr="{p.rsr:.6f}">',
            f'<line x1="{_n(xl)}" y1="{_n(py)}" x2="{_n(xr)}" y2="{_n(py)}" stroke="{color}"/>',
            f'<line x1="{_n(xl)}" y1="{_n(py - 4)}" x2="{_n(xl)}" y2="{_n(py + 4)}" stroke="{color}"/>',
            f'<line x1="{_n(xr)}" y1="{_n(py - 4)}" x2="{_n(xr)}" y2="{_n(py + 4)}" stroke="{color}"/>',
            f'<line x1="{_n(px)}" y1="{_n(yb)}" x2="{_n(px)}" y2="{_n(yt)}" stroke="{color}"/>',
            f'<line x1="{_n(px - 4)}" y1="{_n(yb)}" x2="{_n(px + 4)}" y2="{_n(yb)}" stroke="{color}"/>',
            f'<line x1="{_n(px - 4)}" y1="{_n(yt)}" x2="{_n(px + 4)}" y2="{_n(yt)}" stroke="{color}"/>',
            f'<circle class="marker" cx="{_n(px)}" cy="{_n(py)}" r="4.5" fill="{color}"/>',
            '</g>',
        ]
        ly = y1 + 10 + 20 * i
        out += [
            f'<circle class="legend-marker" cx="{_n(legend_x)}" cy="{_n(ly)}" r="4.5" fill="{color}"/>',
            f'<text class="legend" x="{_n(legend_x + 10)}" y="{_n(ly + 4)}">{escape(p.condition)}</text>',
        ]
    if missing:
        note = "not plotted (undefined RAIR or RSR): " + ", ".join(missing)
        out.append(f'<text class="footnote" x="{_n(x0)}" y="{cv.height - 8}" '
                   f'font-size="10">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_reliance_plot(report, path: Union[str, os.PathLike, None] = None,
                         error_bars: str = "se", canvas: Canvas = Canvas()) -> str:
    """Render ``report`` (an ``AnalysisReport`` or its JSON dict) as SVG.

    Writes to ``path`` when given and returns the document either way.
    Raises :class:`PlotError` when no condition has both RAIR and RSR.
    """
    doc = _report_dict(report)
    points, missing = plot_points(doc, error_bars)
    if not points:
        raise PlotError("no condition has both RAIR and RSR defined")
    svg = render_svg(points, float(doc["threshold"]), missing, canvas)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    return svg


def plot_data_csv(report, error_bars: str = "se") -> str:
    """The plotted values as CSV, one row per condition (undefined rows empty)."""
    doc = _report_dict(report)
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["condition", "rair", "rsr", "rair_err_low", "rair_err_high",
                "rsr_err_low", "rsr_err_high", "threshold"])
    points = {p.condition: p for p in plot_points(doc, error_bars)[0]}
    for c in doc["conditions"]:
        p: Optional[PlotPoint] = points.get(c["condition"])
        if p is None:
            w.writerow([c["condition"], "", "", "", "", "", "", repr(float(doc["threshold"]))])
        else:
            w.writerow([p.condition, repr(p.rair), repr(p.rsr), repr(p.rair_err[0]),
                        repr(p.rair_err[1]), repr(p.rsr_err[0]), repr(p.rsr_err[1]),
                        repr(float(doc["threshold"]))])
    return buf.getvalue()
