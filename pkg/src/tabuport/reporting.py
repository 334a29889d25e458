"""CSV and SVG output for frontiers, reports, traces and run summaries.

CSV is the interface of record; the SVG plots are a convenience. Every file
is written to a temporary sibling and renamed into place, so a failed run
never leaves a half-written output behind.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from html import escape
from pathlib import Path
from typing import Iterable, Sequence

from .exceptions import SchemaMismatch
from .frontier import DeviationReport, Frontier, FrontierPoint
from .portfolio import Portfolio

FRONTIER_HEADER = ["risk", "return", "lambda", "assets", "weights"]
REPORT_HEADER = ["metric", "value"]


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x: float | None) -> str:
    # repr is the shortest string that round-trips, and is platform independent
    return "" if x is None else repr(float(x))


def frontier_csv(frontier: Frontier) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FRONTIER_HEADER)
    for p in frontier:
        if p.portfolio is not None:
            assets = ";".join(str(int(a)) for a in p.portfolio.assets)
            weights = ";".join(repr(float(x)) for x in p.portfolio.weights)
        else:
            assets = weights = ""
        w.writerow([_num(p.risk), _num(p.ret), _num(p.risk_aversion), assets, weights])
    return buf.getvalue()


def write_frontier_csv(frontier: Frontier, path: str | os.PathLike) -> None:
    atomic_write(path, frontier_csv(frontier))


def _cell(row: dict, col: str, lineno: int, path) -> str:
    value = row.get(col)
    if value is None:
        raise SchemaMismatch(f"{path}: row {lineno} is missing column {col!r}")
    return value.strip()


def _float(text: str, col: str, lineno: int, path) -> float:
    try:
        return float(text)
    except ValueError:
        raise SchemaMismatch(
            f"{path}: column {col!r} row {lineno}: {text!r} is not a number"
        ) from None


def read_frontier_csv(path: str | os.PathLike) -> Frontier:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return Frontier([])
        missing = [c for c in FRONTIER_HEADER if c not in reader.fieldnames]
        if missing:
            raise SchemaMismatch(f"{path}: missing column {missing[0]!r}")
        points = []
        for lineno, row in enumerate(reader, start=2):
            risk = _float(_cell(row, "risk", lineno, path), "risk", lineno, path)
            ret = _float(_cell(row, "return", lineno, path), "return", lineno, path)
            lam_text = _cell(row, "lambda", lineno, path)
            lam = _float(lam_text, "lambda", lineno, path) if lam_text else None
            a_text = _cell(row, "assets", lineno, path)
            w_text = _cell(row, "weights", lineno, path)
            portfolio = None
            if a_text:
                assets = [int(_float(a, "assets", lineno, path)) for a in a_text.split(";")]
                weights = [_float(x, "weights", lineno, path) for x in w_text.split(";")]
                if len(assets) != len(weights):
                    raise SchemaMismatch(
                        f"{path}: row {lineno} has {len(assets)} assets but {len(weights)} weights"
                    )
                portfolio = Portfolio(assets, weights)
            points.append(FrontierPoint(risk, ret, portfolio, lam))
    return Frontier(points)


def report_rows(report: DeviationReport, time_seconds: float | None = None) -> list[tuple]:
    return [
        ("median_percentage_error", report.median_error),
        ("mean_percentage_error", report.mean_error),
        ("risk_error", report.risk_error),
        ("return_error", report.return_error),
        ("time_seconds", time_seconds),
    ]


def write_report_csv(
    report: DeviationReport, path: str | os.PathLike, time_seconds: float | None = None
) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for name, value in report_rows(report, time_seconds):
        w.writerow([name, _num(value)])
    atomic_write(path, buf.getvalue())


def format_report(report: DeviationReport, label: str = "", time_seconds: float | None = None) -> str:
    lines = [f"{label or 'instance'}: {len(report.deviations)} points"]
    for name, value in report_rows(report, time_seconds):
        shown = "-" if value is None or (isinstance(value, float) and math.isnan(value)) else f"{value:.4f}"
        lines.append(f"  {name.replace('_', ' '):<26}{shown:>12}")
    return "\n".join(lines)


def write_rows_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, float) else v for v in row])
    atomic_write(path, buf.getvalue())


# --------------------------------------------------------------------------
# SVG
# --------------------------------------------------------------------------

_W, _H, _PAD = 640, 440, 60


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def frontier_svg(
    series: Sequence[tuple[str, Frontier, str]],
    title: str = "",
    connect: Sequence[bool] | None = None,
) -> str:
    """Scatter/line plot of risk (x) against return (y).

    ``series`` holds ``(label, frontier, colour)`` triples; ``connect`` says
    which of them are drawn as a polyline instead of markers.
    """
    connect = list(connect) if connect is not None else [False] * len(series)
    xs = [p.risk for _, f, _ in series for p in f]
    ys = [p.ret for _, f, _ in series for p in f]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1e-12
    if y1 == y0:
        y1 = y0 + 1e-12

    def sx(v):
        return _PAD + (v - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def sy(v):
        return _H - _PAD - (v - y0) / (y1 - y0) * (_H - 2 * _PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<text x="{_W / 2}" y="{_H - 15}" text-anchor="middle">Risk (variance)</text>',
        f'<text x="15" y="{_H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {_H / 2})">Return</text>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{sx(t):.1f}" y="{_H - _PAD + 15}" text-anchor="middle">{t:.2e}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{_PAD - 5}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:.2e}</text>')

    for idx, ((label, frontier, colour), line) in enumerate(zip(series, connect)):
        pts = [(sx(p.risk), sy(p.ret)) for p in frontier]
        if line and pts:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        else:
            out += [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{colour}"/>' for x, y in pts]
        ly = _PAD + 15 * idx
        out.append(f'<rect x="{_W - _PAD - 120}" y="{ly - 8}" width="10" height="10" fill="{colour}"/>')
        out.append(f'<text x="{_W - _PAD - 105}" y="{ly + 1}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_frontier_svg(path: str | os.PathLike, *args, **kwargs) -> None:
    atomic_write(path, frontier_svg(*args, **kwargs))
