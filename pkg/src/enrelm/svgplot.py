"""Minimal dependency-free SVG rendering of benchmark error curves.

Each figure gets a train and a test panel: the baseline mean curve with its
min-max band, the approximated-fit curve, and the incremental-fit curve drawn
solid up to its stopping point and dashed (last value replicated) beyond it.
"""
from __future__ import annotations

import numpy as np

__all__ = ["render_benchmark_svg"]

PANEL_W = 520
PANEL_H = 380
MARGIN_L = 62
MARGIN_R = 16
MARGIN_T = 40
MARGIN_B = 46

COLORS = {"elm": "#888888", "aenr": "#d62728", "ienr": "#1f77b4"}
BAND_COLOR = "#cccccc"
LABELS = {"elm": "ELM (mean)", "aenr": "A-ENR-ELM", "ienr": "I-ENR-ELM"}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, count)


class _Panel:
    def __init__(self, x0, title, n_max, y_lo, y_hi):
        self.x0 = x0
        self.title = title
        self.n_max = max(n_max, 2)
        self.y_lo = y_lo
        self.y_hi = y_hi if y_hi > y_lo else y_lo + 1.0
        self.parts: list[str] = []

    def px(self, n):
        frac = (np.asarray(n, dtype=float) - 1.0) / (self.n_max - 1.0)
        return self.x0 + MARGIN_L + frac * (PANEL_W - MARGIN_L - MARGIN_R)

    def py(self, v):
        frac = (np.asarray(v, dtype=float) - self.y_lo) / (self.y_hi - self.y_lo)
        return MARGIN_T + (1.0 - frac) * (PANEL_H - MARGIN_T - MARGIN_B)

    def points(self, ns, vs):
        xs = self.px(ns)
        ys = self.py(vs)
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(np.atleast_1d(xs), np.atleast_1d(ys)))

    def frame(self):
        left = self.x0 + MARGIN_L
        right = self.x0 + PANEL_W - MARGIN_R
        top = MARGIN_T
        bottom = PANEL_H - MARGIN_B
        self.parts.append(
            f'<rect x="{left}" y="{top}" width="{right - left}" '
            f'height="{bottom - top}" fill="none" stroke="#333333" stroke-width="1"/>'
        )
        self.parts.append(
            f'<text x="{(left + right) / 2:.1f}" y="{MARGIN_T - 14}" '
            f'text-anchor="middle" font-size="15" font-family="sans-serif">{self.title}</text>'
        )
        for v in _ticks(self.y_lo, self.y_hi):
            y = float(self.py(v))
            self.parts.append(
                f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="#333333"/>'
            )
            self.parts.append(
                f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" '
                f'font-size="11" font-family="sans-serif">{_fmt(float(v))}</text>'
            )
        for n in np.unique(np.round(_ticks(1, self.n_max)).astype(int)):
            x = float(self.px(n))
            self.parts.append(
                f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 4}" stroke="#333333"/>'
            )
            self.parts.append(
                f'<text x="{x:.2f}" y="{bottom + 18}" text-anchor="middle" '
                f'font-size="11" font-family="sans-serif">{n}</text>'
            )
        self.parts.append(
            f'<text x="{(left + right) / 2:.1f}" y="{bottom + 36}" text-anchor="middle" '
            f'font-size="12" font-family="sans-serif">hidden neurons</text>'
        )

    def band(self, lo, hi):
        ns = np.arange(1, len(lo) + 1)
        pts = self.points(np.concatenate([ns, ns[::-1]]), np.concatenate([hi, lo[::-1]]))
        self.parts.append(f'<polygon points="{pts}" fill="{BAND_COLOR}" stroke="none"/>')

    def line(self, ns, vs, color, dashed=False):
        ns = np.atleast_1d(ns)
        if ns.size == 1:
            x = float(self.px(ns[0]))
            y = float(self.py(np.atleast_1d(vs)[0]))
            self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{color}"/>')
            return
        dash = ' stroke-dasharray="6,5"' if dashed else ""
        self.parts.append(
            f'<polyline points="{self.points(ns, vs)}" fill="none" '
            f'stroke="{color}" stroke-width="1.6"{dash}/>'
        )


def render_benchmark_svg(path, name, curves, n_max, stop_index=None):
    """Write one SVG with train and test panels for a dataset.

    ``curves`` maps method name to (train_values, test_values); the baseline
    entry may also carry (band_min, band_max) test curves under key
    ``elm_band``. The incremental curve is padded with its last value from
    ``stop_index`` onward and that padding is drawn dashed.
    """
    width = 2 * PANEL_W + 20
    height = PANEL_H + 30
    y_vals = [np.asarray(v) for pair in curves.values() for v in pair]
    y_lo = 0.0
    y_hi = float(max(v.max() for v in y_vals if v.size)) * 1.05
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    band = curves.pop("elm_band", None)
    for idx, which in enumerate(("training error", "test error")):
        panel = _Panel(idx * (PANEL_W + 20), f"{name}: {which}", n_max, y_lo, y_hi)
        panel.frame()
        if band is not None and idx == 1:
            panel.band(np.asarray(band[0]), np.asarray(band[1]))
        for method, pair in curves.items():
            vals = np.asarray(pair[idx], dtype=float)
            ns = np.arange(1, vals.size + 1)
            if method == "ienr" and stop_index is not None and 0 < stop_index <= vals.size:
                panel.line(ns[:stop_index], vals[:stop_index], COLORS[method])
                if stop_index < n_max:
                    pad_ns = np.arange(stop_index, n_max + 1)
                    pad_vs = np.full(pad_ns.size, vals[stop_index - 1])
                    panel.line(pad_ns, pad_vs, COLORS[method], dashed=True)
            else:
                panel.line(ns, vals, COLORS[method])
        parts.extend(panel.parts)
    legend_y = height - 8
    x_cursor = MARGIN_L
    for method in ("elm", "aenr", "ienr"):
        if method in curves:
            parts.append(
                f'<line x1="{x_cursor}" y1="{legend_y - 4}" x2="{x_cursor + 26}" '
                f'y2="{legend_y - 4}" stroke="{COLORS[method]}" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{x_cursor + 32}" y="{legend_y}" font-size="12" '
                f'font-family="sans-serif">{LABELS[method]}</text>'
            )
            x_cursor += 150
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
