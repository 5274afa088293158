"""Static SVG scatter of a run in the (mass, entropy rate) plane.

Open circles are infeasible successes, grey discs feasible but dominated
designs, black discs the Pareto-optimal ones.  Failed simulations have no
outputs and are not drawn.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 480
MARGIN = {"left": 80, "right": 20, "top": 20, "bottom": 60}

STYLE = """
  .infeasible { fill: none; stroke: #444; stroke-width: 1; }
  .dominated { fill: #aaa; stroke: none; }
  .pareto { fill: #000; stroke: none; }
  .axis { stroke: #000; stroke-width: 1; }
  text { font-family: sans-serif; font-size: 12px; }
"""


def nice_ticks(lo, hi, target=6):
    """Round tick positions covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10)), key=lambda s: abs(s - raw))
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def _fmt(v):
    return f"{v:.6g}"


def classify(log_):
    """Split successful records into (infeasible, dominated, pareto) lists of points."""
    pareto = set(log_.pareto_ids())
    groups = {"infeasible": [], "dominated": [], "pareto": []}
    for r in log_:
        if not r.success:
            continue
        key = "pareto" if r.eval_id in pareto else ("dominated" if r.feasible else "infeasible")
        groups[key].append((float(r.objectives[0]), float(r.objectives[1]), r.eval_id))
    return groups


def render_svg(groups, x_label="Mass (kg)", y_label="Entropy generation rate (W/K)",
               title=None) -> str:
    points = [p for g in groups.values() for p in g]
    if points:
        xs = np.array([p[0] for p in points])
        ys = np.array([p[1] for p in points])
        x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    pad_x = 0.05 * (x1 - x0) if x1 > x0 else max(abs(x0), 1.0) * 0.1
    pad_y = 0.05 * (y1 - y0) if y1 > y0 else max(abs(y0), 1.0) * 0.1
    x0, x1, y0, y1 = x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y
    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * plot_w

    def sy(v):
        return MARGIN["top"] + (y1 - v) / (y1 - y0) * plot_h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">', f"<style>{STYLE}</style>"]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    bottom, left = MARGIN["top"] + plot_h, MARGIN["left"]
    out.append(f'<line class="axis" x1="{left}" y1="{bottom}" x2="{left + plot_w}" y2="{bottom}"/>')
    out.append(f'<line class="axis" x1="{left}" y1="{MARGIN["top"]}" x2="{left}" y2="{bottom}"/>')
    for t in nice_ticks(x0, x1):
        x = sx(t)
        out.append(f'<line class="axis" x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 5}"/>')
        out.append(f'<text x="{x:.2f}" y="{bottom + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in nice_ticks(y0, y1):
        y = sy(t)
        out.append(f'<line class="axis" x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{left + plot_w / 2}" y="{HEIGHT - 15}" text-anchor="middle">'
               f'{escape(x_label)}</text>')
    out.append(f'<text transform="translate(18,{MARGIN["top"] + plot_h / 2}) rotate(-90)" '
               f'text-anchor="middle">{escape(y_label)}</text>')
    # draw Pareto points last so they sit on top
    for cls in ("infeasible", "dominated", "pareto"):
        for x, y, eval_id in groups[cls]:
            out.append(f'<circle class="{cls}" data-eval-id="{eval_id}" cx="{sx(x):.2f}" '
                       f'cy="{sy(y):.2f}" r="4"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_log(log_, path, **kwargs):
    """Write the scatter of ``log_`` to ``path``; returns the marker counts."""
    groups = classify(log_)
    with open(path, "w") as fh:
        fh.write(render_svg(groups, **kwargs))
    return {k: len(v) for k, v in groups.items()}
