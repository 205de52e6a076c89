"""Plain SVG output for ROC curves, bar charts and box plots."""
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

_W, _H, _M = 480, 480, 50


def _doc(body, width=_W, height=_H):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n{body}</svg>\n')


def roc_svg(curves):
    """``curves`` is a list of ``(label, [(fpr, tpr), ...])``; axes are [0, 1]^2."""
    size = _W - 2 * _M

    def xy(fpr, tpr):
        return f"{_M + fpr * size:.2f},{_H - _M - tpr * size:.2f}"

    parts = [
        f'<rect x="{_M}" y="{_M}" width="{size}" height="{size}" fill="none" stroke="black"/>',
        f'<line x1="{_M}" y1="{_H - _M}" x2="{_M + size}" y2="{_M}" stroke="#bbb" stroke-dasharray="4 4"/>',
        f'<text x="{_W / 2}" y="{_H - 15}" text-anchor="middle" font-size="12">False positive rate</text>',
        f'<text x="15" y="{_H / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {_H / 2})">True positive rate</text>',
    ]
    for k, (label, points) in enumerate(curves):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(xy(f, t) for f, t in points)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{_M + size - 5}" y="{_H - _M - 8 - 14 * (len(curves) - 1 - k)}" '
                     f'text-anchor="end" font-size="11" fill="{color}">{escape(label)}</text>')
    return _doc("\n".join(parts) + "\n")


def bar_svg(title, counts):
    """Bar chart of a ``{level: count}`` mapping."""
    labels = [str(k) for k in counts]
    values = list(counts.values())
    top = max(values) if values and max(values) > 0 else 1
    width = _W - 2 * _M
    slot = width / max(len(values), 1)
    parts = [f'<text x="{_W / 2}" y="25" text-anchor="middle" font-size="14">{escape(title)}</text>']
    for i, (lab, v) in enumerate(zip(labels, values)):
        h = (_H - 2 * _M) * v / top
        x = _M + i * slot + slot * 0.1
        parts.append(f'<rect x="{x:.2f}" y="{_H - _M - h:.2f}" width="{slot * 0.8:.2f}" '
                     f'height="{h:.2f}" fill="{PALETTE[0]}"/>')
        parts.append(f'<text x="{x + slot * 0.4:.2f}" y="{_H - _M + 15}" text-anchor="middle" '
                     f'font-size="11">{escape(lab)}</text>')
        parts.append(f'<text x="{x + slot * 0.4:.2f}" y="{_H - _M - h - 4:.2f}" text-anchor="middle" '
                     f'font-size="10">{v}</text>')
    return _doc("\n".join(parts) + "\n")


def box_svg(columns):
    """Box plots of ``{name: values}`` on a shared axis (Tukey whiskers)."""
    names = list(columns)
    data = [np.asarray(columns[n], dtype=float) for n in names]
    lo = min(float(d.min()) for d in data)
    hi = max(float(d.max()) for d in data)
    span = hi - lo or 1.0
    height = _H - 2 * _M
    slot = (_W - 2 * _M) / max(len(names), 1)

    def ypos(v):
        return _H - _M - (v - lo) / span * height

    parts = [f'<line x1="{_M}" y1="{_M}" x2="{_M}" y2="{_H - _M}" stroke="black"/>']
    for tick in np.linspace(lo, hi, 5):
        parts.append(f'<text x="{_M - 5}" y="{ypos(tick) + 4:.2f}" text-anchor="end" '
                     f'font-size="10">{tick:.2f}</text>')
    for i, (name, d) in enumerate(zip(names, data)):
        q1, med, q3 = np.percentile(d, [25, 50, 75])
        iqr = q3 - q1
        low = d[d >= q1 - 1.5 * iqr].min()
        high = d[d <= q3 + 1.5 * iqr].max()
        cx = _M + (i + 0.5) * slot
        half = slot * 0.3
        parts.append(f'<line x1="{cx:.2f}" y1="{ypos(low):.2f}" x2="{cx:.2f}" y2="{ypos(high):.2f}" stroke="black"/>')
        parts.append(f'<rect x="{cx - half:.2f}" y="{ypos(q3):.2f}" width="{2 * half:.2f}" '
                     f'height="{max(ypos(q1) - ypos(q3), 0.5):.2f}" fill="#cfe2f3" stroke="black"/>')
        parts.append(f'<line x1="{cx - half:.2f}" y1="{ypos(med):.2f}" x2="{cx + half:.2f}" '
                     f'y2="{ypos(med):.2f}" stroke="black" stroke-width="2"/>')
        for v in d[(d < low) | (d > high)][:200]:
            parts.append(f'<circle cx="{cx:.2f}" cy="{ypos(v):.2f}" r="1.5" fill="none" stroke="#555"/>')
        parts.append(f'<text x="{cx:.2f}" y="{_H - _M + 15}" text-anchor="middle" font-size="11">{escape(name)}</text>')
    return _doc("\n".join(parts) + "\n")
