"""Minimal SVG output: scatter plots and line plots with axes."""

from html import escape

import numpy as np

WIDTH, HEIGHT, PAD = 480, 360, 50
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


class _Frame:
    def __init__(self, xlim, ylim, logx=False, logy=False):
        self.logx, self.logy = logx, logy
        self.x0, self.x1 = (np.log10(v) if logx else v for v in xlim)
        self.y0, self.y1 = (np.log10(v) if logy else v for v in ylim)

    def px(self, x):
        x = np.log10(x) if self.logx else x
        return PAD + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * PAD)

    def py(self, y):
        y = np.log10(y) if self.logy else y
        return HEIGHT - PAD - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * PAD)


def _limits(v, log):
    v = np.asarray(v, float)
    v = v[np.isfinite(v) & ((v > 0) if log else True)]
    lo, hi = (v.min(), v.max()) if len(v) else (0.1, 1.0)
    if log:
        return lo / 1.5, hi * 1.5
    span = hi - lo or 1.0
    return lo - 0.05 * span, hi + 0.05 * span


def _axes(fr, title, xlabel, ylabel, xlim, ylim):
    out = [f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
           'fill="none" stroke="black"/>',
           f'<text x="{WIDTH / 2}" y="{PAD / 2}" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="15" y="{HEIGHT / 2}" transform="rotate(-90 15 {HEIGHT / 2})" '
           f'text-anchor="middle">{escape(ylabel)}</text>']
    for v, anchor in ((xlim[0], "start"), (xlim[1], "end")):
        out.append(f'<text x="{fr.px(v):.1f}" y="{HEIGHT - PAD + 15}" font-size="10" '
                   f'text-anchor="{anchor}">{v:.3g}</text>')
    for v in ylim:
        out.append(f'<text x="{PAD - 4}" y="{fr.py(v):.1f}" font-size="10" '
                   f'text-anchor="end">{v:.3g}</text>')
    return out


def _wrap(body):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'font-family="sans-serif" font-size="12">\n' + "\n".join(body) + "\n</svg>\n")


def scatter(x, y, title="", xlabel="", ylabel="", log=True, identity=True):
    """Scatter plot; on log axes, with the line ``y = x`` for reference."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    keep = np.isfinite(x) & np.isfinite(y) & ((x > 0) & (y > 0) if log else True)
    x, y = x[keep], y[keep]
    lim = _limits(np.concatenate([x, y]), log)
    fr = _Frame(lim, lim, log, log)
    body = _axes(fr, title, xlabel, ylabel, lim, lim)
    if identity:
        body.append(f'<line x1="{fr.px(lim[0]):.1f}" y1="{fr.py(lim[0]):.1f}" '
                    f'x2="{fr.px(lim[1]):.1f}" y2="{fr.py(lim[1]):.1f}" stroke="red"/>')
    for a, b in zip(x, y):
        body.append(f'<circle cx="{fr.px(a):.1f}" cy="{fr.py(b):.1f}" r="3" '
                    f'fill="{COLORS[0]}"/>')
    return _wrap(body)


def curves(x, ys, labels=(), title="", xlabel="", ylabel=""):
    x = np.asarray(x, float)
    ys = [np.asarray(y, float) for y in ys]
    xlim = (x.min(), x.max())
    ylim = _limits(np.concatenate(ys), False)
    fr = _Frame(xlim, ylim)
    body = _axes(fr, title, xlabel, ylabel, xlim, ylim)
    for k, y in enumerate(ys):
        pts = " ".join(f"{fr.px(a):.1f},{fr.py(b):.1f}" for a, b in zip(x, y))
        color = COLORS[k % len(COLORS)]
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        if k < len(labels):
            body.append(f'<text x="{WIDTH - PAD - 5}" y="{PAD + 15 * (k + 1)}" '
                        f'text-anchor="end" fill="{color}">{escape(labels[k])}</text>')
    return _wrap(body)
