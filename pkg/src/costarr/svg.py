"""Minimal standalone SVG output for curves and heat strips (no external assets)."""

from __future__ import annotations

import numpy as np

_HEAD = '<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'


def curve_svg(x, y, xlabel: str = "FPR", ylabel: str = "CCR", width: int = 400, height: int = 400) -> str:
    """Polyline plot of ``y`` over ``x`` on the unit square."""
    pad = 40
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    sx = lambda v: pad + v * (width - 2 * pad)  # noqa: E731
    sy = lambda v: height - pad - v * (height - 2 * pad)  # noqa: E731
    pts = " ".join(f"{sx(a):.3f},{sy(b):.3f}" for a, b in zip(x.tolist(), y.tolist()))
    out = [_HEAD.format(w=width, h=height)]
    out.append(f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
               'fill="none" stroke="black"/>\n')
    out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>\n')
    out.append(f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">{xlabel}</text>\n')
    out.append(f'<text x="12" y="{height / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 12 {height / 2})">{ylabel}</text>\n')
    out.append("</svg>\n")
    return "".join(out)


def heat_strip_svg(matrix, cell: int = 3) -> str:
    """Grey-level grid, one rect per cell; darker means larger value."""
    m = np.asarray(matrix, dtype=np.float64)
    rows, cols = m.shape
    lo, hi = float(m.min()), float(m.max())
    span = hi - lo if hi > lo else 1.0
    out = [_HEAD.format(w=cols * cell, h=rows * cell)]
    for r in range(rows):
        for c in range(cols):
            g = int(round(255 * (1.0 - (m[r, c] - lo) / span)))
            out.append(f'<rect x="{c * cell}" y="{r * cell}" width="{cell}" height="{cell}" '
                       f'fill="rgb({g},{g},{g})"/>\n')
    out.append("</svg>\n")
    return "".join(out)
