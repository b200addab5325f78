"""Dependency-free SVG figures: reachable-area boundaries and score bars.

Output is deterministic text (no timestamps, fixed float formatting) so
figures can be diffed and hashed.
"""

from __future__ import annotations

import numpy as np

from .models import DEFAULT_N_VERTICES, KinematicState, MotionModel

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _header(width, height):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def boundary_polygons(models: dict[str, MotionModel], state: KinematicState, dt: float,
                      n_vertices: int = DEFAULT_N_VERTICES) -> dict[str, np.ndarray]:
    return {label: m.reachable_polygon(state, dt, n_vertices).vertices
            for label, m in models.items()}


def boundaries_svg(models: dict[str, MotionModel], state: KinematicState | None = None,
                   dt: float = 1.0, n_vertices: int = DEFAULT_N_VERTICES,
                   size: int = 480) -> str:
    """Overlay of the reachable-area boundary of each model for one state.

    The default state is a player at the origin moving at 5 m/s along x.
    """
    state = state or KinematicState((0.0, 0.0), (5.0, 0.0))
    polys = boundary_polygons(models, state, dt, n_vertices)
    pts = np.vstack(list(polys.values()) + [np.asarray(state.x0, dtype=float)[None]])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    extent = float(max(hi - lo)) * 1.1 or 1.0
    mid = (lo + hi) / 2.0
    margin = 40
    scale = (size - 2 * margin) / extent

    def xy(p):
        return (margin + (p[0] - mid[0]) * scale + (size - 2 * margin) / 2.0,
                margin + (mid[1] - p[1]) * scale + (size - 2 * margin) / 2.0)

    out = _header(size, size + 20 * len(polys))
    x0, y0 = xy(state.x0)
    out.append(f'<circle cx="{x0:.2f}" cy="{y0:.2f}" r="3" fill="black"/>')
    for i, (label, verts) in enumerate(polys.items()):
        color = PALETTE[i % len(PALETTE)]
        path = " ".join(f"{a:.2f},{b:.2f}" for a, b in map(xy, verts))
        out.append(f'<polygon points="{path}" fill="none" stroke="{color}" stroke-width="1.5">'
                   f'<title>{_esc(label)}</title></polygon>')
        ly = size + 20 * i + 5
        out.append(f'<line x1="20" y1="{ly}" x2="45" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="52" y="{ly + 4}" font-family="sans-serif" font-size="12">'
                   f'{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def score_bars_svg(values: dict[str, float], width: int = 480, height: int = 320,
                   unit: str = "m²") -> str:
    """Bar chart of inverse scores (mean correct-prediction area) per model."""
    if not values:
        raise ValueError("nothing to plot")
    labels = list(values)
    vals = np.array([values[k] for k in labels], dtype=float)
    top = float(np.nanmax(np.where(np.isfinite(vals), vals, np.nan))) if np.any(np.isfinite(vals)) else 1.0
    margin, base = 50, height - 50
    slot = (width - 2 * margin) / len(labels)
    out = _header(width, height)
    out.append(f'<line x1="{margin}" y1="{base}" x2="{width - margin}" y2="{base}" stroke="black"/>')
    for i, (label, v) in enumerate(zip(labels, vals)):
        x = margin + i * slot + slot * 0.15
        w = slot * 0.7
        h = (v / top) * (base - margin) if np.isfinite(v) else 0.0
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{x:.2f}" y="{base - h:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{color}"/>')
        text = f"{v:.4g} {unit}" if np.isfinite(v) else "score 0"
        out.append(f'<text x="{x + w / 2:.2f}" y="{base - h - 6:.2f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_esc(text)}</text>')
        out.append(f'<text x="{x + w / 2:.2f}" y="{base + 18:.2f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
