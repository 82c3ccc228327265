"""Deterministic SVG drawings of graphs in the unit-aspect square."""

from __future__ import annotations

from fractions import Fraction

from .functions import FiniteGraph, GeneratedFn, SetValuedFn

MARGIN = 20
RENDER_DEPTH = 12


def _num(v: Fraction) -> str:
    s = f"{float(v):.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def render_svg(f: SetValuedFn, width: int = 400, height: int = 400, depth: int = RENDER_DEPTH) -> str:
    """One <line> per materialized segment, one <rect> per box, and an axis frame.

    Generated functions are drawn from their truncation at ``depth``; segment
    families of finite graphs contribute ``depth`` members each.  Zero-length
    segments are skipped.
    """
    g = f.truncate(depth) if isinstance(f, GeneratedFn) else f
    assert isinstance(g, FiniteGraph)
    (x0, x1), (y0, y1) = g.domain, g.codomain
    sx = Fraction(width - 2 * MARGIN) / (x1 - x0)
    sy = Fraction(height - 2 * MARGIN) / (y1 - y0)

    def px(x):
        return _num(MARGIN + (x - x0) * sx)

    def py(y):
        return _num(height - MARGIN - (y - y0) * sy)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f"<title>{_escape(g.name or 'graph')}</title>",
        f'<path d="M{px(x0)} {py(y0)} H{px(x1)} V{py(y1)} H{px(x0)} Z" fill="none" stroke="#888" stroke-width="1"/>',
    ]
    for box in g.boxes:
        out.append(
            f'<rect x="{px(box.x0)}" y="{py(box.y1)}" width="{_num((box.x1 - box.x0) * sx)}" '
            f'height="{_num((box.y1 - box.y0) * sy)}" fill="#000" fill-opacity="0.25" stroke="none"/>'
        )
    for seg in g.materialized_segments(depth):
        if seg.x0 == seg.x1 and seg.y0 == seg.y1:
            continue
        out.append(
            f'<line x1="{px(seg.x0)}" y1="{py(seg.y0)}" x2="{px(seg.x1)}" y2="{py(seg.y1)}" '
            f'stroke="#000" stroke-width="1.5"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
