"""SVG pictures of trajectory structures: separatrices solid, generic trajectories dashed,
zeros as open dots and poles as filled dots."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .config import Config
from .differentials import (
    DecompositionMismatch,
    QuadraticDifferential,
    Tracer,
    critical_points,
    separatrices,
    strip_decomposition,
)

__all__ = ["render_svg", "write_svg"]


def _frame(points, margin: float = 0.6):
    pts = np.asarray(points, dtype=complex)
    if not len(pts):
        pts = np.array([0j])
    c = pts.mean()
    r = max(float(np.max(np.abs(pts - c))), 0.5) * (1 + margin) + 0.5
    return c, r


def _path(samples, c, r, size):
    z = np.asarray(samples)
    z = z[np.isfinite(z)]
    # clip far points to the frame so rays to infinity leave the picture cleanly
    far = np.abs(z - c) > 2 * r
    z = np.where(far, c + 2 * r * (z - c) / np.maximum(np.abs(z - c), 1e-300), z)
    x = (z.real - c.real + r) / (2 * r) * size
    y = (c.imag + r - z.imag) / (2 * r) * size
    return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))


def _dot(z, c, r, size, filled: bool) -> str:
    x = (z.real - c.real + r) / (2 * r) * size
    y = (c.imag + r - z.imag) / (2 * r) * size
    fill = "black" if filled else "white"
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{fill}" stroke="black" stroke-width="1.5"/>'


def render_svg(phi: QuadraticDifferential, config: Config | None = None, theta: float | None = None, size: int = 600) -> str:
    """Picture of the phase-``theta`` trajectory structure of ``phi``."""
    cfg = config or Config()
    theta = phi.theta if theta is None else theta
    rep = critical_points(phi)
    finite = list(rep.zeros) + [p for p, _ in phi.poles]
    c, r = _frame(finite)
    tr = Tracer(phi, cfg)
    generic = []
    try:
        dec = strip_decomposition(phi, cfg, theta=theta, generic=True, tracer=tr)
        rays = dec.rays
        generic = [s.generic for s in dec.strips + dec.half_planes if s.generic is not None]
        title = f"saddle-free at theta={theta:.6f}: {len(dec.strips)} strips, {len(dec.half_planes)} half-planes"
    except DecompositionMismatch as e:
        rays = separatrices(tr, theta)
        title = f"theta={theta:.6f}: {e}"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f"<title>{escape(title)}</title>",
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for t in generic:
        out.append(f'<polyline points="{_path(t.samples, c, r, size)}" fill="none" stroke="gray" stroke-width="1" stroke-dasharray="5,4"/>')
    for key in sorted(rays):
        out.append(
            f'<polyline points="{_path(rays[key].samples, c, r, size)}" fill="none" stroke="black" stroke-width="1.5">'
            f"<title>separatrix {key[0]}.{key[1]} -> {escape(rays[key].end.label)}</title></polyline>"
        )
    for z in rep.zeros:
        out.append(_dot(z, c, r, size, False))
    for p, _ in phi.poles:
        out.append(_dot(p, c, r, size, True))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, phi: QuadraticDifferential, config: Config | None = None, theta: float | None = None) -> None:
    with open(path, "w") as f:
        f.write(render_svg(phi, config, theta))
