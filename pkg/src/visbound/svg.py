"""Minimal SVG line charts for bound curves."""

from __future__ import annotations

from xml.sax.saxutils import escape

STYLES = {
    "lp-legendre": 'stroke="#000" stroke-width="3"',
    "combined": 'stroke="#1f4e9c" stroke-width="1"',
    "thm-tt1": 'stroke="#888" stroke-width="1"',
    "thm-tt2a": 'stroke="#c0392b" stroke-width="1.5" stroke-dasharray="8 5"',
    "thm-tt2b-asymptotic": 'stroke="#e67e22" stroke-width="1" stroke-dasharray="2 4 8 4"',
    "prior-t2": 'stroke="#27ae60" stroke-width="1.5" stroke-dasharray="2 3"',
}

W, H, PAD = 640, 480, 50


def render(curves, title: str = "", header: str = "") -> str:
    """Overlay of the given curves on [0, 1] x [0, ymax]."""
    ymax = max([1.0] + [float(max(c.ys)) for c in curves if len(c.ys)])

    def sx(x):
        return PAD + (W - 2 * PAD) * x

    def sy(y):
        y = min(max(y, 0.0), ymax)
        return H - PAD - (H - 2 * PAD) * y / ymax

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">']
    if header:
        out.append(f"<!-- {escape(header)} -->")
    out.append(f'<rect x="0" y="0" width="{W}" height="{H}" fill="#fff"/>')
    out.append(f'<path d="M{PAD},{PAD} V{H - PAD} H{W - PAD}" fill="none" stroke="#000"/>')
    for k in range(6):
        t = k / 5
        out.append(f'<text x="{sx(t):.1f}" y="{H - PAD + 18}" font-size="12" text-anchor="middle">{t:.1f}</text>')
        out.append(f'<text x="{PAD - 8}" y="{sy(t * ymax) + 4:.1f}" font-size="12" text-anchor="end">{t * ymax:.2f}</text>')
    out.append(f'<text x="{W / 2}" y="{H - 10}" font-size="13" text-anchor="middle">normalised volume</text>')
    if title:
        out.append(f'<text x="{W / 2}" y="24" font-size="14" text-anchor="middle">{escape(title)}</text>')
    for row, c in enumerate(curves):
        pts = " ".join(f"{sx(float(x)):.2f},{sy(float(y)):.2f}" for x, y in zip(c.xs, c.ys))
        style = STYLES.get(c.source, 'stroke="#000"')
        out.append(f'<polyline fill="none" {style} points="{pts}"/>')
        ly = PAD + 16 * row
        out.append(f'<line x1="{PAD + 12}" y1="{ly}" x2="{PAD + 42}" y2="{ly}" {style}/>')
        out.append(f'<text x="{PAD + 48}" y="{ly + 4}" font-size="12">{escape(c.source)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
