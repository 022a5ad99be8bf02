"""Deterministic SVG phase portraits of lifted planar maps near Sigma.

A point (x, [y]) of the real blowup of R^2 is drawn in polar form: the
direction angle of [y] in [0, pi) is doubled to run once around the circle,
and the fiber coordinate mu moves it off the Sigma circle, squashed by
arctan so the whole fiber fits in a finite annulus.
"""

from collections.abc import Sequence
from pathlib import Path
from typing import Union

import numpy as np

from .blowup_model import BlowupPoint, mu_of
from .errors import DimensionError
from .linalg import FieldTag
from .projective import ProjPoint
from .sigma_dynamics import FixedComponent, Orbit

SIZE = 400
SIGMA_RADIUS = 120.0
FIBER_SPREAD = 0.8
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(value: float) -> str:
    # fixed precision keeps the output byte-identical across runs
    text = f"{value:.3f}"
    return "0.000" if text == "-0.000" else text


def _attr(value: Union[str, float]) -> str:
    return _fmt(value) if isinstance(value, float) else str(value)


def _props(**attrs: Union[str, float]) -> str:
    return " ".join(
        f'{key.replace("_", "-")}="{_attr(value)}"' for key, value in attrs.items()
    )


def _sigma_circle(center: float, width: float) -> str:
    return _props(
        cx=center,
        cy=center,
        r=SIGMA_RADIUS,
        fill="none",
        stroke="black",
        stroke_width=width,
    )


def _direction_angle(y: ProjPoint) -> float:
    return float(np.arctan2(y.homog[1], y.homog[0]) % np.pi)


def portrait_coords(p: Union[BlowupPoint, ProjPoint]) -> tuple[float, float]:
    """Canvas coordinates of a point of X (or of Sigma, for a bare direction)."""
    if isinstance(p, BlowupPoint):
        y, mu = p.y, float(mu_of(p))
    else:
        y, mu = p, 0.0
    angle = 2 * _direction_angle(y)
    radius = SIGMA_RADIUS * (1 + FIBER_SPREAD * (2 / np.pi) * np.arctan(mu))
    center = SIZE / 2
    return center + radius * np.cos(angle), center - radius * np.sin(angle)


def _check_planar(points: Sequence[Union[BlowupPoint, ProjPoint]]) -> None:
    for p in points:
        if p.n != 2 or p.field is not FieldTag.REAL:
            raise DimensionError(  # noqa: TRY003
                "portraits need points of the real blowup of R^2",
            )


def render_svg(
    orbits: Sequence[Orbit],
    components: Sequence[FixedComponent] = (),
) -> str:
    center = SIZE / 2
    size = str(SIZE)
    svg = _props(xmlns="http://www.w3.org/2000/svg", width=size, height=size)
    background = _props(x="0", y="0", width=size, height=size, fill="white")
    lines = [
        f"<svg {svg}>",
        f"<rect {background} />",
        f"<circle {_sigma_circle(center, 1.0)} />",
    ]
    for i, orbit in enumerate(orbits):
        _check_planar(orbit.points)
        color = PALETTE[i % len(PALETTE)]
        coords = [portrait_coords(p) for p in orbit.points]
        path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in coords)
        polyline = _props(points=path, fill="none", stroke=color, stroke_width=1.0)
        lines.append(f"<polyline {polyline} />")
        x0, y0 = coords[0]
        lines.append(f'<circle {_props(cx=x0, cy=y0, r=2.5, fill=color)} />')
    for comp in components:
        if comp.field is not FieldTag.REAL or comp.basis.shape[0] != 2:
            raise DimensionError(  # noqa: TRY003
                "portraits need fixed components on RP^1",
            )
        if comp.dim >= 1:
            # all of Sigma is fixed
            lines.append(f"<circle {_sigma_circle(center, 4.0)} />")
            continue
        x, y = portrait_coords(ProjPoint(comp.basis[:, 0]))
        lines.append(f'<circle {_props(cx=x, cy=y, r=5.0, fill="black")} />')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_svg(
    orbits: Sequence[Orbit],
    components: Sequence[FixedComponent],
    path: Union[str, Path],
) -> Path:
    """Write the portrait of `orbits` and fixed `components` to `path`.

    Raises:
    ------
        DimensionError: some point or component is not on the real blowup of R^2.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(orbits, components), encoding="utf-8")
    return path
