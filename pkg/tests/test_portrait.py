import numpy as np
import pytest

from blowup_dynamics.blowup_model import lift_point, sigma_point
from blowup_dynamics.errors import DimensionError
from blowup_dynamics.linalg import Matrix
from blowup_dynamics.map_lift import LinearMap, lift_map
from blowup_dynamics.portrait import (
    SIGMA_RADIUS,
    SIZE,
    emit_svg,
    portrait_coords,
    render_svg,
)
from blowup_dynamics.projective import ProjPoint
from blowup_dynamics.sigma_dynamics import fixed_set_on_sigma, iterate_orbit


@pytest.fixture
def saddle():
    return lift_map(LinearMap(Matrix.diag([2.0, 0.5])))


def test_empty_portrait_draws_sigma():
    text = render_svg([])
    assert text.startswith("<svg")
    assert text.rstrip().endswith("</svg>")
    assert text.count("<circle") == 1
    assert f'r="{SIGMA_RADIUS:.3f}"' in text
    assert "<polyline" not in text


def test_sigma_points_lie_on_circle():
    center = SIZE / 2
    for angle in np.linspace(0, np.pi, 7, endpoint=False):
        p = ProjPoint([np.cos(angle), np.sin(angle)])
        x, y = portrait_coords(sigma_point(p))
        assert np.hypot(x - center, y - center) == pytest.approx(SIGMA_RADIUS)


def test_fiber_coordinate_moves_off_sigma():
    center = SIZE / 2
    outside = portrait_coords(lift_point([3.0, 0.0]))
    inside = portrait_coords(lift_point([-3.0, 0.0]))
    assert outside[0] - center > SIGMA_RADIUS > inside[0] - center > 0


def test_portrait_is_deterministic(saddle):
    orbit = iterate_orbit(saddle, lift_point([1.0, 1.0]), 10)
    components = fixed_set_on_sigma(saddle.d0).components
    first = render_svg([orbit], components)
    assert first == render_svg([orbit], components)
    assert first.count("<polyline") == 1
    assert first.count('fill="black"') == 2
    assert "-0.000" not in first


def test_fixed_sigma_is_drawn_thick():
    lift = lift_map(LinearMap(Matrix.diag([2.0, 2.0])))
    text = render_svg([], fixed_set_on_sigma(lift.d0).components)
    assert 'stroke-width="4.000"' in text


def test_portrait_needs_plane():
    lift = lift_map(LinearMap(Matrix.diag([2.0, 3.0, 0.5])))
    orbit = iterate_orbit(lift, lift_point([1.0, 1.0, 1.0]), 3)
    with pytest.raises(DimensionError):
        render_svg([orbit])
    with pytest.raises(DimensionError):
        render_svg([], fixed_set_on_sigma(lift.d0).components)


def test_emit_svg(tmp_path, saddle):
    orbit = iterate_orbit(saddle, lift_point([1.0, -1.0]), 5)
    path = emit_svg([orbit], [], tmp_path / "plots" / "saddle.svg")
    assert path.read_text(encoding="utf-8") == render_svg([orbit])
