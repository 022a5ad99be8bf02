import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from blowup_dynamics.blowup_model import (
    BlowupPoint,
    blowdown,
    bundle_projection,
    fiber_point,
    incidence_residual,
    is_incident,
    lift_point,
    mu_of,
    sample_points,
    sigma_point,
)
from blowup_dynamics.errors import IncidenceError, LiftError
from blowup_dynamics.linalg import FieldTag
from blowup_dynamics.projective import ProjPoint, proj_eq

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(finite, min_size=2, max_size=5).filter(
        lambda v: np.linalg.norm(v) > 1e-6,
    ),
)
def test_lift_point_is_incident(x):
    p = lift_point(np.array(x))
    assert is_incident(p)
    assert_allclose(blowdown(p), x)
    assert proj_eq(bundle_projection(p), ProjPoint(np.array(x)))


def test_lift_point_at_origin():
    with pytest.raises(LiftError):
        lift_point(np.zeros(2))


def test_sigma_points():
    p = sigma_point(ProjPoint([1.0, 2.0]))
    assert p.on_sigma
    assert_allclose(blowdown(p), [0.0, 0.0])
    assert mu_of(p) == 0


def test_fiber_point_coordinate():
    y = ProjPoint([3.0, 4.0])
    p = fiber_point(y, -2.5)
    assert not p.on_sigma
    assert mu_of(p) == pytest.approx(-2.5)
    assert_allclose(blowdown(p), [-1.5, -2.0])


def test_non_incident_point():
    p = BlowupPoint(np.array([1.0, 0.0]), ProjPoint([0.0, 1.0]))
    assert incidence_residual(p.x, p.y) == pytest.approx(1.0)
    assert not is_incident(p)
    with pytest.raises(IncidenceError):
        blowdown(p)
    with pytest.raises(IncidenceError):
        bundle_projection(p)


def test_complex_points():
    x = np.array([1 + 1j, 2 - 1j])
    p = lift_point(x)
    assert p.field is FieldTag.COMPLEX
    assert is_incident(p)
    assert_allclose(mu_of(p) * p.y.homog, x)


def test_real_x_over_complex_direction():
    p = BlowupPoint(np.array([1.0, 0.0]), ProjPoint([1j, 0.0]))
    assert p.x.dtype == np.complex128


def test_sample_points():
    rng = np.random.default_rng(0)
    points = sample_points(rng, 3, 100, sigma_fraction=0.2)
    assert len(points) == 100
    assert sum(p.on_sigma for p in points) == 20
    norms = [np.linalg.norm(p.x) for p in points if not p.on_sigma]
    assert min(norms) >= 1e-3 * (1 - 1e-12)
    assert max(norms) <= 1.0 + 1e-12
    assert all(is_incident(p) for p in points)


def test_json():
    p = lift_point(np.array([1.0, -2.0]))
    q = BlowupPoint.from_json(p.to_json())
    assert_allclose(q.x, p.x)
    assert proj_eq(q.y, p.y)
