import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from blowup_dynamics.errors import (
    FieldMismatchError,
    OutsideChartError,
    SingularMatrixError,
    ZeroVectorError,
)
from blowup_dynamics.linalg import FieldTag, Matrix, rotation_matrix
from blowup_dynamics.projective import (
    ProjPoint,
    chart_coords,
    chart_embed,
    dist_to_subspace,
    proj_dist,
    proj_eq,
    projectivize_linear,
)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


def test_normalized_representative():
    p = ProjPoint(np.array([-3.0, 4.0]))
    assert_allclose(p.homog, [-0.6, 0.8])
    q = ProjPoint(np.array([1j, 0.0]))
    assert_allclose(q.homog, [1.0, 0.0])
    assert q.field is FieldTag.COMPLEX


def test_zero_vector():
    with pytest.raises(ZeroVectorError):
        ProjPoint(np.zeros(3))


@settings(max_examples=100, deadline=None)
@given(
    st.lists(finite, min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
    st.floats(min_value=1e-6, max_value=1e6)
    | st.floats(min_value=-1e6, max_value=-1e-6),
)
def test_scale_invariance(v, scale):
    a = ProjPoint(np.array(v))
    b = ProjPoint(scale * np.array(v))
    assert proj_dist(a, b) <= 1e-9
    assert_allclose(a.homog, b.homog, atol=1e-12)


def test_complex_phase_invariance():
    v = np.array([1 + 2j, 3 - 1j])
    assert proj_eq(ProjPoint(v), ProjPoint(np.exp(0.7j) * v))


def test_proj_dist_values():
    e0, e1 = ProjPoint([1.0, 0.0]), ProjPoint([0.0, 1.0])
    assert proj_dist(e0, e1) == pytest.approx(np.pi / 2)
    assert proj_dist(ProjPoint([1.0, 1.0]), e0) == pytest.approx(np.pi / 4)
    assert proj_dist(ProjPoint([1.0, 0.0]), ProjPoint([-1.0, 0.0])) == 0


def test_proj_dist_field_mismatch():
    with pytest.raises(FieldMismatchError):
        proj_dist(ProjPoint([1.0, 0.0]), ProjPoint([1.0, 0.0, 0.0]))
    with pytest.raises(FieldMismatchError):
        proj_dist(ProjPoint([1.0, 0.0]), ProjPoint([1j, 0.0]))


def test_projectivize_linear():
    image = projectivize_linear(Matrix.diag([2.0, 3.0]), ProjPoint([1.0, 1.0]))
    assert proj_eq(image, ProjPoint([2.0, 3.0]))
    quarter = rotation_matrix(np.pi / 2)
    p = ProjPoint([1.0, 0.0])
    assert proj_eq(projectivize_linear(quarter, p), ProjPoint([0.0, 1.0]))
    assert proj_eq(projectivize_linear(quarter, projectivize_linear(quarter, p)), p)


def test_projectivize_linear_errors():
    with pytest.raises(SingularMatrixError):
        projectivize_linear(Matrix.diag([1.0, 0.0]), ProjPoint([1.0, 1.0]))
    with pytest.raises(FieldMismatchError):
        projectivize_linear(Matrix(np.eye(2) * 1j), ProjPoint([1.0, 1.0]))


def test_charts():
    p = ProjPoint([2.0, 4.0])
    assert_allclose(chart_coords(p, 0), [2.0])
    assert_allclose(chart_coords(p, 1), [0.5])
    assert proj_eq(chart_embed([0.5], 1), p)
    with pytest.raises(OutsideChartError):
        chart_coords(ProjPoint([0.0, 1.0]), 0)


def test_dist_to_subspace():
    basis = np.array([[1.0], [0.0], [0.0]])
    assert dist_to_subspace(ProjPoint([5.0, 0.0, 0.0]), basis) == pytest.approx(0)
    diagonal = ProjPoint([1.0, 1.0, 0.0])
    assert dist_to_subspace(diagonal, basis) == pytest.approx(np.pi / 4)
    plane = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    normal = ProjPoint([0.0, 0.0, 1.0])
    assert dist_to_subspace(normal, plane) == pytest.approx(np.pi / 2)


def test_json():
    p = ProjPoint([1.0, 2.0])
    assert proj_eq(ProjPoint.from_json(p.to_json()), p)
