import itertools
import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

from blowup_dynamics.blowup_model import lift_point, sigma_point
from blowup_dynamics.errors import MapSpecError, SingularMatrixError
from blowup_dynamics.linalg import FieldTag, Matrix, rotation_matrix
from blowup_dynamics.map_lift import (
    C1ExampleMap,
    CompositeMap,
    KinkMap,
    LinearMap,
    PolynomialMap,
    RotationScalingMap,
    approach_sigma,
    builtin_specs,
    check_commutation,
    check_functoriality,
    derivative_at_origin,
    eval_map,
    lift_map,
    spec_from_json,
)
from blowup_dynamics.projective import ProjPoint, proj_eq


@pytest.mark.parametrize(
    ("spec", "x", "expected"),
    [
        (KinkMap(), [0.5, 1.0], [0.75, 1.0]),
        (KinkMap(), [-0.5, 1.0], [-0.75, 1.0]),
        (RotationScalingMap(2.0, np.pi / 2), [1.0, 0.0], [0.0, 2.0]),
        (LinearMap(Matrix.diag([2.0, 3.0])), [1.0, -1.0], [2.0, -3.0]),
    ],
)
def test_eval_map(spec, x, expected):
    assert_allclose(eval_map(spec, x), expected, atol=1e-15)
    assert_allclose(eval_map(spec, np.zeros(2)), [0.0, 0.0], atol=0)


def test_linear_lift_on_sigma():
    lift = lift_map(LinearMap(Matrix.diag([2.0, 3.0])))
    image = lift(sigma_point(ProjPoint([1.0, 1.0])))
    assert image.on_sigma
    assert proj_eq(image.y, ProjPoint([2.0, 3.0]))


def test_lift_off_sigma():
    lift = lift_map(KinkMap())
    image = lift(lift_point([0.5, 1.0]))
    assert_allclose(image.x, [0.75, 1.0])
    assert proj_eq(image.y, ProjPoint([0.75, 1.0]))


def test_named_c1_example():
    spec = spec_from_json({"family": "paper_example_c1"})
    assert isinstance(spec, C1ExampleMap)
    assert spec.order == spec.smoothness_order == 1
    assert_allclose(spec([0.5, 1.0]), [0.75, 1.0])
    assert derivative_at_origin(spec).allclose(Matrix.identity(2))
    assert spec.to_json() == {"family": "paper_example_c1"}
    with pytest.raises(TypeError):
        C1ExampleMap(2)
    assert spec_from_json({"family": "abs_kink", "order": 2}).family == "abs_kink"


def test_kink_derivative_is_identity():
    assert derivative_at_origin(KinkMap()).allclose(Matrix.identity(2))
    assert KinkMap(3).smoothness_order == 3
    with pytest.raises(MapSpecError):
        KinkMap(0)


def test_singular_derivative():
    with pytest.raises(SingularMatrixError):
        LinearMap(Matrix(np.array([[1.0, 0.0], [0.0, 0.0]])))
    with pytest.raises(SingularMatrixError):
        # h(x, y) = (x, y^2) has a singular derivative at the origin
        PolynomialMap(((((1, 0), 1.0),), (((0, 2), 1.0),)))


def test_polynomial_constant_term():
    with pytest.raises(MapSpecError, match="constant term"):
        PolynomialMap(((((0, 0), 1.0), ((1, 0), 1.0)), (((0, 1), 1.0),)))


def test_composite_order_and_derivative():
    a = LinearMap(Matrix(np.array([[1.0, 2.0], [0.0, 1.0]])))
    b = LinearMap(Matrix.diag([2.0, 3.0]))
    composite = CompositeMap((a, b))
    assert composite.derivative_at_origin().allclose(a.matrix @ b.matrix)
    assert_allclose(composite([1.0, 1.0]), a(b([1.0, 1.0])))


def test_composite_dimension_mismatch():
    with pytest.raises(MapSpecError):
        CompositeMap((KinkMap(), LinearMap(Matrix.identity(3))))


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.family)
def test_spec_json_round_trip(spec):
    rebuilt = spec_from_json(spec.to_json())
    x = np.array([0.3, -0.7])
    assert_allclose(rebuilt(x), spec(x))
    assert rebuilt.family == spec.family


@pytest.mark.parametrize(
    ("data", "message"),
    [
        ({"family": "nope"}, "unknown family"),
        ({"family": "linear"}, "required key not provided"),
        ({"family": "rotation_scaling", "lambda": -1, "theta": 0}, "positive"),
        ({"family": "abs_kink", "order": 0}, "value must be at least 1"),
        ({"family": "paper_example_c1", "order": 2}, "extra keys not allowed"),
    ],
)
def test_spec_from_json_errors(data, message):
    with pytest.raises(MapSpecError, match=message):
        spec_from_json(data)


def test_complex_linear_spec():
    spec = spec_from_json({"family": "linear", "matrix": [[[0, 1], 0], [0, 2]]})
    assert spec.field is FieldTag.COMPLEX
    image = lift_map(spec)(sigma_point(ProjPoint(np.array([1.0, 1.0], dtype=complex))))
    assert proj_eq(image.y, ProjPoint(np.array([1j, 2.0])))


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.family)
def test_commutation(spec):
    report = check_commutation(spec, sample_count=2000)
    assert report.passed, report.to_dict()
    assert report.max_base_residual <= 1e-10


@pytest.mark.slow
@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.family)
def test_commutation_acceptance(spec):
    assert check_commutation(spec, sample_count=10_000, tol=1e-10).passed


def test_commutation_complex():
    a = Matrix(np.array([[1 + 1j, 0.5], [0.0, 2 - 1j]]))
    assert check_commutation(LinearMap(a), sample_count=1000).passed


def test_functoriality_pairs():
    specs = builtin_specs()
    pairs = list(itertools.product(specs, repeat=2))[:20]
    for seed, (g, h) in enumerate(pairs):
        report = check_functoriality(g, h, sample_count=200, rng_seed=seed)
        assert report.passed, report.to_dict()


def test_functoriality_of_linear_maps():
    a = LinearMap(Matrix(np.array([[2.0, 1.0], [0.0, 1.0]])))
    b = LinearMap(rotation_matrix(0.3))
    report = check_functoriality(a, b)
    assert report.max_fiber_residual <= 1e-9


def test_failed_check_logs_warning(caplog):
    spec = LinearMap(Matrix.diag([2.0, 3.0]))
    with caplog.at_level(logging.WARNING, logger="blowup_dynamics"):
        report = check_commutation(spec, sample_count=10, tol=-1.0)
    assert not report.passed
    assert "commutation failed for linear" in caplog.records[0].message


def test_approach_sigma_converges():
    lift = lift_map(KinkMap())
    distances = approach_sigma(lift, [1.0, 2.0], scales=(1e-2, 1e-4, 1e-6))
    assert np.all(np.diff(distances) < 0)
    assert distances[-1] <= 1e-5


def test_approach_sigma_is_linear_for_c1_example():
    scales = np.array([1e-4, 1e-6, 1e-8])
    distances = approach_sigma(lift_map(C1ExampleMap()), [1.0, 2.0], scales)
    assert distances[0] > 0
    assert_allclose(distances / scales, distances[0] / scales[0], rtol=1e-3)


@pytest.mark.parametrize(
    "spec",
    [
        KinkMap(2),
        PolynomialMap(((((1, 0), 1.0), ((3, 0), 1.0)), (((0, 1), 1.0),))),
    ],
    ids=["abs_kink_2", "cubic"],
)
def test_approach_sigma_smooth_families(spec):
    distances = approach_sigma(lift_map(spec), [1.0, 2.0])
    assert np.all(np.diff(distances[:3]) < 0)
    assert distances[-1] <= 1e-6


def test_rotation_scaling():
    spec = RotationScalingMap(2.0, np.pi / 6)
    assert_allclose(spec([1.0, 0.0]), [np.sqrt(3), 1.0])
    with pytest.raises(MapSpecError):
        RotationScalingMap(0.0, 1.0)
