import numpy as np
import pytest

from blowup_dynamics.errors import CurveError, OutsideChartError, StepScheduleError
from blowup_dynamics.linalg import Matrix
from blowup_dynamics.map_lift import KinkMap, LinearMap, PolynomialMap, lift_map
from blowup_dynamics.regularity import (
    SigmaArc,
    SigmaCurve,
    one_sided_derivatives,
    regularity_scan,
    select_chart,
    smoothness_probe,
)

SLOPES = (0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0)


@pytest.mark.parametrize("m", SLOPES)
def test_kink_jump_in_chart_about_e2(m):
    report = one_sided_derivatives(lift_map(KinkMap()), SigmaCurve(m), chart=1)
    assert report.left[0] == pytest.approx(-1 / m, abs=1e-6)
    assert report.right[0] == pytest.approx(1 / m, abs=1e-6)
    assert report.jump[0] == pytest.approx(2 / abs(m), abs=1e-3)
    assert report.kink[0]


@pytest.mark.parametrize("m", SLOPES)
def test_kink_jump_in_chart_about_e1(m):
    report = one_sided_derivatives(lift_map(KinkMap()), SigmaCurve(m), chart=0)
    assert report.jump[0] == pytest.approx(2 * abs(m), abs=1e-3)


@pytest.mark.parametrize(
    "spec",
    [
        LinearMap(Matrix(np.array([[2.0, 1.0], [0.5, 3.0]]))),
        LinearMap(Matrix.diag([1.0, -2.0])),
        PolynomialMap(
            (
                (((1, 0), 1.0), ((2, 1), 3.0)),
                (((0, 1), 1.0), ((3, 0), -1.0)),
            ),
        ),
    ],
)
@pytest.mark.parametrize("m", SLOPES)
def test_smooth_lifts_have_no_jump(spec, m):
    report = one_sided_derivatives(lift_map(spec), SigmaCurve(m))
    assert np.all(report.jump <= 1e-6)
    assert not np.any(report.kink)


def test_base_part_is_smooth():
    report = one_sided_derivatives(lift_map(KinkMap()), SigmaCurve(1.0), part="base")
    assert report.chart is None
    assert np.all(report.jump <= 1e-6)


def test_select_chart():
    lift = lift_map(KinkMap())
    assert select_chart(lift, SigmaCurve(2.0)) == 1
    assert select_chart(lift, SigmaCurve(0.5)) == 0


def test_outside_chart():
    lift = lift_map(LinearMap(Matrix.diag([1.0, 2.0])))
    arc = SigmaArc(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    with pytest.raises(OutsideChartError):
        one_sided_derivatives(lift, arc, chart=0)


def test_step_schedule_errors():
    lift = lift_map(KinkMap())
    with pytest.raises(StepScheduleError):
        one_sided_derivatives(lift, SigmaCurve(1.0), steps=(1e-2, 1e-3, 1e-3))
    with pytest.raises(StepScheduleError):
        one_sided_derivatives(lift, SigmaCurve(1.0), steps=(1e-2, 1e-3))


def test_curve_errors():
    with pytest.raises(CurveError):
        SigmaCurve(0.0)
    with pytest.raises(CurveError):
        SigmaArc(np.array([1.0, 0.0]), np.array([2.0, 0.0]))
    with pytest.raises(CurveError):
        one_sided_derivatives(lift_map(KinkMap()), SigmaCurve(1.0), part="both")


def test_tangential_smoothness_on_sigma():
    lift = lift_map(KinkMap())
    arc = SigmaArc(np.array([1.0, 1.0]), np.array([0.0, 1.0]))
    report = one_sided_derivatives(lift, arc)
    assert np.all(report.jump <= 1e-6)


def test_smoothness_probe_kink():
    probe = smoothness_probe(lift_map(KinkMap()), SigmaCurve(1.0), max_order=2, chart=1)
    assert probe.orders.tolist() == [0]
    assert probe.chart == 1


def test_smoothness_probe_linear():
    lift = lift_map(LinearMap(Matrix(np.array([[2.0, 1.0], [0.5, 3.0]]))))
    probe = smoothness_probe(lift, SigmaCurve(1.0), max_order=2)
    assert probe.orders.tolist() == [2]


def test_smoothness_probe_order_range():
    with pytest.raises(CurveError):
        smoothness_probe(lift_map(KinkMap()), SigmaCurve(1.0), max_order=9)


def test_regularity_scan():
    scan = regularity_scan(lift_map(KinkMap()), 1.0, chart=1, max_order=2)
    assert scan["chart"] == 1
    assert scan["jump"][0] == pytest.approx(2.0, abs=1e-3)
    assert scan["order_estimate"] == [0]
    assert max(scan["base_jump"]) <= 1e-6


@pytest.mark.parametrize("k", [2, 3])
def test_smoothness_probe_loses_one_order(k):
    probe = smoothness_probe(lift_map(KinkMap(k)), SigmaCurve(1.0), chart=1)
    assert probe.orders.tolist() == [k - 1]


def test_smoothness_probe_cubic_example():
    cubic = PolynomialMap(((((1, 0), 1.0), ((3, 0), 1.0)), (((0, 1), 1.0),)))
    probe = smoothness_probe(lift_map(cubic), SigmaCurve(1.0), max_order=2, chart=1)
    assert probe.orders.tolist() == [2]
    scan = regularity_scan(lift_map(cubic), 2.0, chart=1, max_order=2)
    assert scan["jump"][0] <= 1e-6
