"""Finite-difference detection of the regularity a lift loses on Sigma.

Lifting a C^k map gives a C^{k-1} map: along a curve crossing Sigma the
fiber coordinate of h^ picks up a kink at order k. The one-sided derivative
estimates here are Richardson-extrapolated difference quotients; a kink is
declared when the left/right mismatch exceeds ten times the quotient noise.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from math import comb
from typing import Any, Callable, Optional, Protocol

import numpy as np

from . import logger
from .blowup_model import BlowupPoint, sigma_point
from .errors import CurveError, StepScheduleError
from .linalg import as_vector
from .map_lift import LiftedMapEvaluator
from .projective import CHART_TOL, ProjPoint, chart_coords

DEFAULT_STEPS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
HIGHER_ORDER_STEPS = (0.1, 0.05, 0.025, 0.0125, 0.00625)
RICHARDSON_LEVELS = 2
KINK_FACTOR = 10.0
NOISE_FLOOR = 64 * np.finfo(float).eps
MAX_PROBE_ORDER = 4


class Curve(Protocol):
    def __call__(self, t: float) -> BlowupPoint: ...


@dataclass(frozen=True)
class SigmaCurve:
    """The lift t -> ((t, m t), [t, m t]) of a line of slope m, [1, m] at t = 0."""

    m: float

    def __post_init__(self):
        if self.m == 0:
            raise CurveError("slope must be nonzero")  # noqa: TRY003

    def __call__(self, t: float) -> BlowupPoint:
        if t == 0:
            return sigma_point(ProjPoint(np.array([1.0, self.m])))
        base = np.array([t, self.m * t])
        return BlowupPoint(base, ProjPoint(base))


@dataclass(frozen=True, eq=False)
class SigmaArc:
    """A curve t -> (0, [a + t b]) inside Sigma."""

    start: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        start = as_vector(self.start)
        velocity = as_vector(self.velocity, start.shape[0])
        if np.linalg.matrix_rank(np.stack([start, velocity])) < 2:
            raise CurveError(  # noqa: TRY003
                "arc start and velocity must be independent",
            )
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "velocity", velocity)

    def __call__(self, t: float) -> BlowupPoint:
        return sigma_point(ProjPoint(self.start + t * self.velocity))


@dataclass
class SlopeReport:
    order: int
    part: str
    chart: Optional[int]
    left: np.ndarray
    right: np.ndarray
    noise: np.ndarray = field(repr=False)

    @property
    def jump(self) -> np.ndarray:
        return np.abs(self.right - self.left)

    @property
    def kink(self) -> np.ndarray:
        return self.jump > KINK_FACTOR * self.noise

    def to_dict(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "part": self.part,
            "chart": self.chart,
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "jump": self.jump.tolist(),
            "kink": self.kink.tolist(),
        }


def _check_steps(steps: Sequence[float]) -> np.ndarray:
    h = np.asarray(steps, dtype=float)
    if h.ndim != 1 or h.size < RICHARDSON_LEVELS + 1:
        raise StepScheduleError(  # noqa: TRY003
            f"need at least {RICHARDSON_LEVELS + 1} steps, got {h.size}",
        )
    if np.any(h <= 0) or np.any(np.diff(h) >= 0):
        raise StepScheduleError(  # noqa: TRY003
            "steps must be positive and strictly decreasing",
        )
    return h


def _extrapolate(quotients: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Neville table for extrapolation to h = 0 of a series in powers of h
    table = [quotients]
    for level in range(1, RICHARDSON_LEVELS + 1):
        prev = table[-1]
        ratio = (h[:-level] / h[level:])[:, None]
        table.append(prev[1:] + (prev[1:] - prev[:-1]) / (ratio - 1))
    best = table[-1]
    if best.shape[0] > 1:
        noise = np.abs(best[-1] - best[-2])
    else:
        noise = np.abs(best[-1] - table[-2][-1])
    return best[-1], noise


def _one_sided(
    f: Callable[[float], np.ndarray],
    order: int,
    side: int,
    h: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    weights = [(-1) ** (order - i) * comb(order, i) for i in range(order + 1)]
    quotients = []
    scale = 0.0
    for step in h:
        values = [f(side * i * step) for i in range(order + 1)]
        scale = max(scale, max(float(np.max(np.abs(v))) for v in values))
        diff = sum(w * v for w, v in zip(weights, values))
        # backward differences carry a sign (-1)^order
        quotients.append(side**order * diff / step**order)
    estimate, noise = _extrapolate(np.array(quotients), h)
    floor = NOISE_FLOOR * 2**order * (1 + scale) / h[-1] ** order
    return estimate, np.maximum(noise, floor)


def _coordinate_function(
    lift: LiftedMapEvaluator,
    curve: Curve,
    part: str,
    chart: Optional[int],
) -> Callable[[float], np.ndarray]:
    if part == "base":
        return lambda t: np.asarray(lift(curve(t)).x)
    if part != "fiber":
        raise CurveError(  # noqa: TRY003
            f"part must be 'fiber' or 'base', got {part!r}",
        )
    return lambda t: chart_coords(lift(curve(t)).y, chart)


def select_chart(lift: LiftedMapEvaluator, curve: Curve) -> int:
    """The chart of largest modulus coordinate at h^(c(0))."""
    return int(np.argmax(np.abs(lift(curve(0.0)).y.homog)))


def _derivatives(
    lift: LiftedMapEvaluator,
    curve: Curve,
    order: int,
    chart: Optional[int],
    steps: Sequence[float],
    part: str,
) -> SlopeReport:
    h = _check_steps(steps)
    if part == "fiber":
        if chart is None:
            chart = select_chart(lift, curve)
        # raises OutsideChartError when h^(c(0)) misses the chart
        chart_coords(lift(curve(0.0)).y, chart, CHART_TOL)
    else:
        chart = None
    f = _coordinate_function(lift, curve, part, chart)
    right, noise_right = _one_sided(f, order, 1, h)
    left, noise_left = _one_sided(f, order, -1, h)
    return SlopeReport(
        order,
        part,
        chart,
        np.real_if_close(left),
        np.real_if_close(right),
        noise_left + noise_right,
    )


def one_sided_derivatives(
    lift: LiftedMapEvaluator,
    curve: Curve,
    chart: Optional[int] = None,
    steps: Sequence[float] = DEFAULT_STEPS,
    part: str = "fiber",
) -> SlopeReport:
    """Left and right slopes at t = 0 of a coordinate of h^ o curve.

    Args:
    ----
        lift: the lifted map h^.
        curve: a curve in X, usually a `SigmaCurve` crossing Sigma at t = 0.
        chart: 0-based affine chart for the fiber part; chosen automatically
            (largest coordinate of h^(c(0))) when None.
        steps: strictly decreasing positive step sizes.
        part: "fiber" for chart coordinates of [y], "base" for x.

    Raises:
    ------
        OutsideChartError: the image leaves the chart for some sampled t.
        StepScheduleError: the steps are not strictly decreasing.
    """
    return _derivatives(lift, curve, 1, chart, steps, part)


@dataclass
class ProbeReport:
    max_order: int
    orders: np.ndarray
    slopes: list[SlopeReport]

    @property
    def chart(self) -> Optional[int]:
        return self.slopes[0].chart


def smoothness_probe(
    lift: LiftedMapEvaluator,
    curve: Curve,
    max_order: int = MAX_PROBE_ORDER,
    chart: Optional[int] = None,
    part: str = "fiber",
) -> ProbeReport:
    """Estimate per coordinate the differentiability order of h^ o curve at 0.

    The estimate is the largest j <= max_order such that the one-sided
    derivatives of orders 1..j agree.
    """
    if not 1 <= max_order <= MAX_PROBE_ORDER:
        raise CurveError(f"max_order must be in [1, {MAX_PROBE_ORDER}]")  # noqa: TRY003
    slopes = []
    orders: Optional[np.ndarray] = None
    for order in range(1, max_order + 1):
        steps = DEFAULT_STEPS if order == 1 else HIGHER_ORDER_STEPS
        report = _derivatives(lift, curve, order, chart, steps, part)
        chart = report.chart
        slopes.append(report)
        if orders is None:
            orders = np.full(report.left.shape, max_order)
        undecided = orders == max_order
        orders[undecided & report.kink] = order - 1
    assert orders is not None
    logger.debug(f"smoothness_probe `{part=}` `{chart=}` orders={orders.tolist()}")
    return ProbeReport(max_order, orders, slopes)


def regularity_scan(
    lift: LiftedMapEvaluator,
    m: float,
    chart: Optional[int] = None,
    max_order: int = MAX_PROBE_ORDER,
) -> dict[str, Any]:
    """Slopes, jump and order estimate of the fiber of h^ along the slope-m line."""
    curve = SigmaCurve(m)
    slopes = one_sided_derivatives(lift, curve, chart)
    probe = smoothness_probe(lift, curve, max_order, slopes.chart)
    base = one_sided_derivatives(lift, curve, part="base")
    return {
        "m": m,
        "chart": slopes.chart,
        "left": slopes.left.tolist(),
        "right": slopes.right.tolist(),
        "jump": slopes.jump.tolist(),
        "kink": slopes.kink.tolist(),
        "order_estimate": probe.orders.tolist(),
        "base_jump": base.jump.tolist(),
    }
