"""Self-maps of F^n fixing the origin and their lifts to the blowup.

A map h with invertible derivative at 0 lifts to X by

    (x, [x]) -> (h(x), [h(x)])           off Sigma,
    (0, [y]) -> (0, [Dh|_0 y])            on Sigma,

and the lift commutes with the blowdown: q(h^(v)) = h(q(v)). Lifting
respects composition, so h -> h^ is a homomorphism.
"""

import abc
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np
from voluptuous import Invalid, MultipleInvalid
from voluptuous.humanize import humanize_error

from . import DEFAULT_SEED, logger
from .blowup_model import (
    BlowupPoint,
    blowdown,
    incidence_residual,
    mu_of,
    sample_points,
    sigma_point,
)
from .errors import MapSpecError, SingularMatrixError
from .linalg import (
    FieldTag,
    Matrix,
    Scalar,
    as_vector,
    is_invertible,
    rotation_matrix,
    scalar_from_json,
    scalar_to_json,
)
from .projective import ProjPoint, proj_dist, projectivize_linear
from .schema import map_spec

SMOOTH = math.inf


class MapSpec(abc.ABC):
    """An analytically specified self-map h of F^n with h(0) = 0."""

    family: ClassVar[str]

    @property
    @abc.abstractmethod
    def n(self) -> int: ...

    @property
    @abc.abstractmethod
    def field(self) -> FieldTag: ...

    @property
    @abc.abstractmethod
    def smoothness_order(self) -> float: ...

    @abc.abstractmethod
    def __call__(self, x: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def derivative_at_origin(self) -> Matrix: ...

    @abc.abstractmethod
    def to_json(self) -> dict[str, Any]: ...

    def _check_derivative(self) -> None:
        if not is_invertible(self.derivative_at_origin()):
            raise SingularMatrixError(  # noqa: TRY003
                f"{self.family} map has a singular derivative at the origin",
            )


@dataclass(frozen=True, eq=False)
class LinearMap(MapSpec):
    matrix: Matrix
    family: ClassVar[str] = "linear"

    def __post_init__(self):
        self._check_derivative()

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def field(self) -> FieldTag:
        return self.matrix.field

    @property
    def smoothness_order(self) -> float:
        return SMOOTH

    def __call__(self, x):
        return self.matrix.entries @ np.asarray(x)

    def derivative_at_origin(self) -> Matrix:
        return self.matrix

    def to_json(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "matrix": self.matrix.to_json(),
            "field": self.field.value,
        }


@dataclass(frozen=True, eq=False)
class KinkMap(MapSpec):
    """h(x, y) = (g(x), y) on R^2 with g(x) = x + x^k |x|.

    g is C^k but not C^{k+1} at 0 and g'(0) = 1; `order=1` gives
    g(x) = x + x|x|, whose lift is not differentiable on Sigma.
    """

    order: int = 1
    family: ClassVar[str] = "abs_kink"

    def __post_init__(self):
        if self.order < 1:
            raise MapSpecError(  # noqa: TRY003
                f"kink order must be >= 1, got {self.order}",
            )

    @property
    def n(self) -> int:
        return 2

    @property
    def field(self) -> FieldTag:
        return FieldTag.REAL

    @property
    def smoothness_order(self) -> float:
        return self.order

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([x[0] + x[0] ** self.order * abs(x[0]), x[1]])

    def derivative_at_origin(self) -> Matrix:
        return Matrix.identity(2)

    def to_json(self) -> dict[str, Any]:
        return {"family": self.family, "order": self.order}


@dataclass(frozen=True, eq=False)
class C1ExampleMap(KinkMap):
    """h(x, y) = (x + x|x|, y), the order-one kink under its own family name."""

    order: int = field(default=1, init=False)
    family: ClassVar[str] = "paper_example_c1"

    def to_json(self) -> dict[str, Any]:
        return {"family": self.family}


Term = tuple[tuple[int, ...], Scalar]


@dataclass(frozen=True, eq=False)
class PolynomialMap(MapSpec):
    """Coordinate-wise polynomials; `terms[i]` lists (exponents, coeff) of h_i."""

    terms: tuple[tuple[Term, ...], ...]
    field_tag: FieldTag = FieldTag.REAL
    family: ClassVar[str] = "polynomial"

    def __post_init__(self):
        n = len(self.terms)
        for i, coordinate in enumerate(self.terms):
            for exponents, _ in coordinate:
                if len(exponents) != n:
                    raise MapSpecError(  # noqa: TRY003
                        f"term of coordinate {i} has {len(exponents)} exponents, "
                        f"expected {n}",
                    )
                if not any(exponents):
                    raise MapSpecError(  # noqa: TRY003
                        f"coordinate {i} has a constant term; h must fix the origin",
                    )
        self._check_derivative()

    @property
    def n(self) -> int:
        return len(self.terms)

    @property
    def field(self) -> FieldTag:
        return self.field_tag

    @property
    def smoothness_order(self) -> float:
        return SMOOTH

    def __call__(self, x):
        x = np.asarray(x)
        out = np.zeros(self.n, dtype=np.result_type(x, self.field_tag.dtype))
        for i, coordinate in enumerate(self.terms):
            for exponents, coeff in coordinate:
                out[i] += coeff * np.prod(x ** np.array(exponents))
        return out

    def derivative_at_origin(self) -> Matrix:
        d0 = np.zeros((self.n, self.n), dtype=self.field_tag.dtype)
        for i, coordinate in enumerate(self.terms):
            for exponents, coeff in coordinate:
                if sum(exponents) == 1:
                    d0[i, exponents.index(1)] += coeff
        return Matrix(d0, self.field_tag)

    def to_json(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "field": self.field_tag.value,
            "terms": [
                [
                    {"exponents": list(exponents), "coeff": scalar_to_json(coeff)}
                    for exponents, coeff in coordinate
                ]
                for coordinate in self.terms
            ],
        }


@dataclass(frozen=True, eq=False)
class RotationScalingMap(MapSpec):
    """h = lam * rotation(theta) on R^2."""

    lam: float
    theta: float
    family: ClassVar[str] = "rotation_scaling"

    def __post_init__(self):
        if not self.lam > 0:
            raise MapSpecError(  # noqa: TRY003
                f"scaling must be positive, got {self.lam}",
            )

    @property
    def n(self) -> int:
        return 2

    @property
    def field(self) -> FieldTag:
        return FieldTag.REAL

    @property
    def smoothness_order(self) -> float:
        return SMOOTH

    def __call__(self, x):
        return self.derivative_at_origin().entries @ np.asarray(x)

    def derivative_at_origin(self) -> Matrix:
        return self.lam * rotation_matrix(self.theta)

    def to_json(self) -> dict[str, Any]:
        return {"family": self.family, "lambda": self.lam, "theta": self.theta}


@dataclass(frozen=True, eq=False)
class CompositeMap(MapSpec):
    """maps[0] o maps[1] o ... o maps[-1]; the last map is applied first."""

    maps: tuple[MapSpec, ...]
    family: ClassVar[str] = "composite"

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.maps:
            raise MapSpecError("composite of no maps")  # noqa: TRY003
        first = self.maps[0]
        for other in self.maps[1:]:
            if other.n != first.n or other.field is not first.field:
                raise MapSpecError(  # noqa: TRY003
                    f"cannot compose maps of F^{first.n} ({first.field.value}) "
                    f"and F^{other.n} ({other.field.value})",
                )
        self._check_derivative()

    @property
    def n(self) -> int:
        return self.maps[0].n

    @property
    def field(self) -> FieldTag:
        return self.maps[0].field

    @property
    def smoothness_order(self) -> float:
        return min(spec.smoothness_order for spec in self.maps)

    def __call__(self, x):
        for spec in reversed(self.maps):
            x = spec(x)
        return x

    def derivative_at_origin(self) -> Matrix:
        d0 = self.maps[0].derivative_at_origin()
        for spec in self.maps[1:]:
            d0 = d0 @ spec.derivative_at_origin()
        return d0

    def to_json(self) -> dict[str, Any]:
        return {"family": self.family, "maps": [spec.to_json() for spec in self.maps]}


def derivative_at_origin(spec: MapSpec) -> Matrix:
    d0 = spec.derivative_at_origin()
    if not is_invertible(d0):
        raise SingularMatrixError(  # noqa: TRY003
            f"singular derivative for {spec.family} map",
        )
    return d0


def eval_map(spec: MapSpec, x: Any) -> np.ndarray:
    return spec(as_vector(x, spec.n))


def _build(data: dict[str, Any]) -> MapSpec:
    family = data["family"]
    field_tag = FieldTag(data["field"]) if "field" in data else None
    if family == "linear":
        return LinearMap(Matrix.from_json(data["matrix"], field_tag))
    if family == "paper_example_c1":
        return C1ExampleMap()
    if family == "abs_kink":
        return KinkMap(data.get("order", 1))
    if family == "polynomial":
        terms = tuple(
            tuple(
                (tuple(term["exponents"]), scalar_from_json(term["coeff"]))
                for term in coordinate
            )
            for coordinate in data["terms"]
        )
        if field_tag is None:
            complex_coeff = any(
                isinstance(c, complex) for coord in terms for _, c in coord
            )
            field_tag = FieldTag.COMPLEX if complex_coeff else FieldTag.REAL
        return PolynomialMap(terms, field_tag)
    if family == "rotation_scaling":
        return RotationScalingMap(float(data["lambda"]), float(data["theta"]))
    return CompositeMap(tuple(_build(item) for item in data["maps"]))


def spec_from_json(data: Any) -> MapSpec:
    """Build a MapSpec from its JSON description.

    Raises:
    ------
        MapSpecError: the description does not match the family's schema.
        SingularMatrixError: the map's derivative at the origin is singular.
    """
    try:
        data = map_spec(data)
    except (Invalid, MultipleInvalid) as e:
        raise MapSpecError(humanize_error(data, e)) from e
    return _build(data)


@dataclass(frozen=True, eq=False)
class LiftedMapEvaluator:
    """The lift h^ of `base` to the blowup X."""

    base: MapSpec
    d0: Matrix = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "d0", derivative_at_origin(self.base))

    @property
    def n(self) -> int:
        return self.base.n

    def on_sigma(self, y: ProjPoint) -> ProjPoint:
        return projectivize_linear(self.d0, y)

    def __call__(self, p: BlowupPoint) -> BlowupPoint:
        if p.on_sigma:
            return sigma_point(self.on_sigma(p.y))
        hx = self.base(p.x)
        # [h(x)] = [h(x) / mu]; dividing first keeps the direction well scaled
        # for points very close to Sigma
        direction = hx / mu_of(p)
        if not np.any(direction):
            return BlowupPoint(hx, self.on_sigma(p.y))
        return BlowupPoint(hx, ProjPoint(direction, p.field))


def lift_map(spec: MapSpec) -> LiftedMapEvaluator:
    return LiftedMapEvaluator(spec)


@dataclass
class ResidualReport:
    check: str
    family: str
    samples: int
    seed: int
    tol: float
    max_base_residual: float = 0.0
    max_fiber_residual: float = 0.0
    max_incidence: float = 0.0

    @property
    def max_residual(self) -> float:
        return max(self.max_base_residual, self.max_fiber_residual, self.max_incidence)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "family": self.family,
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "max_base_residual": self.max_base_residual,
            "max_fiber_residual": self.max_fiber_residual,
            "max_incidence": self.max_incidence,
            "passed": self.passed,
        }


def _scaled_incidence(p: BlowupPoint) -> float:
    return float(incidence_residual(p.x, p.y) / (1 + np.linalg.norm(p.x)))


def check_commutation(
    spec: MapSpec,
    sample_count: int = 10_000,
    tol: float = 1e-10,
    rng_seed: int = DEFAULT_SEED,
    sigma_fraction: float = 0.1,
) -> ResidualReport:
    """Sample X and measure |q(h^(v)) - h(q(v))| and the incidence of h^(v).

    Returns:
    -------
        ResidualReport: `passed` is True when every residual is within `tol`.
    """
    logger.debug(f"check_commutation `{spec.family=}` `{sample_count=}` `{rng_seed=}`")
    rng = np.random.default_rng(rng_seed)
    lift = lift_map(spec)
    report = ResidualReport("commutation", spec.family, sample_count, rng_seed, tol)
    for v in sample_points(rng, spec.n, sample_count, spec.field, sigma_fraction):
        image = lift(v)
        base = float(np.linalg.norm(image.x - spec(blowdown(v))))
        report.max_base_residual = max(report.max_base_residual, base)
        report.max_incidence = max(report.max_incidence, _scaled_incidence(image))
    if not report.passed:
        logger.warning(
            f"commutation failed for {spec.family}: "
            f"max residual {report.max_residual:.3g}",
        )
    return report


def check_functoriality(
    g: MapSpec,
    h: MapSpec,
    sample_count: int = 1000,
    tol: float = 1e-9,
    rng_seed: int = DEFAULT_SEED,
) -> ResidualReport:
    """Compare the lift of g o h with the composite of the two lifts."""
    logger.debug(f"check_functoriality `{g.family=}` `{h.family=}` `{sample_count=}`")
    rng = np.random.default_rng(rng_seed)
    composite = lift_map(CompositeMap((g, h)))
    lift_g, lift_h = lift_map(g), lift_map(h)
    report = ResidualReport(
        "functoriality",
        f"{g.family}o{h.family}",
        sample_count,
        rng_seed,
        tol,
    )
    for v in sample_points(rng, h.n, sample_count, h.field):
        a = composite(v)
        b = lift_g(lift_h(v))
        report.max_base_residual = max(
            report.max_base_residual,
            float(np.linalg.norm(a.x - b.x)),
        )
        report.max_fiber_residual = max(report.max_fiber_residual, proj_dist(a.y, b.y))
        report.max_incidence = max(report.max_incidence, _scaled_incidence(a))
    if not report.passed:
        logger.warning(
            f"functoriality failed for {report.family}: "
            f"max residual {report.max_residual:.3g}",
        )
    return report


def approach_sigma(
    lift: LiftedMapEvaluator,
    u: Any,
    scales: Sequence[float] = (1e-2, 1e-4, 1e-6, 1e-8),
) -> np.ndarray:
    """Distances from the fiber of h^(s u, [u]) to its limit P(Dh|_0)[u]."""
    y = ProjPoint(as_vector(u, lift.n))
    limit = lift.on_sigma(y)
    return np.array(
        [proj_dist(lift(BlowupPoint(s * y.homog, y)).y, limit) for s in scales],
    )


def builtin_specs() -> list[MapSpec]:
    """One representative of every built-in family, used by `lift-check`."""
    a = Matrix(np.array([[2.0, 1.0], [0.5, 3.0]]))
    return [
        LinearMap(a),
        C1ExampleMap(),
        KinkMap(2),
        PolynomialMap(
            (
                (((1, 0), 1.0), ((3, 0), 1.0)),
                (((0, 1), 0.5), ((2, 0), 0.25), ((1, 1), -0.5)),
            ),
        ),
        RotationScalingMap(2.0, math.pi / 6),
        CompositeMap((C1ExampleMap(), LinearMap(a))),
    ]
