"""The incidence model X of the blowup of F^n at the origin.

X is the set of pairs (x, [y]) in F^n x P(F^n) with x on the line [y]. Its
blowdown q forgets [y]; the exceptional locus Sigma = q^{-1}(0) is a copy of
P(F^n), and the projection to [y] makes X the tautological line bundle.
"""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from . import DEFAULT_TOL
from .errors import DimensionError, IncidenceError, LiftError
from .linalg import FieldTag, Scalar, as_vector, vector_from_json, vector_to_json
from .projective import ProjPoint

LIFT_CUTOFF = 1e-13


@dataclass(frozen=True, eq=False)
class BlowupPoint:
    x: np.ndarray
    y: ProjPoint

    def __post_init__(self):
        x = as_vector(self.x, self.y.n, field=self.y.field)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.y.n

    @property
    def field(self) -> FieldTag:
        return self.y.field

    @property
    def on_sigma(self) -> bool:
        return not np.any(self.x)

    def to_json(self) -> dict[str, Any]:
        return {"x": vector_to_json(self.x), "y": self.y.to_json()}

    @classmethod
    def from_json(
        cls,
        data: dict[str, Any],
        field: Optional[FieldTag] = None,
    ) -> "BlowupPoint":
        y = ProjPoint.from_json(data["y"], field)
        return cls(vector_from_json(data["x"], y.field), y)


def sigma_point(y: ProjPoint) -> BlowupPoint:
    """The point of Sigma over the direction `y`."""
    return BlowupPoint(np.zeros(y.n, dtype=y.homog.dtype), y)


def fiber_point(y: ProjPoint, mu: Scalar) -> BlowupPoint:
    """The point at coordinate `mu` on the fiber line over `y`."""
    return BlowupPoint(mu * y.homog, y)


def incidence_residual(x: Any, y: ProjPoint) -> float:
    """Largest 2x2 minor |x_j y_k - x_k y_j| on the normalized representative."""
    x = np.asarray(x)
    if x.shape != (y.n,):
        raise DimensionError(  # noqa: TRY003
            f"base point of shape {x.shape} over P(F^{y.n})",
        )
    minors = np.outer(x, y.homog) - np.outer(y.homog, x)
    return float(np.max(np.abs(minors)))


def is_incident(p: BlowupPoint, tol: float = DEFAULT_TOL) -> bool:
    return incidence_residual(p.x, p.y) <= tol * (1 + np.linalg.norm(p.x))


def _check_incident(p: BlowupPoint, tol: float) -> None:
    if not is_incident(p, tol):
        raise IncidenceError(  # noqa: TRY003
            f"({p.x}, {p.y!r}) is not on X: "
            f"residual {incidence_residual(p.x, p.y):.3g}",
        )


def blowdown(p: BlowupPoint, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The blowdown q(x, [y]) = x."""
    _check_incident(p, tol)
    return np.array(p.x)


def lift_point(x: Any, tol: float = LIFT_CUTOFF) -> BlowupPoint:
    """The unique point (x, [x]) of X over a nonzero `x`."""
    x = as_vector(x)
    if np.linalg.norm(x) <= tol:
        raise LiftError(  # noqa: TRY003
            "points at the origin lift to all of Sigma; build them with sigma_point",
        )
    return BlowupPoint(x, ProjPoint(x))


def bundle_projection(p: BlowupPoint, tol: float = DEFAULT_TOL) -> ProjPoint:
    """Projection of X onto P(F^n), the tautological line bundle map."""
    _check_incident(p, tol)
    return p.y


def mu_of(p: BlowupPoint, tol: float = DEFAULT_TOL) -> Scalar:
    """The fiber coordinate mu with x = mu * homog(y)."""
    _check_incident(p, tol)
    mu = np.vdot(p.y.homog, p.x)
    return complex(mu) if p.field is FieldTag.COMPLEX else float(np.real(mu))


def sample_points(
    rng: np.random.Generator,
    n: int,
    count: int,
    field: FieldTag = FieldTag.REAL,
    sigma_fraction: float = 0.1,
    radii: tuple[float, float] = (1e-3, 1.0),
) -> list[BlowupPoint]:
    """Seeded points of X: lifts of random nonzero x, plus random Sigma points.

    Off-Sigma radii are log-uniform in `radii`.
    """

    def direction() -> np.ndarray:
        v = rng.standard_normal(n)
        if field is FieldTag.COMPLEX:
            v = v + 1j * rng.standard_normal(n)
        return v / np.linalg.norm(v)

    n_sigma = int(round(count * sigma_fraction))
    lo, hi = np.log10(radii[0]), np.log10(radii[1])
    points = [sigma_point(ProjPoint(direction(), field)) for _ in range(n_sigma)]
    for _ in range(count - n_sigma):
        r = 10 ** rng.uniform(lo, hi)
        points.append(lift_point(r * direction()))
    return points
