"""Points of P(F^n) and the maps between them."""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from . import DEFAULT_TOL
from .errors import (
    FieldMismatchError,
    OutsideChartError,
    SingularMatrixError,
    ZeroVectorError,
)
from .linalg import (
    FieldTag,
    Matrix,
    as_vector,
    is_invertible,
    vector_from_json,
    vector_to_json,
)

# Below this modulus a homogeneous coordinate does not define a chart.
CHART_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """A point [v] of P(F^n), stored by its normalized representative.

    The representative has unit norm and its coordinate of largest modulus is
    real and positive. Compare points with `proj_eq`, not `==`.
    """

    homog: np.ndarray
    field: Optional[FieldTag] = None

    def __post_init__(self):
        v = as_vector(self.homog, field=self.field)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ZeroVectorError(  # noqa: TRY003
                "the zero vector is not a point of P(F^n)",
            )
        v = v / norm
        lead = v[np.argmax(np.abs(v))]
        v = v * (np.conj(lead) / abs(lead))
        if np.iscomplexobj(v):
            # the phase fix leaves an exactly real leading coordinate up to roundoff
            v[np.argmax(np.abs(v))] = abs(lead)
        v.setflags(write=False)
        object.__setattr__(self, "homog", v)
        object.__setattr__(self, "field", FieldTag.of(v))

    @property
    def n(self) -> int:
        return self.homog.shape[0]

    def to_json(self) -> dict[str, Any]:
        return {"homog": vector_to_json(self.homog)}

    @classmethod
    def from_json(
        cls,
        data: dict[str, Any],
        field: Optional[FieldTag] = None,
    ) -> "ProjPoint":
        return cls(vector_from_json(data["homog"], field), field)

    def __repr__(self) -> str:
        return f"ProjPoint({np.array2string(self.homog, precision=6)})"


def normalize(v: Any, field: Optional[FieldTag] = None) -> ProjPoint:
    return ProjPoint(np.asarray(v), field)


def _check_compatible(a: ProjPoint, b: ProjPoint) -> None:
    if a.n != b.n or a.field is not b.field:
        raise FieldMismatchError(  # noqa: TRY003
            f"cannot compare points of P({a.field.value}^{a.n}) and "
            f"P({b.field.value}^{b.n})",
        )


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    # angle between the lines through unit vectors u and v; arctan2 keeps
    # precision for nearly equal lines where arccos does not
    inner = np.vdot(v, u)
    cos = abs(inner)
    sin = np.linalg.norm(u - inner * v)
    return float(np.arctan2(sin, cos))


def proj_dist(a: ProjPoint, b: ProjPoint) -> float:
    """Angle metric arccos|<a, b>| on P(F^n), with values in [0, pi/2]."""
    _check_compatible(a, b)
    return _angle(a.homog, b.homog)


def proj_eq(a: ProjPoint, b: ProjPoint, tol: float = DEFAULT_TOL) -> bool:
    return proj_dist(a, b) <= tol


def projectivize_linear(A: Matrix, p: ProjPoint, tol: float = DEFAULT_TOL) -> ProjPoint:
    """Image of `p` under P(A), for invertible `A`."""
    if A.n != p.n:
        raise FieldMismatchError(  # noqa: TRY003
            f"{A.n}x{A.n} matrix acting on P(F^{p.n})",
        )
    if A.field is FieldTag.COMPLEX and p.field is FieldTag.REAL:
        raise FieldMismatchError(  # noqa: TRY003
            "complex matrix acting on real projective space",
        )
    if not is_invertible(A, tol):
        raise SingularMatrixError(  # noqa: TRY003
            "projectivization needs an invertible matrix",
        )
    return ProjPoint(A.entries @ p.homog, p.field)


def chart_coords(p: ProjPoint, j: int, tol: float = CHART_TOL) -> np.ndarray:
    """Affine coordinates of `p` in chart `j` (0-based): v_k / v_j for k != j."""
    pivot = p.homog[j]
    if abs(pivot) <= tol:
        raise OutsideChartError(f"{p!r} lies outside chart {j}")  # noqa: TRY003
    return np.delete(p.homog, j) / pivot


def chart_embed(coords: Any, j: int, field: Optional[FieldTag] = None) -> ProjPoint:
    """Inverse of `chart_coords`: insert a 1 at position `j`."""
    coords = as_vector(coords, field=field)
    return ProjPoint(np.insert(coords, j, 1), field)


def dist_to_subspace(p: ProjPoint, basis: np.ndarray) -> float:
    """Angle between `p` and the projectivized column span of `basis`."""
    q, _ = np.linalg.qr(np.asarray(basis).reshape(p.n, -1))
    projection = q @ (q.conj().T @ p.homog)
    norm = np.linalg.norm(projection)
    if norm == 0:
        return float(np.pi / 2)
    return _angle(p.homog, projection / norm)
