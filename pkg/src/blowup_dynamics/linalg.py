"""Dense small-dimension linear algebra over R and C."""

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Union

import numpy as np
import scipy.linalg

from . import DEFAULT_TOL, logger
from .errors import DimensionError, FieldMismatchError, NonFiniteError

MIN_DIM = 2
MAX_DIM = 8

Scalar = Union[float, complex]


class FieldTag(str, Enum):
    REAL = "R"
    COMPLEX = "C"

    @property
    def dtype(self) -> type:
        return np.float64 if self is FieldTag.REAL else np.complex128

    @classmethod
    def of(cls, array: Any) -> "FieldTag":
        return cls.COMPLEX if np.iscomplexobj(array) else cls.REAL


def coerce(array: Any, field: Optional[FieldTag] = None) -> np.ndarray:
    """Cast `array` to the dtype of `field`, inferring the field if not given."""
    arr = np.asarray(array)
    if field is None:
        field = FieldTag.of(arr)
    if field is FieldTag.REAL and np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise FieldMismatchError(  # noqa: TRY003
                "complex entries given for a real field",
            )
        arr = arr.real
    return np.array(arr, dtype=FieldTag(field).dtype)


def as_vector(
    x: Any,
    n: Optional[int] = None,
    field: Optional[FieldTag] = None,
) -> np.ndarray:
    vec = coerce(x, field)
    if vec.ndim != 1:
        raise DimensionError(  # noqa: TRY003
            f"expected a vector, got shape {vec.shape}",
        )
    if n is not None and vec.shape[0] != n:
        raise DimensionError(  # noqa: TRY003
            f"expected a {n}-vector, got {vec.shape[0]} entries",
        )
    if not np.all(np.isfinite(vec)):
        raise NonFiniteError("vector has non-finite entries")  # noqa: TRY003
    return vec


def check_dimension(n: int) -> None:
    if not MIN_DIM <= n <= MAX_DIM:
        raise DimensionError(  # noqa: TRY003
            f"dimension {n} outside supported range [{MIN_DIM}, {MAX_DIM}]",
        )


@dataclass(frozen=True, eq=False)
class Matrix:
    """A square matrix of dimension 2 to 8 over R or C.

    The entries are copied and made read-only on construction. If `field` is
    omitted it is inferred from the dtype of `entries`.
    """

    entries: np.ndarray
    field: Optional[FieldTag] = None

    def __post_init__(self):
        entries = coerce(self.entries, self.field)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionError(  # noqa: TRY003
                f"matrix is not square: shape {entries.shape}",
            )
        check_dimension(entries.shape[0])
        if not np.all(np.isfinite(entries)):
            raise NonFiniteError("matrix has non-finite entries")  # noqa: TRY003
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "field", FieldTag.of(entries))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int, field: FieldTag = FieldTag.REAL) -> "Matrix":
        return cls(np.eye(n), field)

    @classmethod
    def diag(
        cls,
        values: Sequence[Scalar],
        field: Optional[FieldTag] = None,
    ) -> "Matrix":
        return cls(np.diag(np.asarray(values)), field)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            return Matrix(self.entries @ other.entries)
        return self.entries @ np.asarray(other)

    def __mul__(self, scalar: Scalar) -> "Matrix":
        return Matrix(scalar * self.entries)

    __rmul__ = __mul__

    def allclose(self, other: "Matrix", tol: float = DEFAULT_TOL) -> bool:
        return bool(np.allclose(self.entries, other.entries, rtol=0, atol=tol))

    @classmethod
    def from_json(cls, rows: Any, field: Optional[FieldTag] = None) -> "Matrix":
        return cls(np.array([vector_from_json(row) for row in rows]), field)

    def to_json(self) -> list:
        return [vector_to_json(row) for row in self.entries]


def scalar_to_json(z: Any) -> Union[float, list[float]]:
    if np.iscomplexobj(z):
        return [float(np.real(z)), float(np.imag(z))]
    return float(z)


def scalar_from_json(value: Any) -> Scalar:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    return float(value)


def vector_to_json(v: Any) -> list:
    return [scalar_to_json(z) for z in np.asarray(v)]


def vector_from_json(
    values: Sequence[Any],
    field: Optional[FieldTag] = None,
) -> np.ndarray:
    scalars = [scalar_from_json(value) for value in values]
    if field is None and any(isinstance(z, complex) for z in scalars):
        field = FieldTag.COMPLEX
    return coerce(np.array(scalars), field)


def rotation_matrix(theta: float) -> Matrix:
    c, s = np.cos(theta), np.sin(theta)
    return Matrix(np.array([[c, -s], [s, c]]))


def column_rank(vectors: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    """Numerical rank of the columns of `vectors`, relative to the largest."""
    vectors = np.atleast_2d(vectors)
    if vectors.size == 0:
        return 0
    s = scipy.linalg.svdvals(vectors)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def is_invertible(A: Matrix, tol: float = DEFAULT_TOL) -> bool:
    """Whether the smallest singular value of `A` exceeds `tol`."""
    return bool(scipy.linalg.svdvals(A.entries)[-1] > tol)


@dataclass(frozen=True, eq=False)
class EigenComponent:
    """An eigenvalue together with an orthonormal basis of its kernel.

    `basis` holds the vectors as columns, so it has shape (n, m) where m is
    the geometric multiplicity.
    """

    lam: Scalar
    basis: np.ndarray

    @property
    def geometric_multiplicity(self) -> int:
        return self.basis.shape[1]

    def residual(self, A: Matrix) -> float:
        """Largest |Av - lam v| over the (unit) basis vectors."""
        diff = A.entries @ self.basis - self.lam * self.basis
        return float(np.max(np.linalg.norm(diff, axis=0)))


def _cluster(values: np.ndarray, tol: float) -> list[complex]:
    clusters: list[list[complex]] = []
    for value in sorted((complex(v) for v in values), key=lambda z: (z.real, z.imag)):
        for members in clusters:
            center = complex(np.mean(members))
            if abs(value - center) <= tol * max(1.0, abs(value), abs(center)):
                members.append(value)
                break
        else:
            clusters.append([value])
    return [complex(np.mean(members)) for members in clusters]


def _is_real(lam: complex, tol: float) -> bool:
    return abs(lam.imag) < tol * max(1.0, abs(lam))


def _kernel(A: Matrix, lam: Scalar, tol: float) -> np.ndarray:
    shifted = lam * np.eye(A.n) - A.entries
    _, s, vh = scipy.linalg.svd(shifted)
    scale = 1 + abs(lam)
    m = int(np.sum(s <= tol * scale))
    if m == 0:
        # an eigenvalue was found, so the kernel is at least one-dimensional
        m = 1
        residual = s[-1] / scale
        if residual > np.sqrt(tol):
            logger.warning(
                f"eigenvalue {lam:.6g}: nearest kernel vector leaves a relative "
                f"residual {residual:.3g}",
            )
        else:
            logger.debug(f"kernel of eigenvalue {lam:.6g} below threshold")
    return vh[-m:].conj().T


def eigen_decompose(A: Matrix, tol: float = DEFAULT_TOL) -> list[EigenComponent]:
    """Cluster the eigenvalues of `A` and return their geometric eigenspaces.

    Over R only eigenvalues with negligible imaginary part contribute; the
    result may be empty. Over C every cluster contributes.

    Args:
    ----
        A: square matrix, 2 <= n <= 8.
        tol: relative clustering and rank threshold.

    Returns:
    -------
        Components sorted by eigenvalue (real part, then imaginary part).
    """
    values = scipy.linalg.eigvals(A.entries)
    components: list[EigenComponent] = []
    for center in _cluster(values, tol):
        if A.field is FieldTag.REAL:
            if not _is_real(center, tol):
                continue
            lam: Scalar = center.real
        else:
            lam = center
        components.append(EigenComponent(lam, _kernel(A, lam, tol)))
    return _merge_dependent(A, components, tol)


def _merge_dependent(
    A: Matrix,
    components: list[EigenComponent],
    tol: float,
) -> list[EigenComponent]:
    # A defective eigenvalue computed inexactly splits into nearby values
    # sharing one eigenvector; fold those back into one component.
    merged: list[EigenComponent] = []
    for comp in components:
        for i, other in enumerate(merged):
            stacked = np.hstack([other.basis, comp.basis])
            if column_rank(stacked, tol) < stacked.shape[1]:
                lam = (other.lam + comp.lam) / 2
                merged[i] = EigenComponent(lam, _kernel(A, lam, np.sqrt(tol)))
                break
        else:
            merged.append(comp)
    return merged


def rotational_classes(A: Matrix, tol: float = DEFAULT_TOL) -> list[complex]:
    """Non-real eigenvalues of a real matrix, one per conjugate pair."""
    if A.field is FieldTag.COMPLEX:
        return []
    values = _cluster(scipy.linalg.eigvals(A.entries), tol)
    return [v for v in values if not _is_real(v, tol) and v.imag > 0]
