"""Dynamics of a lifted map on and near the exceptional locus.

On Sigma the lift acts as the projectivized derivative P(Dh|_0), so its fixed
points there are the disjoint union of the projectivized eigenspaces
P(E_lam), E_lam = ker(lam I - Dh|_0). Off Sigma the lift is conjugate to h.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

import numpy as np
import scipy.optimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import DEFAULT_SEED, DEFAULT_TOL, logger
from .blowup_model import (
    BlowupPoint,
    blowdown,
    bundle_projection,
    is_incident,
    lift_point,
    sigma_point,
)
from .errors import DimensionError, InvarianceError, OrbitError, SingularMatrixError
from .linalg import (
    FieldTag,
    Matrix,
    Scalar,
    eigen_decompose,
    is_invertible,
    rotational_classes,
    scalar_to_json,
    vector_to_json,
)
from .map_lift import MapSpec, derivative_at_origin, lift_map
from .projective import (
    ProjPoint,
    chart_coords,
    chart_embed,
    dist_to_subspace,
    proj_dist,
    projectivize_linear,
)

SCAN_DIMENSIONS = (2, 3)
MIN_RESOLUTION = 1000
CLUSTER_FACTOR = 10.0


@dataclass(frozen=True, eq=False)
class SigmaMap:
    """The restriction P(d0) of a lifted map to Sigma."""

    d0: Matrix

    def __post_init__(self):
        if not is_invertible(self.d0):
            raise SingularMatrixError(  # noqa: TRY003
                "Sigma map needs an invertible derivative",
            )

    @property
    def n(self) -> int:
        return self.d0.n

    @property
    def field(self) -> FieldTag:
        return self.d0.field

    def __call__(self, p: ProjPoint) -> ProjPoint:
        return projectivize_linear(self.d0, p)

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        """Images of unit row vectors, as unit rows (representatives not normalized)."""
        images = points @ self.d0.entries.T
        return images / np.linalg.norm(images, axis=1, keepdims=True)

    def multiplier(self, points: np.ndarray) -> np.ndarray:
        """<p, d0 p> per unit row; the eigenvalue at fixed points."""
        return np.einsum("ij,ij->i", points.conj(), points @ self.d0.entries.T)


def sigma_map(d0: Matrix) -> SigmaMap:
    return SigmaMap(d0)


@dataclass(frozen=True, eq=False)
class FixedComponent:
    lam: Scalar
    basis: np.ndarray
    field: FieldTag

    @property
    def dim(self) -> int:
        return self.basis.shape[1] - 1

    @property
    def description(self) -> str:
        return f"P(E_{self.lam:.6g}) = {self.field.value}P^{self.dim}"

    def contains(self, p: ProjPoint, tol: float = DEFAULT_TOL) -> bool:
        return dist_to_subspace(p, self.basis) <= tol

    def sample(self, rng: np.random.Generator, count: int) -> list[ProjPoint]:
        m = self.basis.shape[1]
        points = []
        for _ in range(count):
            coeffs = rng.standard_normal(m)
            if self.field is FieldTag.COMPLEX:
                coeffs = coeffs + 1j * rng.standard_normal(m)
            points.append(ProjPoint(self.basis @ coeffs, self.field))
        return points

    def to_json(self) -> dict[str, Any]:
        return {
            "lambda": scalar_to_json(self.lam),
            "proj_dim": self.dim,
            "basis": [vector_to_json(col) for col in self.basis.T],
            "description": self.description,
        }


@dataclass
class FixedSetOnSigma:
    field: FieldTag
    components: list[FixedComponent]
    rotational_classes: list[complex] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.components

    @property
    def dims(self) -> list[int]:
        return sorted(comp.dim for comp in self.components)

    def component_of(
        self,
        p: ProjPoint,
        tol: float = DEFAULT_TOL,
    ) -> Optional[FixedComponent]:
        for comp in self.components:
            if comp.contains(p, tol):
                return comp
        return None

    def to_json(self) -> dict[str, Any]:
        return {
            "field": self.field.value,
            "components": [comp.to_json() for comp in self.components],
            "rotational_classes": [scalar_to_json(z) for z in self.rotational_classes],
        }


def fixed_set_on_sigma(d0: Matrix, tol: float = DEFAULT_TOL) -> FixedSetOnSigma:
    """Fix(h^) on Sigma from the geometric eigenspaces of d0.

    Over R, complex-conjugate eigenvalue pairs have no real eigenvector; they
    are listed as rotational classes and contribute no component.
    """
    if not is_invertible(d0, tol):
        raise SingularMatrixError(  # noqa: TRY003
            "fixed set needs an invertible derivative",
        )
    components = [
        FixedComponent(comp.lam, comp.basis, d0.field)
        for comp in eigen_decompose(d0, tol)
    ]
    fixed = FixedSetOnSigma(d0.field, components, rotational_classes(d0, tol))
    logger.debug(
        f"fixed_set_on_sigma: {len(components)} components, dims {fixed.dims}, "
        f"{len(fixed.rotational_classes)} rotational classes",
    )
    return fixed


@dataclass
class ScanCluster:
    representative: ProjPoint
    members: np.ndarray = field(repr=False)
    residual: float

    @property
    def size(self) -> int:
        return self.members.shape[0]


def _angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    inner = np.einsum("ij,ij->i", v.conj(), u)
    sin = np.linalg.norm(u - inner[:, None] * v, axis=1)
    return np.arctan2(sin, np.abs(inner))


def _scan_grid(n: int, resolution: int) -> tuple[np.ndarray, float]:
    if n == 2:
        theta = np.pi * np.arange(resolution) / resolution
        return np.column_stack([np.cos(theta), np.sin(theta)]), np.pi / resolution
    # Fibonacci points on the upper hemisphere, a model of RP^2
    i = np.arange(resolution)
    z = (i + 0.5) / resolution
    phi = i * np.pi * (3 - np.sqrt(5))
    rho = np.sqrt(1 - z**2)
    grid = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    return grid, float(np.sqrt(2 * np.pi / resolution))


def _local_minima(grid: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    count = grid.shape[0]
    if grid.shape[1] == 2:
        # the last grid angle wraps around to the first through -p = p
        left, right = np.roll(residuals, 1), np.roll(residuals, -1)
        return np.flatnonzero((residuals <= left) & (residuals <= right))
    tree = cKDTree(np.vstack([grid, -grid]))
    _, idx = tree.query(grid, k=9)
    neighbours = residuals[idx[:, 1:] % count]
    return np.flatnonzero(residuals <= neighbours.min(axis=1))


def _signed_cross(points: np.ndarray, images: np.ndarray) -> np.ndarray:
    """p x P(A)p per unit row of RP^1; zero exactly at fixed points."""
    images = images / np.linalg.norm(images, axis=1, keepdims=True)
    return points[:, 0] * images[:, 1] - points[:, 1] * images[:, 0]


def _circle_roots(
    apply_many: Callable[[np.ndarray], np.ndarray],
    grid: np.ndarray,
    images: np.ndarray,
    settled: np.ndarray,
) -> list[np.ndarray]:
    """Bracket and solve the sign changes of the signed displacement on RP^1.

    Cells touching an already `settled` grid point are skipped.
    """

    def unit(t: float) -> np.ndarray:
        return np.array([[np.cos(t), np.sin(t)]])

    def cross_at(t: float) -> float:
        p = unit(t)
        return float(_signed_cross(p, apply_many(p))[0])

    # theta = pi closes the loop back to the first grid point
    thetas = np.append(np.pi * np.arange(grid.shape[0]) / grid.shape[0], np.pi)
    values = np.append(_signed_cross(grid, images), cross_at(np.pi))
    roots = []
    settled = np.append(settled, settled[0])
    brackets = (values[:-1] * values[1:] < 0) & ~settled[:-1] & ~settled[1:]
    for i in np.flatnonzero(brackets):
        t = scipy.optimize.brentq(cross_at, thetas[i], thetas[i + 1], xtol=1e-15)
        roots.append(unit(t)[0])
    return roots


def _polish(
    residual: Callable[[np.ndarray], float],
    apply_many: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    spacing: float,
) -> np.ndarray:
    if start.shape[0] == 2:
        # only tangential fixed points get here without a bracketing sign change
        theta0 = np.arctan2(start[1], start[0])
        result = scipy.optimize.minimize_scalar(
            lambda t: residual(np.array([np.cos(t), np.sin(t)])),
            bounds=(theta0 - 2 * spacing, theta0 + 2 * spacing),
            method="bounded",
            options={"xatol": 1e-14},
        )
        return np.array([np.cos(result.x), np.sin(result.x)])
    p = ProjPoint(start)
    j = int(np.argmax(np.abs(p.homog)))

    def embed(c):
        return chart_embed(c, j).homog

    def displacement(c):
        image = apply_many(embed(c)[None, :])[0]
        if abs(image[j]) <= 1e-12:
            return np.full(2, 1e6)
        return np.delete(image, j) / image[j] - c

    # Levenberg-Marquardt also settles on lines of fixed points, where the
    # Jacobian of the displacement is singular
    result = scipy.optimize.least_squares(
        displacement,
        chart_coords(p, j),
        method="lm",
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
    )
    return embed(result.x)


def brute_force_fixed_scan(
    evaluator: Union[SigmaMap, Callable[[ProjPoint], ProjPoint]],
    resolution: int = 10_000,
    tol: float = 1e-8,
    n: Optional[int] = None,
    max_candidates: int = 128,
) -> list[ScanCluster]:
    """Fixed points of a map of RP^1 or RP^2 found by sampling, independent of
    any eigen-decomposition.

    Grid points already within `tol` of their image are kept. On RP^1 every
    sign change of the signed displacement p x P(A)p between neighbouring grid
    points is solved by bracketing. Grid-local minima of the displacement are
    polished (by a chart least-squares solve on RP^2) and kept when the
    polished displacement is within `tol`. Hits are clustered by single
    linkage with radius ten grid spacings; when the evaluator exposes a
    multiplier, hits with different multipliers are never linked.
    """
    n = n if n is not None else evaluator.n  # type: ignore[union-attr]
    if getattr(evaluator, "field", FieldTag.REAL) is FieldTag.COMPLEX:
        raise DimensionError(  # noqa: TRY003
            "brute-force scan covers RP^1 and RP^2 only",
        )
    if n not in SCAN_DIMENSIONS:
        raise DimensionError(  # noqa: TRY003
            f"brute-force scan supports n in {SCAN_DIMENSIONS}, got {n}",
        )
    resolution = max(resolution, MIN_RESOLUTION)
    grid, spacing = _scan_grid(n, resolution)

    apply_many = getattr(evaluator, "apply_many", None)
    if apply_many is None:

        def apply_many(points):
            return np.array([evaluator(ProjPoint(p)).homog for p in points])

    def residual(p: np.ndarray) -> float:
        p = p / np.linalg.norm(p)
        return float(_angles(p[None, :], apply_many(p[None, :]))[0])

    images = apply_many(grid)
    residuals = _angles(grid, images)
    fixed_idx = np.flatnonzero(residuals <= tol)
    candidates = np.setdiff1d(_local_minima(grid, residuals), fixed_idx)
    candidates = candidates[np.argsort(residuals[candidates])][:max_candidates]

    hits = [grid[i] for i in fixed_idx]
    hit_residuals = [float(residuals[i]) for i in fixed_idx]
    found: list[np.ndarray] = []
    if n == 2:
        found = _circle_roots(apply_many, grid, images, residuals <= tol)
    found += [_polish(residual, apply_many, grid[i], spacing) for i in candidates]
    for point in found:
        r = residual(point)
        if r <= tol:
            hits.append(point / np.linalg.norm(point))
            hit_residuals.append(r)
    logger.debug(
        f"brute_force_fixed_scan `{n=}` `{resolution=}`: {len(fixed_idx)} grid "
        f"hits, {len(hits) - len(fixed_idx)} solved hits from "
        f"{len(found)} roots and candidates",
    )
    if not hits:
        return []
    return _cluster_hits(
        np.array(hits),
        np.array(hit_residuals),
        CLUSTER_FACTOR * spacing,
        getattr(evaluator, "multiplier", None),
        tol,
    )


def _cluster_hits(
    hits: np.ndarray,
    residuals: np.ndarray,
    radius: float,
    multiplier: Optional[Callable[[np.ndarray], np.ndarray]],
    tol: float,
) -> list[ScanCluster]:
    count = hits.shape[0]
    chord = 2 * np.sin(min(radius, np.pi / 2) / 2)
    tree = cKDTree(np.vstack([hits, -hits]))
    pairs = tree.query_pairs(chord, output_type="ndarray") % count
    if multiplier is not None and pairs.size:
        mult = multiplier(hits)
        scale = np.maximum(1.0, np.abs(mult))
        gap = np.abs(mult[pairs[:, 0]] - mult[pairs[:, 1]])
        pairs = pairs[gap <= np.sqrt(tol) * scale[pairs[:, 0]]]
    graph = coo_matrix(
        (np.ones(pairs.shape[0]), (pairs[:, 0], pairs[:, 1])),
        shape=(count, count),
    )
    n_clusters, labels = connected_components(graph, directed=False)
    clusters = []
    for label in range(n_clusters):
        members = hits[labels == label]
        member_residuals = residuals[labels == label]
        best = int(np.argmin(member_residuals))
        clusters.append(
            ScanCluster(
                ProjPoint(members[best]),
                members,
                float(member_residuals[best]),
            ),
        )
    return clusters


OrbitPoint = Union[BlowupPoint, ProjPoint]


@dataclass
class Orbit:
    points: tuple[OrbitPoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def fibers(self) -> list[ProjPoint]:
        return [p.y if isinstance(p, BlowupPoint) else p for p in self.points]

    @property
    def final(self) -> OrbitPoint:
        return self.points[-1]

    def columns(self) -> list[str]:
        n = self.fibers[0].n
        complex_field = self.fibers[0].field is FieldTag.COMPLEX
        parts = ("re", "im") if complex_field else ("",)

        def names(prefix: str) -> list[str]:
            return [
                f"{prefix}{i}_{part}" if part else f"{prefix}{i}"
                for i in range(n)
                for part in parts
            ]

        base = names("x") if isinstance(self.points[0], BlowupPoint) else []
        return ["step", *base, *names("y")]

    def to_rows(self) -> np.ndarray:
        """One row per step: step, base coordinates if any, fiber coordinates."""

        def flat(v: np.ndarray) -> list[float]:
            if np.iscomplexobj(v):
                return [c for z in v for c in (z.real, z.imag)]
            return list(v)

        rows = []
        for step, p in enumerate(self.points):
            row = [float(step)]
            if isinstance(p, BlowupPoint):
                row += flat(p.x) + flat(p.y.homog)
            else:
                row += flat(p.homog)
            rows.append(row)
        return np.array(rows)


def iterate_orbit(
    evaluator: Callable[[Any], Any],
    start: OrbitPoint,
    N: int,  # noqa: N803
    tol: float = DEFAULT_TOL,
) -> Orbit:
    """Apply `evaluator` N times to `start`.

    Raises:
    ------
        OrbitError: an evaluation failed or left X; `index` is the step.
    """
    if N < 1:
        raise OrbitError(f"orbit length must be >= 1, got {N}")  # noqa: TRY003
    points: list[OrbitPoint] = [start]
    for index in range(1, N + 1):
        try:
            image = evaluator(points[-1])
        except Exception as e:  # noqa: BLE001
            raise OrbitError(f"evaluation failed at step {index}: {e}", index) from e
        if isinstance(image, BlowupPoint) and not is_incident(image, tol):
            raise OrbitError(f"orbit left X at step {index}", index)  # noqa: TRY003
        points.append(image)
    return Orbit(tuple(points))


def convergence_rates(points: Sequence[OrbitPoint], target: ProjPoint) -> np.ndarray:
    """Ratios d_{k+1} / d_k of fiber distances to `target`, while d_k > 0."""
    fibers = [p.y if isinstance(p, BlowupPoint) else p for p in points]
    dists = np.array([proj_dist(p, target) for p in fibers])
    usable = dists[:-1] > 1e-14
    return dists[1:][usable] / dists[:-1][usable]


def off_sigma_residual(spec: MapSpec, x0: Any, steps: int) -> float:
    """Largest |q(h^^k(x0)) - h^k(x0)| along an orbit started off Sigma."""
    orbit = iterate_orbit(lift_map(spec), lift_point(x0), steps)
    x = np.asarray(x0)
    worst = 0.0
    for p in orbit.points[1:]:
        x = spec(x)
        worst = max(worst, float(np.linalg.norm(blowdown(p) - x)))
    return worst


@dataclass
class TraceReport:
    basis: np.ndarray
    invariance_residual: float
    max_closure_deviation: float
    max_image_deviation: float
    scales: tuple[float, ...]

    @property
    def max_deviation(self) -> float:
        return max(self.max_closure_deviation, self.max_image_deviation)

    @property
    def meets_sigma(self) -> Optional[ProjPoint]:
        """The point where a one-dimensional trace meets Sigma."""
        if self.basis.shape[1] != 1:
            return None
        return ProjPoint(self.basis[:, 0])

    def to_dict(self) -> dict[str, Any]:
        meets = self.meets_sigma
        return {
            "basis": [vector_to_json(col) for col in self.basis.T],
            "invariance_residual": self.invariance_residual,
            "max_closure_deviation": self.max_closure_deviation,
            "max_image_deviation": self.max_image_deviation,
            "max_deviation": self.max_deviation,
            "meets_sigma": meets.to_json() if meets is not None else None,
        }


def invariant_subspace_trace(  # noqa: PLR0913
    spec: MapSpec,
    E: Sequence[Any],  # noqa: N803
    scales: Sequence[float] = (1e-1, 1e-2, 1e-4, 1e-6, 1e-8),
    samples_per_scale: int = 8,
    tol: float = DEFAULT_TOL,
    rng_seed: int = DEFAULT_SEED,
) -> TraceReport:
    """Trace the blowup of a d0-invariant subspace E down to Sigma.

    Points of E at each scale lift into X; their fibers (and the fibers of
    their images under h^) must stay on P(E), which is where the closure of
    the lifted subspace meets Sigma.

    Args:
    ----
        spec: the map h.
        E: basis vectors of the subspace.
        scales: decreasing norms of the sampled points.
        samples_per_scale: random points of E per scale.
        tol: invariance tolerance, relative to |d0|.
        rng_seed: seed for the sampled points.

    Raises:
    ------
        InvarianceError: E is not invariant under d0.
    """
    d0 = derivative_at_origin(spec)
    vectors = np.atleast_2d(np.asarray(E, dtype=d0.entries.dtype))
    q, _ = np.linalg.qr(vectors.T)
    moved = d0.entries @ q
    invariance = float(np.linalg.norm(moved - q @ (q.conj().T @ moved)))
    if invariance > tol * max(1.0, float(np.linalg.norm(d0.entries, 2))):
        raise InvarianceError(  # noqa: TRY003
            f"subspace is not invariant: residual {invariance:.3g}",
        )

    rng = np.random.default_rng(rng_seed)
    lift = lift_map(spec)
    closure = image = 0.0
    for scale in scales:
        for _ in range(samples_per_scale):
            u = q @ rng.standard_normal(q.shape[1])
            p = lift_point(scale * u / np.linalg.norm(u))
            closure = max(closure, dist_to_subspace(bundle_projection(p), q))
            image = max(image, dist_to_subspace(lift(p).y, q))
    for _ in range(samples_per_scale):
        y = ProjPoint(q @ rng.standard_normal(q.shape[1]))
        image = max(image, dist_to_subspace(lift(sigma_point(y)).y, q))
    return TraceReport(q, invariance, closure, image, tuple(scales))
