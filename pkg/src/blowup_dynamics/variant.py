"""Blowups induced by topological conjugacies.

If phi conjugates h1 to h0 (phi o h1 = h0 o phi), the classical blowup of h1
composed with phi is a topological blowup of h0 with blowdown phi o q. Its
dynamics on Sigma come from Dh1|_0, not Dh0|_0, and can differ sharply from
the classical blowup of h0.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
import scipy.linalg

from . import DEFAULT_SEED, logger
from .blowup_model import blowdown, bundle_projection, lift_point, sample_points
from .errors import (
    AllocationError,
    ConjugacyError,
    DimensionError,
    LevelOrderError,
    ScheduleError,
)
from .linalg import FieldTag, Matrix, check_dimension, rotation_matrix
from .map_lift import LiftedMapEvaluator, MapSpec, derivative_at_origin, lift_map
from .projective import ProjPoint, proj_dist, proj_eq
from .sigma_dynamics import FixedSetOnSigma, fixed_set_on_sigma

Evaluator = Callable[[np.ndarray], np.ndarray]

CONJUGACY_RADII = (1e-6, 1e3)
CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class Conjugacy:
    """A homeomorphism phi of F^n fixing the origin, with its inverse."""

    forward: Evaluator
    inverse: Evaluator
    name: str = "conjugacy"

    @property
    def fixed_origin(self) -> bool:
        return True

    def __call__(self, x: Any) -> np.ndarray:
        return self.forward(np.asarray(x))


def identity_conjugacy(n: int) -> Conjugacy:
    check_dimension(n)

    def identity(x):
        return np.array(x)

    return Conjugacy(identity, identity, "identity")


def spiral_conjugacy(lam: float, theta: float) -> Conjugacy:
    """phi(r e^{i a}) = r e^{i (a + theta ln r / ln lam)}, phi(0) = 0.

    phi conjugates lam * I to lam * rotation(theta); it unwinds the spiral
    continuously but is not differentiable at the origin.
    """
    if not lam > 1:
        raise ConjugacyError(  # noqa: TRY003
            f"spiral conjugacy needs lambda > 1, got {lam}",
        )
    log_lam = np.log(lam)

    def twist(x: np.ndarray, sign: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        if r == 0:
            return np.zeros(2)
        return rotation_matrix(sign * theta * np.log(r) / log_lam).entries @ x

    return Conjugacy(
        lambda x: twist(x, 1),
        lambda x: twist(x, -1),
        f"spiral(lambda={lam:g}, theta={theta:g})",
    )


def _log_uniform_points(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    lo, hi = np.log10(CONJUGACY_RADII[0]), np.log10(CONJUGACY_RADII[1])
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * 10 ** rng.uniform(lo, hi, size=(count, 1))


def conjugacy_residual(
    h0: MapSpec,
    h1: MapSpec,
    phi: Conjugacy,
    samples: int = 10_000,
    rng_seed: int = DEFAULT_SEED,
) -> float:
    """max |phi(h1(x)) - h0(phi(x))| / (1 + |x|) over log-uniform samples."""
    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    for x in _log_uniform_points(rng, h0.n, samples):
        residual = np.linalg.norm(phi(h1(x)) - h0(phi(x))) / (1 + np.linalg.norm(x))
        worst = max(worst, float(residual))
    return worst


@dataclass(frozen=True, eq=False)
class VariantBlowup:
    h0: MapSpec
    h1: MapSpec
    phi: Conjugacy
    lift: LiftedMapEvaluator

    def blowdown(self, v) -> np.ndarray:
        """The variant blowdown phi o q."""
        return self.phi(blowdown(v))

    def classical_fixed_set(self) -> FixedSetOnSigma:
        return fixed_set_on_sigma(derivative_at_origin(self.h0))

    def variant_fixed_set(self) -> FixedSetOnSigma:
        return fixed_set_on_sigma(self.lift.d0)


@dataclass
class VariantReport:
    samples: int
    seed: int
    tol: float
    conjugacy_residual: float
    diagram_residual: float
    classical: FixedSetOnSigma
    variant: FixedSetOnSigma

    @property
    def passed(self) -> bool:
        return bool(self.diagram_residual <= self.tol)

    def to_dict(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "conjugacy_residual": self.conjugacy_residual,
            "diagram_residual": self.diagram_residual,
            "classical": self.classical.to_json(),
            "variant": self.variant.to_json(),
            "passed": self.passed,
        }


def variant_blowup(  # noqa: PLR0913
    h0: MapSpec,
    h1: MapSpec,
    phi: Conjugacy,
    samples: int = 10_000,
    tol: float = 1e-9,
    rng_seed: int = DEFAULT_SEED,
) -> tuple[VariantBlowup, VariantReport]:
    """Build the blowup of h0 induced by the conjugacy phi from h1.

    Args:
    ----
        h0: the map being blown up.
        h1: a map conjugate to h0 whose classical blowup is used.
        phi: conjugacy with phi o h1 = h0 o phi.
        samples: sample count for the conjugacy and diagram checks.
        tol: tolerance, relative to 1 + |x|.
        rng_seed: seed for the samples.

    Returns:
    -------
        The variant blowup and a report of the commuting-diagram residual and
        the two fixed sets on Sigma.

    Raises:
    ------
        ConjugacyError: phi does not conjugate h1 to h0 within `tol`.
    """
    if h0.n != h1.n or h0.field is not h1.field:
        raise DimensionError("h0 and h1 act on different spaces")  # noqa: TRY003
    conj = conjugacy_residual(h0, h1, phi, samples, rng_seed)
    if conj > tol:
        raise ConjugacyError(  # noqa: TRY003
            f"{phi.name} does not conjugate the maps: residual {conj:.3g}",
        )
    variant = VariantBlowup(h0, h1, phi, lift_map(h1))
    rng = np.random.default_rng(rng_seed)
    diagram = 0.0
    for v in sample_points(rng, h0.n, samples, h0.field, radii=CONJUGACY_RADII):
        down = variant.blowdown(v)
        path_a = variant.blowdown(variant.lift(v))
        path_b = h0(down)
        diagram = max(
            diagram,
            float(np.linalg.norm(path_a - path_b) / (1 + np.linalg.norm(down))),
        )
    report = VariantReport(
        samples,
        rng_seed,
        tol,
        conj,
        diagram,
        variant.classical_fixed_set(),
        variant.variant_fixed_set(),
    )
    logger.debug(
        f"variant_blowup {phi.name}: conjugacy {conj:.3g}, diagram {diagram:.3g}, "
        f"classical dims {report.classical.dims}, variant dims {report.variant.dims}",
    )
    if not report.passed:
        logger.warning(f"variant diagram residual {diagram:.3g} exceeds {tol:g}")
    return variant, report


@dataclass(frozen=True)
class AllocationSpec:
    """Real eigenvalue multiplicities for a hyperbolic derivative on R^n.

    The stable and unstable dimensions not taken by real eigenvalues are
    filled with complex-conjugate pairs, so each leftover must be even.
    """

    n: int
    dim_stable: int
    dim_unstable: int
    unstable_real: tuple[int, ...] = ()
    stable_real: tuple[int, ...] = ()

    def __post_init__(self):
        check_dimension(self.n)
        object.__setattr__(self, "unstable_real", tuple(self.unstable_real))
        object.__setattr__(self, "stable_real", tuple(self.stable_real))
        if self.dim_stable < 0 or self.dim_unstable < 0:
            raise AllocationError(  # noqa: TRY003
                "subspace dimensions must be non-negative",
            )
        if self.dim_stable + self.dim_unstable != self.n:
            raise AllocationError(  # noqa: TRY003
                f"dim E_s + dim E_u = {self.dim_stable + self.dim_unstable}, "
                f"expected n = {self.n}",
            )
        for name, parts, dim in (
            ("unstable", self.unstable_real, self.dim_unstable),
            ("stable", self.stable_real, self.dim_stable),
        ):
            if any(k < 1 for k in parts):
                raise AllocationError(  # noqa: TRY003
                    f"{name} multiplicities must be >= 1: {parts}",
                )
            if sum(parts) > dim:
                raise AllocationError(  # noqa: TRY003
                    f"{name} real multiplicities sum to {sum(parts)} > {dim}",
                )
            if (dim - sum(parts)) % 2:
                raise AllocationError(  # noqa: TRY003
                    f"{name} leftover {dim - sum(parts)} "
                    "cannot be filled by complex pairs",
                )

    @property
    def e_u(self) -> int:
        return sum(self.unstable_real)

    @property
    def e_s(self) -> int:
        return sum(self.stable_real)

    @property
    def complex_pairs(self) -> tuple[int, int]:
        """Number of (unstable, stable) complex-conjugate pairs."""
        return (self.dim_unstable - self.e_u) // 2, (self.dim_stable - self.e_s) // 2

    @property
    def realizable_by_conjugacy(self) -> bool:
        """Both E_s and E_u even-dimensional, so any allocation is conjugate."""
        return self.dim_stable % 2 == 0 and self.dim_unstable % 2 == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "dim_stable": self.dim_stable,
            "dim_unstable": self.dim_unstable,
            "unstable_real": list(self.unstable_real),
            "stable_real": list(self.stable_real),
        }


@dataclass(frozen=True)
class PredictedComponent:
    multiplicity: int
    stability: str

    @property
    def dim(self) -> int:
        return self.multiplicity - 1


def predict_fixed_set(alloc: AllocationSpec) -> list[PredictedComponent]:
    """One component RP^{m-1} per real eigenvalue of multiplicity m."""
    if not alloc.realizable_by_conjugacy:
        logger.warning(
            f"allocation {alloc.to_dict()} has an odd-dimensional stable or unstable "
            "subspace; it may not be reachable by a conjugacy",
        )
    return [PredictedComponent(k, "unstable") for k in alloc.unstable_real] + [
        PredictedComponent(k, "stable") for k in alloc.stable_real
    ]


def _rotation_block(r: float, angle: float) -> np.ndarray:
    return r * rotation_matrix(angle).entries


def synthesize_realization(
    alloc: AllocationSpec,
    rng: Optional[np.random.Generator] = None,
) -> Matrix:
    """A hyperbolic matrix with the allocated real eigenvalue multiplicities.

    Real eigenvalues are distinct scalar blocks lam * I_m, complex pairs are
    scaled rotations, and the block-diagonal matrix is conjugated by a random
    orthogonal matrix when `rng` is given.
    """
    blocks = []
    for i, k in enumerate(alloc.unstable_real):
        blocks.append((-1) ** i * (1.5 + 0.5 * (i // 2)) * np.eye(k))
    for i, k in enumerate(alloc.stable_real):
        blocks.append((-1) ** i * (0.15 + 0.1 * (i // 2)) * np.eye(k))
    pairs_u, pairs_s = alloc.complex_pairs
    blocks += [_rotation_block(2.0 + 0.25 * i, 0.7 + 0.3 * i) for i in range(pairs_u)]
    blocks += [_rotation_block(0.5 - 0.05 * i, 1.1 + 0.3 * i) for i in range(pairs_s)]
    d = scipy.linalg.block_diag(*blocks)
    if rng is not None:
        q, _ = np.linalg.qr(rng.standard_normal((alloc.n, alloc.n)))
        d = q @ d @ q.T
    return Matrix(d)


def random_allocation(rng: np.random.Generator, n: int) -> AllocationSpec:
    """A random valid allocation on R^n."""
    dim_unstable = int(rng.integers(0, n + 1))

    def partition(dim: int) -> tuple[int, ...]:
        total = int(rng.choice([e for e in range(dim + 1) if (dim - e) % 2 == 0]))
        parts = []
        while total:
            k = int(rng.integers(1, total + 1))
            parts.append(k)
            total -= k
        return tuple(parts)

    return AllocationSpec(
        n,
        n - dim_unstable,
        dim_unstable,
        partition(dim_unstable),
        partition(n - dim_unstable),
    )


def allocation_dims(
    alloc: AllocationSpec,
    rng: Optional[np.random.Generator] = None,
) -> tuple[list[int], list[int]]:
    """Predicted and realized component dimensions, both sorted."""
    predicted = sorted(comp.dim for comp in predict_fixed_set(alloc))
    realized = fixed_set_on_sigma(synthesize_realization(alloc, rng)).dims
    return predicted, realized


def _wrap(angle):
    return np.angle(np.exp(1j * np.asarray(angle)))


@dataclass(frozen=True, eq=False)
class TubeHomeo:
    """A homeomorphism g of S^1 x (0, inf), identity for t <= epsilon.

    g(a, t) = (a + offset(t), psi(t)) where psi is the piecewise-linear map
    matching the source levels to the target levels (slope 1 past the last
    knot) and offset interpolates the shortest-arc angle corrections
    linearly between consecutive source levels.
    """

    levels_in: np.ndarray
    levels_out: np.ndarray
    offsets: np.ndarray
    epsilon: float

    def _psi(self, t, xs, ys):
        t = np.asarray(t, dtype=float)
        inside = np.interp(t, xs, ys)
        below = np.where(t < xs[0], t, inside)
        return np.where(t > xs[-1], ys[-1] + (t - xs[-1]), below)

    def _offset(self, t):
        return np.interp(np.asarray(t, dtype=float), self.levels_in, self.offsets)

    def __call__(self, angle, t):
        t_out = self._psi(t, self.levels_in, self.levels_out)
        return _wrap(np.asarray(angle) + self._offset(t)), t_out

    def inverse(self, angle, t):
        t_in = self._psi(t, self.levels_out, self.levels_in)
        return _wrap(np.asarray(angle) - self._offset(t_in)), t_in

    def planar(self, x: Any) -> np.ndarray:
        """g on the punctured plane under t = -ln r, extended by 0 -> 0."""
        return self._planar(x, self.__call__)

    def planar_inverse(self, x: Any) -> np.ndarray:
        return self._planar(x, self.inverse)

    @staticmethod
    def _planar(x, g) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        if r == 0:
            return np.zeros(2)
        angle, t = g(np.arctan2(x[1], x[0]), -np.log(r))
        return np.exp(-t) * np.array([np.cos(angle), np.sin(angle)])


def tube_homeo(
    pairs: Sequence[tuple[tuple[float, float], tuple[float, float]]],
    epsilon: float,
) -> TubeHomeo:
    """A homeomorphism of S^1 x (0, inf) sending each source (a_i, s_i) to
    its target (b_i, u_i) and fixing every level t <= epsilon.

    Raises:
    ------
        LevelOrderError: levels are not strictly increasing, or epsilon is
            not below the first source and target level.
    """
    if not pairs:
        raise LevelOrderError(  # noqa: TRY003
            "tube homeomorphism needs at least one pair",
        )
    sources = np.array([src for src, _ in pairs], dtype=float)
    targets = np.array([dst for _, dst in pairs], dtype=float)
    for name, levels in (("source", sources[:, 1]), ("target", targets[:, 1])):
        if np.any(np.diff(levels) <= 0):
            raise LevelOrderError(  # noqa: TRY003
                f"{name} levels must be strictly increasing",
            )
    if not 0 < epsilon < min(sources[0, 1], targets[0, 1]):
        raise LevelOrderError(  # noqa: TRY003
            f"epsilon {epsilon} must lie in (0, first level)",
        )
    offsets = [0.0]
    for (a, _), (b, _) in zip(sources, targets):
        offsets.append(offsets[-1] + float(_wrap(b - a - offsets[-1])))
    return TubeHomeo(
        np.concatenate([[epsilon], sources[:, 1]]),
        np.concatenate([[epsilon], targets[:, 1]]),
        np.array(offsets),
        epsilon,
    )


@dataclass(frozen=True)
class SequenceSchedule:
    radii: tuple[float, ...]

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        if radii.ndim != 1 or radii.size < 2:
            raise ScheduleError("schedule needs at least two radii")  # noqa: TRY003
        if np.any(radii <= 0) or np.any(np.diff(radii) >= 0):
            raise ScheduleError(  # noqa: TRY003
                "radii must be positive and strictly decreasing",
            )
        object.__setattr__(self, "radii", tuple(float(r) for r in radii))

    @classmethod
    def geometric(cls, count: int = 20, ratio: float = 0.5) -> "SequenceSchedule":
        """r_i = ratio^i for i = 1..count."""
        if not 0 < ratio < 1:
            raise ScheduleError(f"ratio must be in (0, 1), got {ratio}")  # noqa: TRY003
        return cls(tuple(ratio**i for i in range(1, count + 1)))

    @property
    def count(self) -> int:
        return len(self.radii)


@dataclass
class WitnessReport:
    cluster_points: list[ProjPoint]
    separation: float
    target_distance: float
    blowdown_limit_norm: float
    limit_bound: float
    knot_residual: float
    round_trip_residual: float

    @property
    def verdict(self) -> str:
        certified = (
            len(self.cluster_points) >= 2
            and self.separation >= self.target_distance - CLUSTER_TOL
            and self.blowdown_limit_norm <= self.limit_bound
        )
        return "no_continuous_lift" if certified else "inconclusive"

    def to_dict(self) -> dict[str, Any]:
        return {
            "cluster_points": [p.to_json() for p in self.cluster_points],
            "separation": self.separation,
            "target_distance": self.target_distance,
            "blowdown_limit_norm": self.blowdown_limit_norm,
            "limit_bound": self.limit_bound,
            "knot_residual": self.knot_residual,
            "round_trip_residual": self.round_trip_residual,
            "verdict": self.verdict,
        }


def _cluster_fibers(fibers: Sequence[ProjPoint]) -> list[ProjPoint]:
    clusters: list[ProjPoint] = []
    for p in fibers:
        if not any(proj_eq(p, c, CLUSTER_TOL) for c in clusters):
            clusters.append(p)
    return clusters


def no_lift_witness(
    x: ProjPoint,
    y: ProjPoint,
    schedule: Optional[SequenceSchedule] = None,
    annulus_samples: int = 100,
) -> WitnessReport:
    """Certify a homeomorphism of R^2 fixing 0 that has no continuous lift.

    Sequences x_i = (r_i x, [x]) and y_i = (r_i y, [y]) approach Sigma at two
    distinct points; z_i alternates between them. The tube homeomorphism h
    with h(q(x_i)) = q(z_i) is a homeomorphism of the plane, but any lift
    would send the convergent x_i to the z_i, whose fibers keep two distinct
    cluster points.
    """
    schedule = schedule or SequenceSchedule.geometric()
    if x.n != 2 or y.n != 2 or x.field is not FieldTag.REAL:
        raise DimensionError(  # noqa: TRY003
            "the no-lift witness lives on the real plane",
        )
    target_distance = proj_dist(x, y)
    if target_distance < 0.1:
        raise ScheduleError(  # noqa: TRY003
            f"targets too close: distance {target_distance:.3g}",
        )

    radii = np.array(schedule.radii)
    xs = [lift_point(r * x.homog) for r in radii]
    zs = [lift_point(r * (y.homog if i % 2 else x.homog)) for i, r in enumerate(radii)]
    pairs = []
    for xi, zi in zip(xs, zs):
        a, b = blowdown(xi), blowdown(zi)
        pairs.append(
            (
                (np.arctan2(a[1], a[0]), -np.log(np.linalg.norm(a))),
                (np.arctan2(b[1], b[0]), -np.log(np.linalg.norm(b))),
            ),
        )
    g = tube_homeo(pairs, 0.5 * pairs[0][0][1])

    images = [g.planar(blowdown(xi)) for xi in xs]
    knot_residual = max(
        float(np.linalg.norm(img - blowdown(zi))) for img, zi in zip(images, zs)
    )
    # fibers of the candidate lift h~(x_i) = lift of h(q(x_i)) = z_i
    fibers = [bundle_projection(lift_point(img)) for img in images]
    clusters = _cluster_fibers(fibers[len(fibers) // 2 :])
    separation = min(
        (proj_dist(a, b) for i, a in enumerate(clusters) for b in clusters[i + 1 :]),
        default=0.0,
    )
    tail = min(5, schedule.count)
    limit_norm = float(np.linalg.norm(images[-1]))

    angles = np.linspace(-np.pi, np.pi, annulus_samples, endpoint=False)
    rs = np.geomspace(radii[-1], 1.0, annulus_samples)
    round_trip = 0.0
    for r in rs:
        for a in angles:
            p = r * np.array([np.cos(a), np.sin(a)])
            round_trip = max(
                round_trip,
                float(np.linalg.norm(g.planar_inverse(g.planar(p)) - p) / r),
            )

    report = WitnessReport(
        clusters,
        separation,
        target_distance,
        limit_norm,
        float(radii[-tail]),
        knot_residual,
        round_trip,
    )
    logger.debug(
        f"no_lift_witness: {len(clusters)} cluster points, "
        f"separation {separation:.6g}, "
        f"limit norm {limit_norm:.3g}, verdict {report.verdict}",
    )
    return report
