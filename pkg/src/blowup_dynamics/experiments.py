"""One runner per CLI subcommand.

Each runner takes a resolved `ExperimentConfig` and returns the `results`
section of the report together with the list of property failures.
"""

import itertools
import math
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
from voluptuous import Invalid, MultipleInvalid, Schema
from voluptuous.humanize import humanize_error

from . import SCHEMA_VERSION, __version__, logger
from .blowup_model import lift_point, sigma_point
from .config import ExperimentConfig
from .errors import ConfigError, DimensionError
from .linalg import FieldTag, Matrix
from .map_lift import (
    C1ExampleMap,
    KinkMap,
    LinearMap,
    MapSpec,
    RotationScalingMap,
    builtin_specs,
    check_commutation,
    check_functoriality,
    lift_map,
    spec_from_json,
)
from .portrait import emit_svg
from .projective import ProjPoint, dist_to_subspace
from .regularity import regularity_scan
from .schema import MATRIX, REPORT_SCHEMA, RESULT_SCHEMAS_BY_COMMAND
from .sigma_dynamics import (
    SCAN_DIMENSIONS,
    brute_force_fixed_scan,
    fixed_set_on_sigma,
    iterate_orbit,
    sigma_map,
)
from .topology import blowup_topology_report, surface_blowup_summary
from .variant import (
    SequenceSchedule,
    allocation_dims,
    no_lift_witness,
    random_allocation,
    spiral_conjugacy,
    variant_blowup,
)

Outcome = tuple[dict[str, Any], list[str]]

ORACLE_TOL = 1e-3
SCAN_TOL = 1e-8
KINK_JUMP_TOL = 1e-3
SMOOTH_JUMP_TOL = 1e-6
KNOT_TOL = 1e-12
ROUND_TRIP_TOL = 1e-9


def _matrix_option(
    options: dict[str, Any],
    field_tag: Optional[FieldTag] = None,
) -> Matrix:
    try:
        rows = Schema(MATRIX)(options["matrix"])
    except (Invalid, MultipleInvalid) as e:
        raise ConfigError(  # noqa: TRY003
            f"invalid matrix: {humanize_error(options['matrix'], e)}",
        ) from e
    return Matrix.from_json(rows, field_tag)


def _spec_option(options: dict[str, Any], default: Callable[[], MapSpec]) -> MapSpec:
    if options.get("spec") is not None:
        return spec_from_json(options["spec"])
    return default()


def run_lift_check(config: ExperimentConfig) -> Outcome:
    options = config.options
    if options.get("spec") is not None:
        candidates = [spec_from_json(options["spec"])]
    else:
        family = options.get("family", "all")
        candidates = [s for s in builtin_specs() if family in ("all", s.family)]
    failures = []
    commutation = []
    for spec in candidates:
        report = check_commutation(spec, config.samples, config.tol, config.seed)
        commutation.append(report.to_dict())
        if not report.passed:
            failures.append(
                f"commutation {spec.family}: max residual {report.max_residual:.3g}",
            )

    pairs = [
        (g, h)
        for g, h in itertools.product(candidates, repeat=2)
        if g.n == h.n and g.field is h.field
    ]
    functoriality = []
    schedule = itertools.islice(itertools.cycle(pairs), options["pairs"])
    for i, (g, h) in enumerate(schedule):
        report = check_functoriality(
            g,
            h,
            options["functoriality_samples"],
            options["functoriality_tol"],
            config.seed + i,
        )
        functoriality.append(report.to_dict())
        if not report.passed:
            failures.append(
                f"functoriality {report.family}: "
                f"max residual {report.max_residual:.3g}",
            )
    return {"commutation": commutation, "functoriality": functoriality}, failures


def _scan_agreement(matrix: Matrix, resolution: int) -> Outcome:
    fixed = fixed_set_on_sigma(matrix)
    clusters = brute_force_fixed_scan(sigma_map(matrix), resolution, SCAN_TOL)
    unmatched_components = [
        comp.description
        for comp in fixed.components
        if not any(comp.contains(c.representative, ORACLE_TOL) for c in clusters)
    ]
    stray_clusters = [
        c.representative
        for c in clusters
        if fixed.component_of(c.representative, ORACLE_TOL) is None
    ]
    failures = [f"no scan cluster on {label}" for label in unmatched_components]
    failures += [f"scan cluster {p!r} off every component" for p in stray_clusters]
    if len(clusters) != len(fixed.components):
        failures.append(
            f"scan found {len(clusters)} clusters "
            f"for {len(fixed.components)} components",
        )
    oracle = {
        "resolution": resolution,
        "clusters": [c.representative.to_json() for c in clusters],
        "cluster_sizes": [c.size for c in clusters],
        "agrees": not failures,
    }
    return oracle, failures


def run_fixed_set(config: ExperimentConfig) -> Outcome:
    field_tag = FieldTag(config.field) if config.field else None
    matrix = _matrix_option(config.options, field_tag)
    fixed = fixed_set_on_sigma(matrix, config.tol)
    results = fixed.to_json()
    results["sigma"] = f"{matrix.field.value}P^{matrix.n - 1}"
    failures = []
    if matrix.field is FieldTag.COMPLEX and fixed.empty:
        failures.append("complex fixed set on Sigma is empty")
    if matrix.field is FieldTag.REAL and matrix.n in SCAN_DIMENSIONS:
        results["oracle"], oracle_failures = _scan_agreement(matrix, config.samples)
        failures += oracle_failures
    return results, failures


def _write_orbit_csv(orbit, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        orbit.to_rows(),
        delimiter=",",
        header=",".join(orbit.columns()),
        comments="",
        fmt="%.17g",
    )


def run_orbit(config: ExperimentConfig) -> Outcome:
    options = config.options
    spec = _spec_option(
        options,
        lambda: LinearMap(_matrix_option(options)),
    )
    lift = lift_map(spec)
    direction = np.asarray(options["start"], dtype=spec.field.dtype)
    if options.get("on_sigma"):
        start = sigma_point(ProjPoint(direction, spec.field))
    else:
        start = lift_point(direction)
    orbit = iterate_orbit(lift, start, options["steps"], config.tol)
    fixed = fixed_set_on_sigma(lift.d0, config.tol)
    final = orbit.final
    results: dict[str, Any] = {
        "steps": options["steps"],
        "start": start.to_json(),
        "final": final.to_json(),
        "columns": orbit.columns(),
        "fixed_set": fixed.to_json(),
        "final_distance_to_fixed": [
            dist_to_subspace(final.y, comp.basis) for comp in fixed.components
        ],
    }
    outputs = config.outputs
    if outputs.get("csv"):
        _write_orbit_csv(orbit, outputs["csv"])
    if outputs.get("svg"):
        if spec.n != 2 or spec.field is not FieldTag.REAL:
            raise DimensionError("orbit portraits need a map of R^2")  # noqa: TRY003
        angles = 2 * np.pi * (np.arange(config.samples) + 0.5) / max(config.samples, 1)
        fan = [
            iterate_orbit(lift, lift_point([np.cos(a), np.sin(a)]), options["steps"])
            for a in angles
        ]
        emit_svg([orbit, *fan], fixed.components, outputs["svg"])
    return results, []


def _expected_jump(spec: MapSpec, m: float, chart: int) -> tuple[float, float]:
    if isinstance(spec, KinkMap) and spec.order == 1:
        # chart coordinate x/y = (1 + |t|)/m about [0, 1]
        # and y/x = m/(1 + |t|) about [1, 0]
        return (2 / abs(m) if chart == 1 else 2 * abs(m)), KINK_JUMP_TOL
    if math.isinf(spec.smoothness_order):
        return 0.0, SMOOTH_JUMP_TOL
    return math.nan, math.nan


def _kink(order: int) -> KinkMap:
    return C1ExampleMap() if order == 1 else KinkMap(order)


def run_regularity(config: ExperimentConfig) -> Outcome:
    options = config.options
    spec = _spec_option(options, lambda: _kink(options["order"]))
    if spec.n != 2 or spec.field is not FieldTag.REAL:
        raise DimensionError("regularity scans run on maps of R^2")  # noqa: TRY003
    results = regularity_scan(
        lift_map(spec),
        options["m"],
        options["chart"],
        options["max_order"],
    )
    results["family"] = spec.family
    failures = []
    expected, tol = _expected_jump(spec, options["m"], results["chart"])
    if not math.isnan(expected):
        results["expected_jump"] = expected
        if abs(results["jump"][0] - expected) > tol:
            failures.append(
                f"slope jump {results['jump'][0]:.6g} differs from {expected:.6g}",
            )
    if isinstance(spec, KinkMap):
        results["expected_order"] = spec.order - 1
    return results, failures


def run_variant_demo(config: ExperimentConfig) -> Outcome:
    options = config.options
    lam, theta = options["lambda"], options["theta"]
    h0 = RotationScalingMap(lam, theta)
    h1 = LinearMap(lam * Matrix.identity(2))
    _, report = variant_blowup(
        h0,
        h1,
        spiral_conjugacy(lam, theta),
        config.samples,
        config.tol,
        config.seed,
    )
    results = report.to_dict()
    failures = []
    if not report.passed:
        failures.append(f"variant diagram residual {report.diagram_residual:.3g}")
    rotates = not math.isclose(math.sin(theta), 0, abs_tol=1e-12)
    if rotates and not report.classical.empty:
        failures.append("classical fixed set on Sigma is not empty")
    if report.variant.dims != [1]:
        failures.append(
            f"variant fixed set dims {report.variant.dims}, expected all of Sigma",
        )

    rng = np.random.default_rng(config.seed)
    mismatches = []
    for _ in range(options["allocations"]):
        alloc = random_allocation(rng, int(rng.integers(2, 9)))
        predicted, realized = allocation_dims(alloc, rng)
        if predicted != realized:
            mismatches.append(
                {
                    "allocation": alloc.to_dict(),
                    "predicted": predicted,
                    "realized": realized,
                },
            )
    results["allocations"] = {
        "checked": options["allocations"],
        "mismatches": mismatches,
    }
    failures += [f"allocation mismatch {m['allocation']}" for m in mismatches]
    return results, failures


def run_no_lift_demo(config: ExperimentConfig) -> Outcome:
    options = config.options
    report = no_lift_witness(
        ProjPoint(np.asarray(options["x"], dtype=float)),
        ProjPoint(np.asarray(options["y"], dtype=float)),
        SequenceSchedule.geometric(config.samples, options["ratio"]),
    )
    results = report.to_dict()
    failures = []
    if report.verdict != "no_continuous_lift":
        failures.append("no-lift witness is inconclusive")
    if report.knot_residual > KNOT_TOL:
        failures.append(
            f"tube homeomorphism misses a knot by {report.knot_residual:.3g}",
        )
    if report.round_trip_residual > ROUND_TRIP_TOL:
        failures.append(
            f"tube homeomorphism round trip {report.round_trip_residual:.3g}",
        )
    return results, failures


def run_euler(config: ExperimentConfig) -> Outcome:
    options = config.options
    field_tag = FieldTag(config.field or "R")
    results = blowup_topology_report(options["chi"], options["n"], field_tag).to_dict()
    if field_tag is FieldTag.REAL and options["n"] == 2:
        results["surface"] = surface_blowup_summary()
    return results, []


RUNNERS: dict[str, Callable[[ExperimentConfig], Outcome]] = {
    "lift-check": run_lift_check,
    "fixed-set": run_fixed_set,
    "orbit": run_orbit,
    "regularity": run_regularity,
    "variant-demo": run_variant_demo,
    "no-lift-demo": run_no_lift_demo,
    "euler": run_euler,
}


def run_experiment(config: ExperimentConfig) -> dict[str, Any]:
    """Run one subcommand and assemble its versioned, validated report."""
    logger.debug(f"run_experiment `{config.command=}` `{config.seed=}` `{config.tol=}`")
    results, failures = RUNNERS[config.command](config)
    for failure in failures:
        logger.warning(f"{config.command}: {failure}")
    report = {
        "schema": SCHEMA_VERSION,
        "command": config.command,
        "version": __version__,
        "seed": config.seed,
        "config": config.to_dict(),
        "results": RESULT_SCHEMAS_BY_COMMAND[config.command](results),
        "failures": failures,
        "passed": not failures,
    }
    return REPORT_SCHEMA(report)
