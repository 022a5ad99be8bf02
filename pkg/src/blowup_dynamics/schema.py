from voluptuous import (
    ALLOW_EXTRA,
    All,
    Any,
    Invalid,
    Length,
    Optional,
    Range,
    Required,
    Schema,
)

COMMANDS = (
    "lift-check",
    "fixed-set",
    "orbit",
    "regularity",
    "variant-demo",
    "no-lift-demo",
    "euler",
)


def choices(*choices):
    """Checks that value belongs to the specified set of values"""
    return Any(*choices, msg=f"expected one of {', '.join(choices)}")


Number = Any(int, float, msg="expected a number")
ComplexPair = All([Number], Length(min=2, max=2), msg="expected an [re, im] pair")
ScalarJSON = Any(Number, ComplexPair)
VECTOR = All([ScalarJSON], Length(min=1, max=8))


def square(rows):
    if any(len(row) != len(rows) for row in rows):
        lengths = ", ".join(str(len(row)) for row in rows)
        raise Invalid(f"expected a square matrix, got rows of lengths {lengths}")
    return rows


MATRIX = All([VECTOR], Length(min=2, max=8), square)
Positive = All(
    Number,
    Range(min=0, min_included=False),
    msg="expected a positive number",
)
FIELD = choices("R", "C")
PROJ_POINT = Schema({Required("homog"): VECTOR})

TERM = {
    Required("exponents"): [All(int, Range(min=0))],
    Required("coeff"): ScalarJSON,
}


def map_spec(value):
    """Validate a map spec against the schema of its family."""
    if not isinstance(value, dict) or "family" not in value:
        raise Invalid("expected a map spec with a 'family' key")
    family = value["family"]
    if family not in SCHEMAS_BY_FAMILY:
        raise Invalid(
            f"unknown family {family!r}, expected one of "
            f"{', '.join(SCHEMAS_BY_FAMILY)}",
        )
    return SCHEMAS_BY_FAMILY[family](value)


SCHEMAS_BY_FAMILY = {
    "linear": Schema(
        {
            Required("family"): "linear",
            Required("matrix"): MATRIX,
            Optional("field"): FIELD,
        },
    ),
    "paper_example_c1": Schema({Required("family"): "paper_example_c1"}),
    "abs_kink": Schema(
        {
            Required("family"): "abs_kink",
            Optional("order", default=1): All(int, Range(min=1)),
        },
    ),
    "polynomial": Schema(
        {
            Required("family"): "polynomial",
            Required("terms"): All([[TERM]], Length(min=2, max=8)),
            Optional("field"): FIELD,
        },
    ),
    "rotation_scaling": Schema(
        {
            Required("family"): "rotation_scaling",
            Required("lambda"): Positive,
            Required("theta"): Number,
        },
    ),
    "composite": Schema(
        {
            Required("family"): "composite",
            Required("maps"): All([map_spec], Length(min=1)),
        },
    ),
}

CONFIG_SCHEMA = Schema(
    {
        Required("command"): choices(*COMMANDS),
        Required("seed"): All(int, Range(min=0)),
        Required("tol"): Positive,
        Required("samples"): All(int, Range(min=1)),
        Optional("field"): FIELD,
        Optional("options"): dict,
        Optional("outputs"): {str: Any(str, None)},
    },
)

# Component of a fixed set on Sigma.
COMPONENT_SCHEMA = {
    Required("lambda"): ScalarJSON,
    Required("proj_dim"): All(int, Range(min=0)),
    Required("basis"): [VECTOR],
    "description": str,
}

RESULT_SCHEMAS_BY_COMMAND = {
    "lift-check": Schema(
        {Required("commutation"): [dict], Required("functoriality"): [dict]},
        extra=ALLOW_EXTRA,
    ),
    "fixed-set": Schema(
        {
            Required("components"): [COMPONENT_SCHEMA],
            Required("field"): FIELD,
            "rotational_classes": [ScalarJSON],
            "oracle": dict,
        },
        extra=ALLOW_EXTRA,
    ),
    "orbit": Schema({Required("steps"): int}, extra=ALLOW_EXTRA),
    "regularity": Schema(
        {
            Required("m"): Number,
            Required("chart"): int,
            Required("left"): [Number],
            Required("right"): [Number],
            Required("jump"): [Number],
            Required("order_estimate"): [int],
        },
        extra=ALLOW_EXTRA,
    ),
    "variant-demo": Schema(
        {
            Required("classical"): dict,
            Required("variant"): dict,
            Required("diagram_residual"): Number,
        },
        extra=ALLOW_EXTRA,
    ),
    "no-lift-demo": Schema(
        {
            Required("cluster_points"): [PROJ_POINT],
            Required("separation"): Number,
            Required("blowdown_limit_norm"): Number,
            Required("verdict"): choices("no_continuous_lift", "inconclusive"),
        },
        extra=ALLOW_EXTRA,
    ),
    "euler": Schema(
        {Required("euler_before"): int, Required("euler_after"): int},
        extra=ALLOW_EXTRA,
    ),
}

REPORT_SCHEMA = Schema(
    {
        Required("schema"): 1,
        Required("command"): choices(*COMMANDS),
        Required("version"): str,
        Required("seed"): int,
        Required("config"): dict,
        Required("results"): dict,
        Required("failures"): [str],
        Required("passed"): bool,
    },
)
