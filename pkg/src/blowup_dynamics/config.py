import dataclasses
from dataclasses import dataclass
from os import getenv
from typing import Any, Callable, Optional

from voluptuous import Invalid, MultipleInvalid
from voluptuous.humanize import humanize_error

from . import DEFAULT_SEED, DEFAULT_TOL, logger
from .env import BLOWUP_DYNAMICS_SAMPLES, BLOWUP_DYNAMICS_SEED, BLOWUP_DYNAMICS_TOL
from .errors import ConfigError
from .schema import CONFIG_SCHEMA

DEFAULT_SAMPLES = {
    "lift-check": 10_000,
    "fixed-set": 10_000,
    "orbit": 8,
    "regularity": 1,
    "variant-demo": 10_000,
    "no-lift-demo": 20,
    "euler": 1,
}
DEFAULT_TOLS = {"lift-check": 1e-10}


@dataclass
class ExperimentConfig:
    command: str
    seed: int
    tol: float
    samples: int
    field: Optional[str] = None
    options: dict[str, Any] = dataclasses.field(default_factory=dict)
    outputs: dict[str, Optional[str]] = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "command": self.command,
            "seed": self.seed,
            "tol": self.tol,
            "samples": self.samples,
            "options": dict(self.options),
            "outputs": dict(self.outputs),
        }
        if self.field is not None:
            data["field"] = self.field
        return data


def _from_env(name: str, cast: Callable[[str], Any]) -> Any:
    value = getenv(name)
    if value is None:
        return None
    try:
        return cast(value)
    except ValueError as e:
        raise ConfigError(f"invalid value for {name}: {value!r}") from e


def _first(*values: Any) -> Any:
    # like an `or` chain, but 0 and 0.0 are real settings
    return next((value for value in values if value is not None), None)


def _unwrap_report(config_data: dict[str, Any]) -> dict[str, Any]:
    if "results" in config_data and "config" in config_data:
        logger.debug("Config file is a report. Using its embedded config.")
        return config_data["config"]
    return config_data


def get_experiment_config(  # noqa: PLR0913
    command: str,
    config_data: Optional[dict[str, Any]] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
    samples: Optional[int] = None,
    field: Optional[str] = None,
    options: Optional[dict[str, Any]] = None,
    outputs: Optional[dict[str, Optional[str]]] = None,
) -> ExperimentConfig:
    """Resolve the settings of one CLI run.

    Args:
    ----
        command (str): CLI subcommand.
        config_data (Optional[dict]): contents of a `--config` file, either a
            config object or an earlier report. Takes precedence over flags.
        seed (Optional[int]): `--seed` flag.
        tol (Optional[float]): `--tol` flag.
        samples (Optional[int]): `--samples` flag.
        field (Optional[str]): `--field` flag, "R" or "C".
        options (Optional[dict]): command-specific flags.
        outputs (Optional[dict]): output paths by kind.

    Returns:
    -------
        ExperimentConfig: settings resolved from, in increasing precedence,
            defaults, environment variables, flags and the config file.

    Raises:
    ------
        ConfigError: the resolved settings are invalid.
    """
    file_data = _unwrap_report(config_data or {})
    if "command" in file_data and file_data["command"] != command:
        raise ConfigError(  # noqa: TRY003
            f"config file is for `{file_data['command']}`, not `{command}`",
        )

    resolved_seed = _first(
        file_data.get("seed"),
        seed,
        _from_env(BLOWUP_DYNAMICS_SEED, int),
    )
    if resolved_seed is None:
        logger.debug(f"{BLOWUP_DYNAMICS_SEED} not found. Using {DEFAULT_SEED}.")
        resolved_seed = DEFAULT_SEED

    resolved_tol = _first(
        file_data.get("tol"),
        tol,
        _from_env(BLOWUP_DYNAMICS_TOL, float),
    )
    if resolved_tol is None:
        resolved_tol = DEFAULT_TOLS.get(command, DEFAULT_TOL)
        logger.debug(f"{BLOWUP_DYNAMICS_TOL} not found. Using {resolved_tol}.")

    resolved_samples = _first(
        file_data.get("samples"),
        samples,
        _from_env(BLOWUP_DYNAMICS_SAMPLES, int),
    )
    if resolved_samples is None:
        resolved_samples = DEFAULT_SAMPLES.get(command, 1)
        logger.debug(f"{BLOWUP_DYNAMICS_SAMPLES} not found. Using {resolved_samples}.")

    data: dict[str, Any] = {
        "command": command,
        "seed": resolved_seed,
        "tol": resolved_tol,
        "samples": resolved_samples,
        "options": {**(options or {}), **file_data.get("options", {})},
        # output paths given on the command line win over a re-run report's
        "outputs": {**file_data.get("outputs", {}), **(outputs or {})},
    }
    resolved_field = _first(file_data.get("field"), field)
    if resolved_field is not None:
        data["field"] = resolved_field
    try:
        data = CONFIG_SCHEMA(data)
    except (Invalid, MultipleInvalid) as e:
        raise ConfigError(humanize_error(data, e)) from e
    return ExperimentConfig(**data)
