"""Blowups of F^n at the origin and the dynamics of lifted maps."""

import logging
from importlib.metadata import PackageNotFoundError, version
from os import getenv

from .env import BLOWUP_DYNAMICS_LOGLEVEL

logger = logging.getLogger("blowup_dynamics")
handler = logging.StreamHandler()
formatter = logging.Formatter("%(levelname)s:%(name)s:%(message)s")
handler.setFormatter(formatter)
logger.addHandler(handler)
logger.setLevel(getenv(BLOWUP_DYNAMICS_LOGLEVEL, "WARNING").upper())

try:
    __version__ = version("blowup-dynamics")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.0.0"

DEFAULT_TOL = 1e-9
DEFAULT_SEED = 0
# Version of the JSON report envelope written by the CLI.
SCHEMA_VERSION = 1
