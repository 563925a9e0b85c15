# -*- encoding: utf-8 -*-

"""
Logging Setup and Configuration Files

Library modules only obtain their logger, the command line calls
:func:`configure_logging` once. Optional settings of the commands can
be stored in a YAML mapping whose keys are the long flag names (with
dashes or underscores), command line flags win over file values.
"""

import os
import logging

import yaml

from linslam.errors import InvalidInput

LOG_FORMAT = "%(levelname)s - %(name)s - %(message)s"

# the only environment variable consulted by the package
LOG_LEVEL_VARIABLE = "LINSLAM_LOG_LEVEL"

def resolve_level(verbosity : int = 0) -> int:
    """
    Logging Level from ``-v`` Flags or the Environment

    Each ``-v`` lowers the threshold by one step from WARNING, without
    flags ``LINSLAM_LOG_LEVEL`` (a level name or number) is used.
    """

    if verbosity:
        return logging.INFO if verbosity == 1 else logging.DEBUG

    value = os.environ.get(LOG_LEVEL_VARIABLE, "").strip()
    if not value:
        return logging.WARNING
    if value.isdigit():
        return int(value)

    level = logging.getLevelName(value.upper())
    if not isinstance(level, int):
        raise InvalidInput(f"{LOG_LEVEL_VARIABLE}={value!r} is not a logging level")
    return level


def configure_logging(level : int = logging.WARNING) -> logging.Logger:
    """
    Install a Single Standard Error Handler on the Package Logger

    Calling it again replaces the handler and updates the level.
    """

    logger = logging.getLogger("linslam")
    for handler in list(logger.handlers):
        if getattr(handler, "_linslam", False):
            logger.removeHandler(handler)

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._linslam = True

    logger.addHandler(handler)
    logger.setLevel(level)
    return logger


def load_config(path : str) -> dict:
    """
    Read a YAML Configuration Mapping

    .. code-block:: yaml

        strategy: dc
        threads: 4
        max-iters: 30

    :raises InvalidInput: The document is not a mapping.

    :rtype:  dict
    :return: Settings keyed by flag names with underscores.
    """

    with open(path, "r", encoding = "utf-8") as handle:
        try:
            document = yaml.safe_load(handle)
        except yaml.YAMLError as err:
            raise InvalidInput(f"{path} is not valid YAML: {err}") from err

    if document is None:
        return {}
    if not isinstance(document, dict):
        raise InvalidInput(f"{path} must hold a mapping of settings, got {type(document).__name__}")

    return {str(key).replace("-", "_") : value for key, value in document.items()}
