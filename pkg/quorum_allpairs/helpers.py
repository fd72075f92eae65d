"""Helper functions."""

from __future__ import annotations

from collections.abc import Iterable
import logging
import os
from pathlib import Path

from .const import DEFAULT_CACHE_DIR, DEFAULT_CACHE_FILENAME, ENV_CACHE_PATH
from .quorum_core import ConfigurationError, InvalidInputError

_LOGGER = logging.getLogger(__name__)


def block_label(block: int) -> str:
    """Render a 0-based block index as its 1-based label.

    Args:
        block: Block index (e.g., 0)

    Returns:
        Label (e.g., "D_1")

    """
    return f"D_{block + 1}"


def format_block_pair(pair: tuple[int, int]) -> str:
    """Render a block pair with 1-based labels, e.g. "(D_1, D_3)"."""
    return f"({block_label(pair[0])}, {block_label(pair[1])})"


def format_residues(values: Iterable[int]) -> str:
    """Render integers as a brace set without spaces, e.g. "{0,1,3}"."""
    return "{" + ",".join(str(v) for v in values) + "}"


def format_ratio(value: float | None, digits: int = 4) -> str:
    if value is None:
        return "inf"
    return f"{value:.{digits}f}"


def parse_int_list(text: str) -> list[int]:
    """Parse a comma-separated list of positive integers.

    Args:
        text: List such as "1,2,4,8"

    Returns:
        Parsed values in the given order

    Raises:
        ConfigurationError: If an entry is not a positive integer

    """
    values: list[int] = []
    for raw in text.split(","):
        entry = raw.strip()
        if not entry:
            continue
        try:
            value = int(entry)
        except ValueError as err:
            raise ConfigurationError(f"Expected an integer list, got {text!r}") from err
        if value < 1:
            raise ConfigurationError(f"List entries must be >= 1, got {value}")
        values.append(value)
    if not values:
        raise ConfigurationError(f"Expected at least one integer, got {text!r}")
    return values


def parse_residues(text: str) -> tuple[int, ...]:
    """Parse "0,1,3" or "{0,1,3}" into residues.

    Raises:
        InvalidInputError: If an entry is not an integer

    """
    stripped = text.strip().removeprefix("{").removesuffix("}")
    try:
        return tuple(int(part) for part in stripped.split(",") if part.strip())
    except ValueError as err:
        raise InvalidInputError(f"Cannot parse residues from {text!r}") from err


def resolve_cache_path(explicit: str | Path | None, disabled: bool = False) -> Path | None:
    """Pick the cache file: explicit path, then the environment, then the per-user default.

    Returns:
        Cache location, or None when caching is disabled

    """
    if disabled:
        return None
    if explicit:
        return Path(explicit).expanduser()
    from_env = os.environ.get(ENV_CACHE_PATH)
    if from_env:
        return Path(from_env).expanduser()
    return Path(DEFAULT_CACHE_DIR).expanduser() / DEFAULT_CACHE_FILENAME


def log_debug(logger: logging.Logger, context: str, message: str, **kwargs):
    """Log debug."""
    extra = " ".join(f"{k}={v}" for k, v in kwargs.items())
    logger.debug("%s: %s %s", context, message, extra)


def log_info(logger: logging.Logger, context: str, message: str, **kwargs):
    """Log info."""
    extra = " ".join(f"{k}={v}" for k, v in kwargs.items())
    logger.info("%s: %s %s", context, message, extra)


def log_warning(logger: logging.Logger, context: str, message: str, **kwargs):
    """Log warning."""
    extra = " ".join(f"{k}={v}" for k, v in kwargs.items())
    logger.warning("%s: %s %s", context, message, extra)


def log_error(logger: logging.Logger, context: str, message: str, **kwargs):
    """Log error."""
    extra = " ".join(f"{k}={v}" for k, v in kwargs.items())
    logger.error("%s: %s %s", context, message, extra)
