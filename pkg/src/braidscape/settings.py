from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass

LOGGER = logging.getLogger(__name__)

_MAX_CELLS_ENV = "BRAIDSCAPE_MAX_CELLS"
_MAX_ARC_COLLECTIONS_ENV = "BRAIDSCAPE_MAX_ARC_COLLECTIONS"
_ARC_TIMEOUT_ENV = "BRAIDSCAPE_ARC_TIMEOUT"

DEFAULT_MAX_CELLS = 5_000_000
DEFAULT_MAX_ARC_COLLECTIONS = 2_000_000


@dataclass(frozen=True, slots=True)
class BraidscapeLimits:
    """Search and enumeration guards shared by every capped operation.

    Args:
        max_cells: Upper bound on cells produced by a single enumeration.
            Exceeding it raises `CellCapExceededError` instead of truncating.
        max_arc_collections: Upper bound on candidate arc collections tested
            by one arc search.
        arc_timeout_seconds: Optional wall-clock limit for one arc search.

    Notes:
        `BraidscapeLimits.from_env()` reads `BRAIDSCAPE_MAX_CELLS`,
        `BRAIDSCAPE_MAX_ARC_COLLECTIONS` and `BRAIDSCAPE_ARC_TIMEOUT`.
    """

    max_cells: int = DEFAULT_MAX_CELLS
    max_arc_collections: int = DEFAULT_MAX_ARC_COLLECTIONS
    arc_timeout_seconds: float | None = None

    def __post_init__(self) -> None:
        if self.max_cells < 1:
            raise ValueError("BraidscapeLimits.max_cells must be positive.")
        if self.max_arc_collections < 1:
            raise ValueError("BraidscapeLimits.max_arc_collections must be positive.")
        if self.arc_timeout_seconds is not None and self.arc_timeout_seconds <= 0:
            raise ValueError("BraidscapeLimits.arc_timeout_seconds must be positive when set.")

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> BraidscapeLimits:
        """Build limits from environment variables, keeping defaults for bad values."""
        env = environ if environ is not None else os.environ
        return cls(
            max_cells=_resolve_positive_int(env, _MAX_CELLS_ENV, DEFAULT_MAX_CELLS),
            max_arc_collections=_resolve_positive_int(
                env, _MAX_ARC_COLLECTIONS_ENV, DEFAULT_MAX_ARC_COLLECTIONS
            ),
            arc_timeout_seconds=_resolve_timeout(env),
        )

    def with_overrides(
        self,
        *,
        max_cells: int | None = None,
        max_arc_collections: int | None = None,
    ) -> BraidscapeLimits:
        return BraidscapeLimits(
            max_cells=max_cells if max_cells is not None else self.max_cells,
            max_arc_collections=(
                max_arc_collections
                if max_arc_collections is not None
                else self.max_arc_collections
            ),
            arc_timeout_seconds=self.arc_timeout_seconds,
        )


def resolve_limits(limits: BraidscapeLimits | None) -> BraidscapeLimits:
    return limits if limits is not None else BraidscapeLimits()


def _resolve_positive_int(env: Mapping[str, str], name: str, default: int) -> int:
    raw = env.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip().replace("_", ""))
    except ValueError:
        LOGGER.warning("Ignoring %s=%r: not an integer. Using %d.", name, raw, default)
        return default
    if value < 1:
        LOGGER.warning("Ignoring %s=%r: must be positive. Using %d.", name, raw, default)
        return default
    return value


def _resolve_timeout(env: Mapping[str, str]) -> float | None:
    raw = env.get(_ARC_TIMEOUT_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        value = float(raw)
    except ValueError:
        LOGGER.warning("Ignoring %s=%r: not a number.", _ARC_TIMEOUT_ENV, raw)
        return None
    if value <= 0:
        LOGGER.warning("Ignoring %s=%r: must be positive.", _ARC_TIMEOUT_ENV, raw)
        return None
    return value
