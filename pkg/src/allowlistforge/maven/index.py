"""Plain-text exports of a repository index.

One coordinate per line as ``group``, ``group:artifact`` or
``group:artifact:version``. Blank lines are ignored.
"""

from __future__ import annotations

import logging
from typing import Iterable

from ..errors import MalformedLine
from ..names import is_valid_package_name
from .coords import MavenCoordinate

logger = logging.getLogger(__name__)


def parse_index_line(lineno: int, line: str) -> MavenCoordinate:
    parts = line.strip().split(":")
    if len(parts) > 3:
        raise MalformedLine(lineno, line, "too many ':'-separated fields")
    if any(not p or any(c.isspace() for c in p) for p in parts):
        raise MalformedLine(lineno, line, "empty or blank field")
    if not is_valid_package_name(parts[0]):
        raise MalformedLine(lineno, line, "group is not a valid package name")
    if len(parts) == 1:
        return MavenCoordinate(parts[0], "", "")
    return MavenCoordinate(parts[0], parts[1], parts[2] if len(parts) == 3 else "")


def parse_index_export(
    lines: Iterable[str], errors: list[MalformedLine] | None = None
) -> set[MavenCoordinate]:
    """Parse an index export; malformed lines are logged, collected and skipped."""
    coords: set[MavenCoordinate] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        try:
            coords.add(parse_index_line(lineno, line))
        except MalformedLine as exc:
            logger.warning("%s", exc)
            if errors is not None:
                errors.append(exc)
    return coords
