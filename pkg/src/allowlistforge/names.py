"""Package names and allowlists.

A package name is a non-empty sequence of dot-separated segments drawn
from ``[A-Za-z0-9_-]``. Case is preserved and significant. An allowlist is
a sorted, duplicate-free set of package names; a *refined* allowlist is
additionally prefix-free at segment boundaries (see :mod:`.refine`).

The on-disk format is UTF-8 text with one name per line, LF line endings,
sorted ascending and without duplicates or comments.
"""

from __future__ import annotations

import logging
import os
import re
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import IoFailure, MalformedName

logger = logging.getLogger(__name__)

_SEGMENT = re.compile(r"[A-Za-z0-9_-]+")


@dataclass(frozen=True, order=False)
class PackageName:
    segments: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise MalformedName("", "empty name")
        for seg in self.segments:
            if not seg:
                raise MalformedName(".".join(self.segments), "empty segment")
            if not _SEGMENT.fullmatch(seg):
                raise MalformedName(".".join(self.segments), f"illegal character in segment {seg!r}")

    @classmethod
    def parse(cls, text: str) -> PackageName:
        return parse_package_name(text)

    def root(self) -> str:
        return self.segments[0]

    def field_count(self) -> int:
        return len(self.segments)

    def covers(self, other: PackageName) -> bool:
        """True if ``other`` equals this name or extends it at a segment boundary."""
        n = len(self.segments)
        return len(other.segments) >= n and other.segments[:n] == self.segments

    def __str__(self) -> str:
        return ".".join(self.segments)

    def __repr__(self) -> str:
        return f"PackageName({str(self)!r})"

    def __lt__(self, other: PackageName) -> bool:
        return str(self) < str(other)


def parse_package_name(text: str) -> PackageName:
    """Validate ``text`` and return it as a :class:`PackageName`.

    Surrounding whitespace is trimmed first. Raises :class:`MalformedName`
    on empty input, empty segments or characters outside ``[A-Za-z0-9_-]``.
    """
    if not isinstance(text, str):
        raise MalformedName(repr(text), "not a string")
    stripped = text.strip()
    if not stripped:
        raise MalformedName(text, "empty name")
    return PackageName(tuple(stripped.split(".")))


def is_valid_package_name(text: str) -> bool:
    try:
        parse_package_name(text)
    except MalformedName:
        return False
    return True


@dataclass(frozen=True)
class AllowList:
    """Immutable sorted set of package names."""

    entries: tuple[PackageName, ...] = ()
    # Equality is defined on entries only so a refined list survives a file round trip.
    refined: bool = field(default=False, compare=False)
    _index: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        unique = {str(p): p for p in self.entries}
        ordered = tuple(unique[k] for k in sorted(unique))
        object.__setattr__(self, "entries", ordered)
        object.__setattr__(self, "_index", frozenset(unique))

    @classmethod
    def from_names(cls, names: Iterable[str | PackageName], refined: bool = False) -> AllowList:
        return cls(
            tuple(n if isinstance(n, PackageName) else parse_package_name(n) for n in names),
            refined=refined,
        )

    def names(self) -> list[str]:
        """Serialized entries, in sorted order."""
        return [str(p) for p in self.entries]

    def name_set(self) -> frozenset[str]:
        return self._index

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[PackageName]:
        return iter(self.entries)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, PackageName):
            return str(item) in self._index
        if isinstance(item, str):
            return item in self._index
        return False


def merge(source_sets: Iterable[Iterable[PackageName]]) -> AllowList:
    """Union of several name sets, duplicates removed; never refined."""
    union: set[PackageName] = set()
    for s in source_sets:
        union.update(s)
    return AllowList(tuple(union), refined=False)


class MergeStore:
    """Serialized merge point for concurrent producers.

    Producers call :meth:`submit` from any thread; merges are applied one at
    a time under a lock so the running set is never observed half-updated.
    """

    def __init__(self, initial: Iterable[PackageName] = ()) -> None:
        self._lock = threading.Lock()
        self._names: set[PackageName] = set(initial)
        self.submissions = 0

    def submit(self, names: Iterable[PackageName | str]) -> int:
        """Add names and return how many were new."""
        parsed = [n if isinstance(n, PackageName) else parse_package_name(n) for n in names]
        with self._lock:
            before = len(self._names)
            self._names.update(parsed)
            self.submissions += 1
            return len(self._names) - before

    def __len__(self) -> int:
        with self._lock:
            return len(self._names)

    def snapshot(self) -> AllowList:
        with self._lock:
            return AllowList(tuple(self._names))


def serialize_allowlist(allowlist: AllowList) -> str:
    return "".join(f"{name}\n" for name in allowlist.names())


def atomic_write_text(destination: str | os.PathLike[str], text: str) -> None:
    """Write ``text`` to a temp file beside ``destination`` and rename it into place."""
    dest = Path(destination)
    try:
        dest.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=dest.parent, prefix=f".{dest.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, dest)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {dest}: {exc}") from exc


def write_allowlist(allowlist: AllowList, destination: str | os.PathLike[str]) -> None:
    atomic_write_text(destination, serialize_allowlist(allowlist))


@dataclass
class ReadReport:
    duplicates: int = 0


def parse_allowlist_text(text: str, report: ReadReport | None = None) -> AllowList:
    """Parse allowlist file contents. Accepts LF and CRLF; blank lines are ignored."""
    seen: dict[str, PackageName] = {}
    duplicates = 0
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        try:
            name = parse_package_name(line)
        except MalformedName as exc:
            raise MalformedName(line, exc.reason, line=lineno) from None
        key = str(name)
        if key in seen:
            duplicates += 1
            continue
        seen[key] = name
    if duplicates:
        logger.warning("allowlist contained %d duplicate line(s); deduplicated", duplicates)
    if report is not None:
        report.duplicates = duplicates
    return AllowList(tuple(seen.values()))


def read_allowlist(source: str | os.PathLike[str], report: ReadReport | None = None) -> AllowList:
    try:
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {source}: {exc}") from exc
    return parse_allowlist_text(text, report)
