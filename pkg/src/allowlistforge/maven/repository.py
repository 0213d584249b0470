"""Sources of POM and metadata documents laid out like a Maven repository."""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Protocol

from ..errors import NotFound, Terminal4xx
from .coords import MavenCoordinate


class RepositoryClient(Protocol):
    def get_pom(self, coord: MavenCoordinate) -> bytes:
        """Return the POM for ``coord`` or raise :class:`NotFound`."""

    def get_metadata(self, group: str, artifact: str) -> bytes | None:
        """Return ``maven-metadata.xml`` for an artifact, or None if absent."""


def pom_path(coord: MavenCoordinate) -> str:
    return f"{coord.group.replace('.', '/')}/{coord.artifact}/{coord.version}/{coord.artifact}-{coord.version}.pom"


def metadata_path(group: str, artifact: str) -> str:
    return f"{group.replace('.', '/')}/{artifact}/maven-metadata.xml"


class LocalRepository:
    """A repository on disk in the standard ``group/artifact/version`` layout."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def get_pom(self, coord: MavenCoordinate) -> bytes:
        path = self.root / pom_path(coord)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise NotFound(str(coord)) from None

    def get_metadata(self, group: str, artifact: str) -> bytes | None:
        path = self.root / metadata_path(group, artifact)
        return path.read_bytes() if path.is_file() else None


class MemoryRepository:
    def __init__(self, poms: dict[str, str | bytes] | None = None,
                 metadata: dict[str, str | bytes] | None = None) -> None:
        self.poms = {k: v.encode() if isinstance(v, str) else v for k, v in (poms or {}).items()}
        self.metadata = {k: v.encode() if isinstance(v, str) else v for k, v in (metadata or {}).items()}

    def add_pom(self, coord: MavenCoordinate | str, document: str | bytes) -> None:
        self.poms[str(coord)] = document.encode() if isinstance(document, str) else document

    def get_pom(self, coord: MavenCoordinate) -> bytes:
        try:
            return self.poms[str(coord)]
        except KeyError:
            raise NotFound(str(coord)) from None

    def get_metadata(self, group: str, artifact: str) -> bytes | None:
        return self.metadata.get(f"{group}:{artifact}")


class HttpRepository:
    """Remote repository reached through :func:`allowlistforge.crawl.fetch`."""

    def __init__(self, base_url: str, policy=None) -> None:
        from ..crawl import FetchPolicy

        self.base_url = base_url.rstrip("/")
        self.policy = policy or FetchPolicy()

    def _get(self, path: str) -> bytes:
        from ..crawl import fetch

        return fetch(f"{self.base_url}/{path}", self.policy)

    def get_pom(self, coord: MavenCoordinate) -> bytes:
        try:
            return self._get(pom_path(coord))
        except Terminal4xx:
            raise NotFound(str(coord)) from None

    def get_metadata(self, group: str, artifact: str) -> bytes | None:
        try:
            return self._get(metadata_path(group, artifact))
        except Terminal4xx:
            return None


class OverlayRepository:
    """Serve a few in-memory POMs in front of another repository."""

    def __init__(self, base: RepositoryClient, overlay: dict[str, str | bytes]) -> None:
        self.base = base
        self.overlay = MemoryRepository(overlay)

    def get_pom(self, coord: MavenCoordinate) -> bytes:
        if str(coord) in self.overlay.poms:
            return self.overlay.poms[str(coord)]
        return self.base.get_pom(coord)

    def get_metadata(self, group: str, artifact: str) -> bytes | None:
        return self.base.get_metadata(group, artifact)


class CachedRepository:
    """Thread-safe document cache in front of another repository.

    Concurrent misses on the same key may both fetch; the last write wins,
    which is harmless because the documents are identical.
    """

    def __init__(self, base: RepositoryClient) -> None:
        self.base = base
        self._poms: dict[str, bytes | NotFound] = {}
        self._metadata: dict[str, bytes | None] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get_pom(self, coord: MavenCoordinate) -> bytes:
        key = str(coord)
        with self._lock:
            cached = self._poms.get(key)
            if cached is not None:
                self.hits += 1
        if cached is None:
            self.misses += 1
            try:
                cached = self.base.get_pom(coord)
            except NotFound as exc:
                cached = exc
            with self._lock:
                self._poms[key] = cached
        if isinstance(cached, NotFound):
            raise NotFound(key)
        return cached

    def get_metadata(self, group: str, artifact: str) -> bytes | None:
        key = f"{group}:{artifact}"
        with self._lock:
            if key in self._metadata:
                return self._metadata[key]
        doc = self.base.get_metadata(group, artifact)
        with self._lock:
            self._metadata[key] = doc
        return doc
