from __future__ import annotations

from dataclasses import dataclass

SCOPES = ("compile", "runtime", "provided", "test", "system", "import")


@dataclass(frozen=True, order=True)
class MavenCoordinate:
    """``group:artifact:version``.

    Empty fields mean "not known": a POM awaiting its parent's group or
    version, or an index-export line that names only a group.
    """

    group: str
    artifact: str
    version: str = ""

    def __post_init__(self) -> None:
        for part in (self.group, self.artifact, self.version):
            if ":" in part or any(c.isspace() for c in part):
                raise ValueError(f"illegal coordinate part {part!r}")

    @classmethod
    def parse(cls, text: str) -> MavenCoordinate:
        parts = text.strip().split(":")
        if len(parts) not in (2, 3) or not parts[0] or not parts[1]:
            raise ValueError(f"not a group:artifact[:version] coordinate: {text!r}")
        return cls(parts[0], parts[1], parts[2] if len(parts) == 3 else "")

    @property
    def key(self) -> tuple[str, str]:
        return (self.group, self.artifact)

    @property
    def is_complete(self) -> bool:
        return bool(self.group and self.artifact and self.version)

    def with_version(self, version: str) -> MavenCoordinate:
        return MavenCoordinate(self.group, self.artifact, version)

    def __str__(self) -> str:
        return f"{self.group}:{self.artifact}:{self.version}"


@dataclass(frozen=True)
class DependencyDecl:
    coordinate: MavenCoordinate
    scope: str = "compile"
    optional: bool = False
    # (group, artifact) pairs; either side may be "*".
    exclusions: tuple[tuple[str, str], ...] = ()
    type: str = "jar"
    classifier: str = ""

    def __post_init__(self) -> None:
        if self.scope not in SCOPES and "${" not in self.scope:
            raise ValueError(f"unknown scope {self.scope!r}")

    @property
    def key(self) -> tuple[str, str]:
        return self.coordinate.key


def excluded(key: tuple[str, str], exclusions) -> bool:
    group, artifact = key
    for g, a in exclusions:
        if (g == "*" or g == group) and (a == "*" or a == artifact):
            return True
    return False
