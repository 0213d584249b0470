"""Mine Gradle build files for dependency coordinates and repositories.

This is a tolerant surface scanner, not a Groovy or Kotlin parser: it
recognises the declaration shapes that put a library coordinate on one
statement and ignores everything else. Comments are blanked out first
(string literals are respected) so commented-out declarations never count.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import IoFailure, MalformedLine, MalformedName
from .maven.coords import MavenCoordinate
from .names import PackageName, atomic_write_text, parse_package_name

logger = logging.getLogger(__name__)

BUILD_FILE_NAMES = ("build.gradle", "build.gradle.kts")
DEFAULT_CONFIGURATIONS = ("implementation", "classpath", "compile")
EXTENDED_CONFIGURATIONS = DEFAULT_CONFIGURATIONS + ("api", "testImplementation", "annotationProcessor", "kapt")


@dataclass(frozen=True)
class GradleDependency:
    configuration: str
    coordinate: MavenCoordinate
    source_file: str = ""
    line: int = 0


class RepoKind(str, enum.Enum):
    JCENTER = "jcenter"
    GRADLE_PLUGIN_PORTAL = "gradlePluginPortal"
    GOOGLE = "google"
    MAVEN_CENTRAL = "mavenCentral"
    CUSTOM = "custom"


@dataclass(frozen=True)
class RepoDecl:
    kind: RepoKind
    url: str = ""

    def __post_init__(self) -> None:
        if (self.kind is RepoKind.CUSTOM) != bool(self.url):
            raise ValueError("a url is required for custom repositories and only for them")

    def __str__(self) -> str:
        return self.url if self.kind is RepoKind.CUSTOM else f"{self.kind.value}()"


def strip_comments(text: str) -> str:
    """Blank out ``//`` and ``/* */`` comments, keeping offsets and newlines."""
    out: list[str] = []
    i, n = 0, len(text)
    quote = ""
    while i < n:
        c = text[i]
        if quote:
            if c == "\\" and i + 1 < n:
                out.append(text[i:i + 2])
                i += 2
            elif text.startswith(quote, i):
                out.append(quote)
                i += len(quote)
                quote = ""
            else:
                if c == "\n" and len(quote) == 1:
                    quote = ""  # unterminated single-line string
                out.append(c)
                i += 1
        elif text.startswith("//", i):
            end = text.find("\n", i)
            end = n if end == -1 else end
            out.append(" " * (end - i))
            i = end
        elif text.startswith("/*", i):
            end = text.find("*/", i + 2)
            end = n if end == -1 else end + 2
            out.append("".join(ch if ch == "\n" else " " for ch in text[i:end]))
            i = end
        elif c in "'\"":
            quote = c * 3 if text.startswith(c * 3, i) else c
            out.append(quote)
            i += len(quote)
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _conf_alternation(configurations: Iterable[str]) -> str:
    return "|".join(sorted((re.escape(c) for c in configurations), key=len, reverse=True))


def _patterns(configurations: tuple[str, ...]) -> tuple[re.Pattern[str], re.Pattern[str], re.Pattern[str]]:
    confs = _conf_alternation(configurations)
    lead = rf"(?<![\w.$])(?P<conf>{confs})"
    string = re.compile(
        lead + r"""\s*\(?\s*(?:(?:platform|enforcedPlatform)\s*\(\s*)?(?P<q>['"])(?P<coord>[^'"\n]+)(?P=q)"""
    )
    mapped = re.compile(
        lead
        + r"""\s*\(?\s*group\s*[:=]\s*(?P<q1>['"])(?P<g>[^'"\n]*)(?P=q1)\s*,"""
        + r"""\s*name\s*[:=]\s*(?P<q2>['"])(?P<a>[^'"\n]*)(?P=q2)"""
        + r"""(?:\s*,\s*version\s*[:=]\s*(?P<q3>['"])(?P<v>[^'"\n]*)(?P=q3))?"""
    )
    candidate = re.compile(rf"(?m)^[ \t]*(?P<conf>{confs})(?=[\s(])")
    return string, mapped, candidate


_PATTERN_CACHE: dict[tuple[str, ...], tuple[re.Pattern[str], re.Pattern[str], re.Pattern[str]]] = {}


def _compiled(configurations: tuple[str, ...]):
    if configurations not in _PATTERN_CACHE:
        _PATTERN_CACHE[configurations] = _patterns(configurations)
    return _PATTERN_CACHE[configurations]


def _clean_version(version: str) -> str:
    return "" if "$" in version else version


def _coordinate(group: str, artifact: str, version: str) -> MavenCoordinate | None:
    group, artifact = group.strip(), artifact.strip()
    if not group or not artifact or "$" in group or "$" in artifact:
        return None
    try:
        return MavenCoordinate(group, artifact, _clean_version(version.strip()))
    except ValueError:
        return None


def _from_notation(notation: str) -> MavenCoordinate | None:
    notation = notation.split("@", 1)[0]
    parts = notation.split(":")
    if len(parts) < 2:
        return None
    return _coordinate(parts[0], parts[1], parts[2] if len(parts) > 2 else "")


def scan_dependencies(
    file_text: str, source_file: str = "", extended: bool = False
) -> tuple[list[GradleDependency], int]:
    """Extract dependencies and count declaration-looking statements that were skipped."""
    configurations = EXTENDED_CONFIGURATIONS if extended else DEFAULT_CONFIGURATIONS
    string, mapped, candidate = _compiled(configurations)
    text = strip_comments(file_text)
    found: dict[int, GradleDependency] = {}
    rejected: set[int] = set()
    for pattern in (mapped, string):
        for m in pattern.finditer(text):
            start = m.start("conf")
            if start in found or start in rejected:
                continue
            if pattern is mapped:
                coord = _coordinate(m.group("g"), m.group("a"), m.group("v") or "")
            else:
                coord = _from_notation(m.group("coord"))
            if coord is None:
                rejected.add(start)
                continue
            line = text.count("\n", 0, start) + 1
            found[start] = GradleDependency(m.group("conf"), coord, source_file, line)
    skipped = sum(1 for m in candidate.finditer(text) if m.start("conf") not in found)
    return [found[k] for k in sorted(found)], skipped


def extract_dependencies(file_text: str, source_file: str = "", extended: bool = False) -> list[GradleDependency]:
    """Dependencies declared with the accepted configurations.

    Handles ``conf 'g:a:v'``, ``conf("g:a:v")`` and
    ``conf group: 'g', name: 'a', version: 'v'``. Interpolated versions
    (containing ``$``) are kept with an empty version.
    """
    return scan_dependencies(file_text, source_file, extended)[0]


_BUILTIN_REPO = re.compile(r"(?<![\w.])(jcenter|gradlePluginPortal|google|mavenCentral)\s*\(\s*\)")
_MAVEN_BLOCK = re.compile(
    r"""(?<![\w.])maven\s*\{[^{}]*?\b(?:url|setUrl)\s*(?:=|\()?\s*(?:uri\s*\(\s*)?(['"])(?P<url>[^'"\n]+)\1""",
    re.S,
)
_MAVEN_CALL = re.compile(
    r"""(?<![\w.])maven\s*\(\s*(?:url\s*=\s*)?(?:uri\s*\(\s*)?(['"])(?P<url>[^'"\n]+)\1"""
)


def extract_repositories(file_text: str) -> list[RepoDecl]:
    """Declared repositories, deduplicated in first-seen order."""
    text = strip_comments(file_text)
    hits: list[tuple[int, RepoDecl]] = []
    for m in _BUILTIN_REPO.finditer(text):
        hits.append((m.start(), RepoDecl(RepoKind(m.group(1)))))
    for pattern in (_MAVEN_BLOCK, _MAVEN_CALL):
        for m in pattern.finditer(text):
            hits.append((m.start(), RepoDecl(RepoKind.CUSTOM, m.group("url").strip())))
    seen: dict[RepoDecl, None] = {}
    for _, decl in sorted(hits, key=lambda h: h[0]):
        seen.setdefault(decl, None)
    return list(seen)


def scan_project(root_dir: str | os.PathLike[str]) -> list[Path]:
    """Build files under ``root_dir``, sorted by path."""
    root = Path(root_dir)
    if not root.is_dir():
        raise IoFailure(f"not a directory: {root}")
    found = []
    try:
        for dirpath, dirnames, filenames in os.walk(root):
            dirnames[:] = [d for d in dirnames if d != ".git"]
            for name in filenames:
                if name in BUILD_FILE_NAMES:
                    found.append(Path(dirpath) / name)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return sorted(found)


@dataclass
class MiningResult:
    names: set[PackageName] = field(default_factory=set)
    repositories: set[RepoDecl] = field(default_factory=set)
    dependencies: list[GradleDependency] = field(default_factory=list)
    skipped: int = 0
    errors: list[tuple[str, str]] = field(default_factory=list)

    def __iter__(self):
        # Allows ``names, repos = mine_projects(...)``.
        return iter((self.names, self.repositories))


def mine_projects(dirs: Iterable[str | os.PathLike[str]], extended: bool = False) -> MiningResult:
    result = MiningResult()
    for d in dirs:
        try:
            files = scan_project(d)
        except IoFailure as exc:
            result.errors.append((str(d), str(exc)))
            continue
        for path in files:
            try:
                text = path.read_text(encoding="utf-8", errors="replace")
            except OSError as exc:
                result.errors.append((str(path), str(exc)))
                continue
            deps, skipped = scan_dependencies(text, str(path), extended)
            result.dependencies.extend(deps)
            result.skipped += skipped
            result.repositories.update(extract_repositories(text))
            for dep in deps:
                try:
                    result.names.add(parse_package_name(dep.coordinate.group))
                except MalformedName:
                    logger.warning("%s:%d: group %r is not a package name", path, dep.line, dep.coordinate.group)
    result.dependencies.sort(key=lambda d: (d.source_file, d.line, str(d.coordinate)))
    return result


def dependency_report_csv(dependencies: Iterable[GradleDependency]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["configuration", "group", "artifact", "version", "file", "line"])
    for d in dependencies:
        c = d.coordinate
        writer.writerow([d.configuration, c.group, c.artifact, c.version, d.source_file, d.line])
    return buf.getvalue()


# Clone plans

_GIT_HOSTS = (
    "github.com", "gitlab.com", "bitbucket.org", "codeberg.org", "framagit.org", "git.sr.ht",
    "notabug.org", "salsa.debian.org", "gitea.com", "invent.kde.org", "0xacab.org",
)


def vcs_kind(url: str) -> str:
    u = url.strip()
    lower = u.lower()
    if lower.startswith(("svn:", "svn+", "hg:", "bzr:")):
        return "other"
    if lower.endswith(".git") or lower.startswith(("git://", "git@", "ssh://git@")):
        return "git"
    m = re.match(r"^[a-z][a-z0-9+.-]*://(?:[^@/]*@)?([^/:]+)", lower)
    if m:
        host = m.group(1)
        if any(host == h or host.endswith("." + h) for h in _GIT_HOSTS) or host.startswith(("gitlab.", "gitea.")):
            return "git"
    return "other"


@dataclass(frozen=True)
class CloneEntry:
    app_id: str
    source_url: str
    vcs_kind: str


@dataclass
class ClonePlan:
    entries: list[CloneEntry] = field(default_factory=list)
    malformed: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["app_id", "source_url", "vcs_kind"])
        for e in self.entries:
            writer.writerow([e.app_id, e.source_url, e.vcs_kind])
        return buf.getvalue()


def build_clone_plan(source_listing: Iterable[str], errors: list[MalformedLine] | None = None) -> ClonePlan:
    """Turn ``app_id,source_url`` lines into a clone plan; first entry per app wins."""
    plan = ClonePlan()
    seen: set[str] = set()
    for lineno, row in enumerate(csv.reader(source_listing), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if lineno == 1 and [c.strip().lower() for c in row] == ["app_id", "source_url"]:
            continue
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            plan.malformed += 1
            exc = MalformedLine(lineno, ",".join(row), "expected app_id,source_url")
            logger.warning("%s", exc)
            if errors is not None:
                errors.append(exc)
            continue
        app_id, url = row[0].strip(), row[1].strip()
        if app_id in seen:
            continue
        seen.add(app_id)
        plan.entries.append(CloneEntry(app_id, url, vcs_kind(url)))
    return plan


def write_dependency_report(dependencies: Iterable[GradleDependency], destination) -> None:
    atomic_write_text(destination, dependency_report_csv(dependencies))
