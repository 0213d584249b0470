"""Dependency trees: resolution, rendering and parsing of tree-text dumps.

The text grammar is the one printed by ``mvn dependency:tree``::

    org.allowlistforge:stub:pom:1.0
    \\- com.example:lib:jar:1.0:compile
       +- com.example:a:jar:1.0:compile
       \\- com.example:b:jar:1.0:runtime
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from ..errors import (
    DepthExceeded,
    IndentationJump,
    MalformedName,
    MalformedTreeLine,
    NotFound,
    TimedOut,
    UnresolvableVersion,
)
from ..names import PackageName, parse_package_name
from .coords import MavenCoordinate, excluded
from .pom import STUB_COORDINATE, EffectivePom, generate_stub_pom, resolve_effective_pom
from .repository import OverlayRepository, RepositoryClient
from .versions import is_range, parse_metadata_versions, select_from_range

logger = logging.getLogger(__name__)

TREE_DEPTH_CAP = 64
_TRAVERSED = ("compile", "runtime")


@dataclass
class DependencyTree:
    coordinate: MavenCoordinate
    scope: str = ""
    packaging: str = "jar"
    classifier: str = ""
    optional: bool = False
    children: list[DependencyTree] = field(default_factory=list)

    def walk(self) -> Iterator[tuple[int, DependencyTree]]:
        """Pre-order traversal yielding ``(depth, node)``."""
        stack = [(0, self)]
        while stack:
            depth, node = stack.pop()
            yield depth, node
            stack.extend((depth + 1, c) for c in reversed(node.children))

    def size(self) -> int:
        return sum(1 for _ in self.walk())


def _transitive_scope(parent: str, child: str) -> str:
    if parent == "compile" and child == "compile":
        return "compile"
    return "runtime"


class _Deadline:
    def __init__(self, seconds: float | None) -> None:
        self.end = None if seconds is None else time.monotonic() + seconds

    def check(self, what: str) -> None:
        if self.end is not None and time.monotonic() > self.end:
            raise TimedOut(f"deadline elapsed while resolving {what}")


def resolve_tree(
    root: MavenCoordinate,
    repo: RepositoryClient,
    deadline: float | None = None,
) -> DependencyTree:
    """Resolve the dependency tree of ``root`` breadth-first.

    Conflicts on (group, artifact) are settled nearest-first: the shallowest
    occurrence wins and, at equal depth, the earlier declaration wins; losing
    occurrences are left out of the tree. Direct dependencies of every scope
    are kept, but only compile and runtime nodes are expanded, and optional
    dependencies are dropped below the first level. Exclusions apply to the
    subtree of the declaration that carries them. The root's managed versions
    override transitive versions, as Maven does.

    ``deadline`` is a budget in seconds; :class:`TimedOut` discards the
    partial tree.
    """
    if not root.is_complete:
        raise ValueError(f"root must be fully versioned: {root}")
    clock = _Deadline(deadline)
    effective_cache: dict[MavenCoordinate, EffectivePom] = {}

    def effective(coord: MavenCoordinate) -> EffectivePom:
        clock.check(str(coord))
        if coord not in effective_cache:
            effective_cache[coord] = resolve_effective_pom(coord, repo)
        return effective_cache[coord]

    root_pom = effective(root)
    managed = root_pom.dependency_management
    tree = DependencyTree(root_pom.coordinate, scope="", packaging=root_pom.packaging)
    selected = {root_pom.coordinate.key}
    queue = deque([(tree, root_pom.dependencies, 1, frozenset(), "compile")])

    while queue:
        clock.check(str(root))
        parent, decls, depth, exclusions, parent_scope = queue.popleft()
        if depth > TREE_DEPTH_CAP:
            raise DepthExceeded(f"dependency tree of {root} deeper than {TREE_DEPTH_CAP}")
        direct = depth == 1
        for decl in decls:
            if not direct and (decl.scope not in _TRAVERSED or decl.optional):
                continue
            key = decl.key
            if key in selected or excluded(key, exclusions):
                continue
            version = decl.coordinate.version
            if not direct and key in managed and managed[key].coordinate.version:
                version = managed[key].coordinate.version
            if not version:
                raise UnresolvableVersion(f"no version for {key[0]}:{key[1]} under {parent.coordinate}")
            if is_range(version):
                version = _resolve_range(key, version, repo)
            scope = decl.scope if direct else _transitive_scope(parent_scope, decl.scope)
            node = DependencyTree(
                decl.coordinate.with_version(version),
                scope=scope,
                packaging=decl.type,
                classifier=decl.classifier,
                optional=decl.optional,
            )
            parent.children.append(node)
            selected.add(key)
            if scope not in _TRAVERSED:
                continue
            try:
                pom = effective(node.coordinate)
            except NotFound:
                logger.warning("POM for %s is missing; no dependency information", node.coordinate)
                continue
            queue.append((node, pom.dependencies, depth + 1, exclusions | set(decl.exclusions), scope))
    return tree


def _resolve_range(key: tuple[str, str], spec: str, repo: RepositoryClient) -> str:
    doc = repo.get_metadata(*key)
    if doc is None:
        raise UnresolvableVersion(f"range {spec} for {key[0]}:{key[1]} but no metadata available")
    return select_from_range(spec, parse_metadata_versions(doc))


def resolve_library(
    target: MavenCoordinate, repo: RepositoryClient, deadline: float | None = None
) -> DependencyTree:
    """Resolve ``target`` as the sole dependency of a stub project.

    Raises :class:`NotFound` when the target's own POM is missing; only
    deeper nodes degrade to leaves.
    """
    repo.get_pom(target)
    overlay = OverlayRepository(repo, {str(STUB_COORDINATE): generate_stub_pom(target)})
    return resolve_tree(STUB_COORDINATE, overlay, deadline)


def tree_coordinates(tree: DependencyTree) -> list[MavenCoordinate]:
    """Coordinates of every node below the root, in pre-order."""
    return [node.coordinate for depth, node in tree.walk() if depth > 0]


def collect_transitive(tree: DependencyTree) -> set[PackageName]:
    """Group identifiers of every node except the (stub) root.

    Groups that are not valid package names are logged and skipped.
    """
    groups: set[PackageName] = set()
    for coord in tree_coordinates(tree):
        try:
            groups.add(parse_package_name(coord.group))
        except MalformedName:
            logger.warning("skipping group %r: not a valid package name", coord.group)
    return groups


_UNITS = ("+- ", "\\- ", "|  ", "   ")
_BRANCHES = ("+- ", "\\- ")
_INFO = "[INFO] "


def _format_node(node: DependencyTree, root: bool) -> str:
    c = node.coordinate
    if root:
        return f"{c.group}:{c.artifact}:{node.packaging}:{c.version}"
    parts = [c.group, c.artifact, node.packaging]
    if node.classifier:
        parts.append(node.classifier)
    parts += [c.version, node.scope]
    text = ":".join(parts)
    return text + " (optional)" if node.optional else text


def render_tree(tree: DependencyTree) -> str:
    lines = [_format_node(tree, root=True)]

    def emit(node: DependencyTree, prefix: str) -> None:
        for i, child in enumerate(node.children):
            last = i == len(node.children) - 1
            lines.append(prefix + ("\\- " if last else "+- ") + _format_node(child, root=False))
            emit(child, prefix + ("   " if last else "|  "))

    emit(tree, "")
    return "\n".join(lines) + "\n"


def _parse_node(lineno: int, raw: str, body: str, root: bool) -> DependencyTree:
    optional = False
    # Trailing annotations such as "(optional)" or "(version managed from 1.0)".
    while body.endswith(")") and " (" in body:
        body, _, note = body.rpartition(" (")
        optional = optional or note.startswith("optional")
    parts = body.strip().split(":")
    try:
        if root:
            if len(parts) != 4:
                raise ValueError
            g, a, packaging, v = parts
            return DependencyTree(MavenCoordinate(g, a, v), scope="", packaging=packaging)
        if len(parts) == 5:
            g, a, packaging, v, scope = parts
            classifier = ""
        elif len(parts) == 6:
            g, a, packaging, classifier, v, scope = parts
        else:
            raise ValueError
        if not g or not v or not scope:
            raise ValueError
        return DependencyTree(MavenCoordinate(g, a, v), scope=scope, packaging=packaging,
                              classifier=classifier, optional=optional)
    except ValueError:
        raise MalformedTreeLine(lineno, raw) from None


def parse_dependency_tree_text(text: str) -> DependencyTree:
    root: DependencyTree | None = None
    stack: list[DependencyTree] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if line.startswith(_INFO):
            line = line[len(_INFO):]
        elif line == "[INFO]":
            continue
        if not line.strip():
            continue
        depth = pos = 0
        while line[pos:pos + 3] in _UNITS and len(line) > pos + 3:
            depth += 1
            pos += 3
        body = line[pos:]
        if not body or body[0].isspace():
            raise MalformedTreeLine(lineno, raw)
        if root is None:
            if depth:
                raise MalformedTreeLine(lineno, raw, "tree must start with a root line")
            root = _parse_node(lineno, raw, body, root=True)
            stack = [root]
            continue
        if depth == 0:
            raise MalformedTreeLine(lineno, raw, "second root line")
        if line[pos - 3:pos] not in _BRANCHES:
            raise MalformedTreeLine(lineno, raw, "node line must end its prefix with '+- ' or '\\- '")
        if depth > len(stack):
            raise IndentationJump(lineno, raw)
        node = _parse_node(lineno, raw, body, root=False)
        stack[depth - 1].children.append(node)
        del stack[depth:]
        stack.append(node)
    if root is None:
        raise MalformedTreeLine(0, "", "empty tree text")
    return root
