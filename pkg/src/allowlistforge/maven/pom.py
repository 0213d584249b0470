"""POM documents: parsing, stub generation and effective-model computation."""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from ..errors import DepthExceeded, MissingMandatory, UnresolvedProperty, XmlSyntax
from .coords import SCOPES, DependencyDecl, MavenCoordinate

if TYPE_CHECKING:
    from .repository import RepositoryClient

logger = logging.getLogger(__name__)

STUB_COORDINATE = MavenCoordinate("org.allowlistforge", "stub", "1.0")
PARENT_DEPTH_CAP = 32
_POM_NS = "http://maven.apache.org/POM/4.0.0"
_PROPERTY_REF = re.compile(r"\$\{([^}]+)\}")


@dataclass
class PomModel:
    coordinate: MavenCoordinate
    parent: MavenCoordinate | None = None
    properties: dict[str, str] = field(default_factory=dict)
    dependencies: list[DependencyDecl] = field(default_factory=list)
    dependency_management: list[DependencyDecl] = field(default_factory=list)
    packaging: str = "jar"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child(elem: ET.Element, name: str) -> ET.Element | None:
    for c in elem:
        if isinstance(c.tag, str) and _local(c.tag) == name:
            return c
    return None


def _children(elem: ET.Element | None, name: str) -> list[ET.Element]:
    if elem is None:
        return []
    return [c for c in elem if isinstance(c.tag, str) and _local(c.tag) == name]


def _text(elem: ET.Element | None, name: str, default: str = "") -> str:
    c = _child(elem, name) if elem is not None else None
    if c is None or c.text is None:
        return default
    return c.text.strip()


def _parse_dependency(elem: ET.Element) -> DependencyDecl | None:
    group = _text(elem, "groupId")
    artifact = _text(elem, "artifactId")
    if not group or not artifact:
        logger.warning("skipping dependency without groupId/artifactId")
        return None
    scope = _text(elem, "scope", "compile") or "compile"
    if scope not in SCOPES and "${" not in scope:
        logger.warning("unknown scope %r for %s:%s; treating as compile", scope, group, artifact)
        scope = "compile"
    exclusions = tuple(
        (_text(x, "groupId", "*") or "*", _text(x, "artifactId", "*") or "*")
        for x in _children(_child(elem, "exclusions"), "exclusion")
    )
    return DependencyDecl(
        MavenCoordinate(group, artifact, _text(elem, "version")),
        scope=scope,
        optional=_text(elem, "optional").lower() == "true",
        exclusions=exclusions,
        type=_text(elem, "type", "jar") or "jar",
        classifier=_text(elem, "classifier"),
    )


def _parse_dependency_list(parent: ET.Element | None) -> list[DependencyDecl]:
    decls = []
    for d in _children(_child(parent, "dependencies") if parent is not None else None, "dependency"):
        decl = _parse_dependency(d)
        if decl is not None:
            decls.append(decl)
    return decls


def parse_pom(document: str | bytes) -> PomModel:
    """Parse a POM. Unknown elements, plugins and profiles are ignored."""
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise XmlSyntax(str(exc)) from exc
    if _local(root.tag) != "project":
        raise XmlSyntax(f"root element is <{_local(root.tag)}>, expected <project>")

    parent = None
    parent_elem = _child(root, "parent")
    if parent_elem is not None:
        p_group = _text(parent_elem, "groupId")
        p_artifact = _text(parent_elem, "artifactId")
        if not p_group or not p_artifact:
            raise MissingMandatory("parent lacks groupId or artifactId")
        parent = MavenCoordinate(p_group, p_artifact, _text(parent_elem, "version"))

    artifact = _text(root, "artifactId")
    if not artifact:
        raise MissingMandatory("POM has no artifactId")
    group = _text(root, "groupId")
    version = _text(root, "version")
    if parent is None and not group:
        raise MissingMandatory(f"POM for {artifact} has neither groupId nor parent")

    props_elem = _child(root, "properties")
    properties = {}
    if props_elem is not None:
        for p in props_elem:
            if isinstance(p.tag, str):
                properties[_local(p.tag)] = (p.text or "").strip()

    return PomModel(
        coordinate=MavenCoordinate(group, artifact, version),
        parent=parent,
        properties=properties,
        dependencies=_parse_dependency_list(root),
        dependency_management=_parse_dependency_list(_child(root, "dependencyManagement")),
        packaging=_text(root, "packaging", "jar") or "jar",
    )


def generate_stub_pom(target: MavenCoordinate) -> str:
    """A throwaway project whose only dependency is ``target``."""
    if not target.is_complete:
        raise ValueError(f"stub target must be fully versioned: {target}")
    ET.register_namespace("", _POM_NS)
    project = ET.Element(f"{{{_POM_NS}}}project")

    def sub(parent: ET.Element, tag: str, text: str | None = None) -> ET.Element:
        e = ET.SubElement(parent, f"{{{_POM_NS}}}{tag}")
        if text is not None:
            e.text = text
        return e

    sub(project, "modelVersion", "4.0.0")
    sub(project, "groupId", STUB_COORDINATE.group)
    sub(project, "artifactId", STUB_COORDINATE.artifact)
    sub(project, "version", STUB_COORDINATE.version)
    sub(project, "packaging", "pom")
    dep = sub(sub(project, "dependencies"), "dependency")
    sub(dep, "groupId", target.group)
    sub(dep, "artifactId", target.artifact)
    sub(dep, "version", target.version)
    ET.indent(project)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(project, encoding="unicode") + "\n"


@dataclass
class EffectivePom:
    coordinate: MavenCoordinate
    packaging: str
    properties: dict[str, str]
    dependencies: list[DependencyDecl]
    dependency_management: dict[tuple[str, str], DependencyDecl]
    parent_chain: list[MavenCoordinate] = field(default_factory=list)


def interpolate(text: str, lookup: dict[str, str], where: str = "") -> str:
    """Expand ``${name}`` references recursively; cycles count as unresolved."""

    def expand(value: str, active: frozenset[str]) -> str:
        def repl(m: re.Match[str]) -> str:
            name = m.group(1)
            if name in active or name not in lookup:
                raise UnresolvedProperty(name, where)
            return expand(lookup[name], active | {name})

        return _PROPERTY_REF.sub(repl, value)

    if "${" not in text:
        return text
    return expand(text, frozenset())


def _project_lookup(
    coord: MavenCoordinate, packaging: str, parent: MavenCoordinate | None, properties: dict[str, str]
) -> dict[str, str]:
    lookup = dict(properties)
    for prefix in ("project.", "pom.", ""):
        lookup[f"{prefix}groupId"] = coord.group
        lookup[f"{prefix}artifactId"] = coord.artifact
        lookup[f"{prefix}version"] = coord.version
        if prefix:
            lookup[f"{prefix}packaging"] = packaging
        if parent is not None and prefix:
            lookup[f"{prefix}parent.groupId"] = parent.group
            lookup[f"{prefix}parent.artifactId"] = parent.artifact
            lookup[f"{prefix}parent.version"] = parent.version
    # Explicit properties win over the legacy bare names only.
    for name in ("groupId", "artifactId", "version"):
        if name in properties:
            lookup[name] = properties[name]
    return lookup


def _interpolate_decl(decl: DependencyDecl, lookup: dict[str, str], where: str) -> DependencyDecl:
    c = decl.coordinate
    scope = interpolate(decl.scope, lookup, where)
    if scope not in SCOPES:
        logger.warning("unknown scope %r in %s; treating as compile", scope, where)
        scope = "compile"
    return DependencyDecl(
        MavenCoordinate(
            interpolate(c.group, lookup, where),
            interpolate(c.artifact, lookup, where),
            interpolate(c.version, lookup, where),
        ),
        scope=scope,
        optional=decl.optional,
        exclusions=tuple(
            (interpolate(g, lookup, where), interpolate(a, lookup, where)) for g, a in decl.exclusions
        ),
        type=interpolate(decl.type, lookup, where),
        classifier=interpolate(decl.classifier, lookup, where),
    )


def _merge_by_key(ordered: list[list[DependencyDecl]]) -> list[DependencyDecl]:
    """Merge declaration lists, earlier lists winning on (group, artifact)."""
    seen: dict[tuple[str, str], DependencyDecl] = {}
    for decls in ordered:
        for d in decls:
            seen.setdefault(d.key, d)
    return list(seen.values())


def resolve_effective_pom(
    coord: MavenCoordinate,
    repo: RepositoryClient,
    _importing: frozenset[str] = frozenset(),
) -> EffectivePom:
    """Walk the parent chain and produce the fully interpolated model.

    Child values win over parent values for properties, dependencies and
    managed dependencies. ``import``-scoped managed entries are replaced by
    the managed entries of the referenced POM, after the local ones.
    """
    chain: list[PomModel] = []
    seen = {str(coord)}
    model = parse_pom(repo.get_pom(coord))
    chain.append(model)
    while model.parent is not None:
        key = str(model.parent)
        if key in seen or len(chain) >= PARENT_DEPTH_CAP:
            raise DepthExceeded(f"parent chain of {coord} exceeds {PARENT_DEPTH_CAP} or loops at {key}")
        seen.add(key)
        model = parse_pom(repo.get_pom(model.parent))
        chain.append(model)

    group = version = ""
    packaging = chain[0].packaging
    properties: dict[str, str] = {}
    for m in reversed(chain):
        group = m.coordinate.group or group
        version = m.coordinate.version or version
        properties.update(m.properties)
    child = chain[0]
    raw_coord = MavenCoordinate(group, child.coordinate.artifact, version)
    lookup = _project_lookup(raw_coord, packaging, child.parent, properties)
    where = str(coord)
    effective_coord = MavenCoordinate(
        interpolate(group, lookup, where),
        interpolate(child.coordinate.artifact, lookup, where),
        interpolate(version, lookup, where),
    )
    if effective_coord != raw_coord:
        lookup = _project_lookup(effective_coord, packaging, child.parent, properties)

    deps = _merge_by_key([[_interpolate_decl(d, lookup, where) for d in m.dependencies] for m in chain])
    local_managed = _merge_by_key(
        [[_interpolate_decl(d, lookup, where) for d in m.dependency_management] for m in chain]
    )

    managed: dict[tuple[str, str], DependencyDecl] = {}
    imports = []
    for d in local_managed:
        if d.scope == "import":
            imports.append(d)
        else:
            managed[d.key] = d
    for imp in imports:
        ikey = str(imp.coordinate)
        if ikey in _importing or len(_importing) >= PARENT_DEPTH_CAP:
            raise DepthExceeded(f"import chain loops or is too deep at {ikey}")
        imported = resolve_effective_pom(imp.coordinate, repo, _importing | {str(coord), ikey})
        for key, d in imported.dependency_management.items():
            managed.setdefault(key, d)

    filled = []
    for d in deps:
        if not d.coordinate.version and d.key in managed and managed[d.key].coordinate.version:
            d = DependencyDecl(
                d.coordinate.with_version(managed[d.key].coordinate.version),
                scope=d.scope,
                optional=d.optional,
                exclusions=d.exclusions or managed[d.key].exclusions,
                type=d.type,
                classifier=d.classifier,
            )
        filled.append(d)

    return EffectivePom(
        coordinate=effective_coord,
        packaging=packaging,
        properties=properties,
        dependencies=filled,
        dependency_management=managed,
        parent_chain=[m.parent for m in chain if m.parent is not None],
    )
