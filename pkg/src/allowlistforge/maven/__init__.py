"""Maven descriptors, effective models and transitive dependency trees."""

from .coords import SCOPES, DependencyDecl, MavenCoordinate
from .index import parse_index_export
from .pom import (
    STUB_COORDINATE,
    EffectivePom,
    PomModel,
    generate_stub_pom,
    parse_pom,
    resolve_effective_pom,
)
from .repository import (
    CachedRepository,
    HttpRepository,
    LocalRepository,
    MemoryRepository,
    OverlayRepository,
    RepositoryClient,
)
from .tree import (
    DependencyTree,
    collect_transitive,
    parse_dependency_tree_text,
    render_tree,
    resolve_library,
    resolve_tree,
    tree_coordinates,
)

__all__ = [
    "SCOPES", "DependencyDecl", "MavenCoordinate", "parse_index_export", "STUB_COORDINATE",
    "EffectivePom", "PomModel", "generate_stub_pom", "parse_pom", "resolve_effective_pom",
    "CachedRepository", "HttpRepository", "LocalRepository", "MemoryRepository",
    "OverlayRepository", "RepositoryClient", "DependencyTree", "collect_transitive",
    "parse_dependency_tree_text", "render_tree", "resolve_library", "resolve_tree",
    "tree_coordinates",
]
