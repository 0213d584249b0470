"""Allowlist refinement: keep only the shortest covering package names.

``com.example`` covers ``com.example.sub`` but not ``com.examplefoo``:
coverage is decided on whole segments, never on raw string prefixes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from . import kernels
from .names import AllowList, PackageName, atomic_write_text, parse_package_name


@dataclass
class _Node:
    children: dict[str, _Node] = field(default_factory=dict)
    terminal: bool = False


class PrefixTrie:
    """Segment trie over package names.

    ``insert`` keeps every name. ``insert_pruning`` refuses names that are
    already covered and drops the subtree of any name it newly covers, so
    after a run of pruning inserts the terminals form a minimal set.
    """

    def __init__(self, names: Iterable[PackageName | str] = ()) -> None:
        self._root = _Node()
        self._size = 0
        for name in names:
            self.insert(name)

    def __len__(self) -> int:
        return self._size

    @staticmethod
    def _segments(name: PackageName | str) -> tuple[str, ...]:
        if isinstance(name, PackageName):
            return name.segments
        return parse_package_name(name).segments

    def insert(self, name: PackageName | str) -> bool:
        node = self._root
        for seg in self._segments(name):
            node = node.children.setdefault(seg, _Node())
        if node.terminal:
            return False
        node.terminal = True
        self._size += 1
        return True

    def insert_pruning(self, name: PackageName | str) -> bool:
        """Insert unless covered; returns False when an existing entry covers ``name``."""
        node = self._root
        for seg in self._segments(name):
            if node.terminal:
                return False
            node = node.children.setdefault(seg, _Node())
        if node.terminal:
            return False
        self._size -= self._count(node)
        node.children.clear()
        node.terminal = True
        self._size += 1
        return True

    @staticmethod
    def _count(node: _Node) -> int:
        total = 0
        stack = [node]
        while stack:
            cur = stack.pop()
            total += cur.terminal
            stack.extend(cur.children.values())
        return total

    def covering(self, name: PackageName | str) -> PackageName | None:
        """Shortest stored name covering ``name``, if any."""
        node = self._root
        path: list[str] = []
        for seg in self._segments(name):
            node = node.children.get(seg)
            if node is None:
                return None
            path.append(seg)
            if node.terminal:
                return PackageName(tuple(path))
        return None

    def __contains__(self, name: PackageName | str) -> bool:
        node = self._root
        for seg in self._segments(name):
            node = node.children.get(seg)
            if node is None:
                return False
        return node.terminal

    def __iter__(self) -> Iterator[PackageName]:
        stack: list[tuple[_Node, tuple[str, ...]]] = [(self._root, ())]
        while stack:
            node, path = stack.pop()
            if node.terminal:
                yield PackageName(path)
            for seg, child in node.children.items():
                stack.append((child, path + (seg,)))


@dataclass(frozen=True)
class RefineResult:
    allowlist: AllowList
    removed: tuple[tuple[PackageName, PackageName], ...]

    @property
    def removed_count(self) -> int:
        return len(self.removed)


def refine_with_report(allowlist: AllowList) -> RefineResult:
    """Refine and report each removed name with the entry that covers it."""
    kept, removed = kernels.prune_covered(allowlist.names())
    by_name = {str(p): p for p in allowlist}
    result = AllowList(tuple(by_name[k] for k in kept), refined=True)
    pairs = tuple(sorted((by_name[r], by_name[c]) for r, c in removed))
    return RefineResult(result, pairs)


def refine(allowlist: AllowList) -> AllowList:
    """Minimal subset of ``allowlist`` that still covers every entry."""
    return refine_with_report(allowlist).allowlist


def is_covered(name: PackageName | str, allowlist: AllowList) -> bool:
    """True iff ``name`` equals an entry or extends one at a segment boundary."""
    return kernels.is_covered(str(name), allowlist.name_set())


def write_removal_report(result: RefineResult, destination) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["removed_name", "covering_name"])
    for removed, cover in result.removed:
        writer.writerow([str(removed), str(cover)])
    atomic_write_text(destination, buf.getvalue())
