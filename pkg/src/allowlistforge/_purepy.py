"""Pure-Python kernels. Same contract as the compiled ``_speedups`` module."""

from __future__ import annotations

IN_APP = 0
OBFUSCATED = 1
LIBRARY = 2
OTHER = 3
MALFORMED = -1

_SEGMENT_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")
_LETTERS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")


def _segments_key(name: str) -> list[str]:
    return name.split(".")


def prune_covered(names):
    """Drop every name covered by a shorter name at a segment boundary.

    Returns ``(kept, removed)`` where ``removed`` pairs each dropped name with
    the kept name covering it. Sorting by segment lists makes every covered
    name follow its cover with only other covered names in between, so one
    linear scan suffices.
    """
    kept = []
    removed = []
    last = None
    last_dot = None
    for name in sorted(set(names), key=_segments_key):
        if last is not None and name.startswith(last_dot):
            removed.append((name, last))
        else:
            kept.append(name)
            last = name
            last_dot = name + "."
    return kept, removed


def is_covered(name, entries):
    if name in entries:
        return True
    pos = name.find(".")
    while pos != -1:
        if name[:pos] in entries:
            return True
        pos = name.find(".", pos + 1)
    return False


def covered_mask(names, entries):
    return [is_covered(n, entries) for n in names]


def _valid_package(pkg):
    if not pkg:
        return False
    for seg in pkg.split("."):
        if not seg:
            return False
        for ch in seg:
            if ch not in _SEGMENT_CHARS:
                return False
    return True


def classify_one(fqcn, app_package, entries):
    fqcn = fqcn.strip()
    if not fqcn:
        return MALFORMED
    dot = fqcn.rfind(".")
    if dot == -1:
        pkg = ""
        cls = fqcn
    else:
        pkg = fqcn[:dot]
        cls = fqcn[dot + 1:]
        if not _valid_package(pkg):
            return MALFORMED
    if not cls or any(ch.isspace() for ch in cls):
        return MALFORMED
    if pkg and (pkg == app_package or pkg.startswith(app_package + ".")):
        return IN_APP
    first_dot = fqcn.find(".")
    first = fqcn if first_dot == -1 else fqcn[:first_dot]
    if (len(first) == 1 and first in _LETTERS) or (len(cls) == 1 and cls in _LETTERS):
        return OBFUSCATED
    if pkg and is_covered(pkg, entries):
        return LIBRARY
    return OTHER


def classify_many(fqcns, app_package, entries):
    return [classify_one(f, app_package, entries) for f in fqcns]


def field_stats(names):
    """Return ``(roots, fields_histogram, with_roots, without_roots)`` count dicts."""
    roots = {}
    hist = {}
    with_roots = {}
    without_roots = {}
    for name in names:
        segs = name.split(".")
        n = len(segs)
        hist[n] = hist.get(n, 0) + 1
        root = segs[0]
        roots[root] = roots.get(root, 0) + 1
        with_roots[root] = with_roots.get(root, 0) + 1
        for seg in segs[1:]:
            with_roots[seg] = with_roots.get(seg, 0) + 1
            without_roots[seg] = without_roots.get(seg, 0) + 1
    return roots, hist, with_roots, without_roots
