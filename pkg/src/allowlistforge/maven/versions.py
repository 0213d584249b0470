"""Maven-style version ordering and range selection.

The ordering follows the usual resolver conventions closely enough for
picking the highest version in a range: numeric parts compare numerically,
and qualifiers rank alpha < beta < milestone < rc < snapshot < release < sp.
"""

from __future__ import annotations

import functools
import re
import xml.etree.ElementTree as ET

from ..errors import UnresolvableVersion, XmlSyntax

_QUALIFIERS = {"alpha": 0, "a": 0, "beta": 1, "b": 1, "milestone": 2, "m": 2,
               "rc": 3, "cr": 3, "snapshot": 4, "": 5, "ga": 5, "final": 5, "release": 5, "sp": 6}
_TOKEN = re.compile(r"\d+|[A-Za-z]+")


def _tokens(version: str) -> list[int | str]:
    out: list[int | str] = []
    for tok in _TOKEN.findall(version.lower()):
        out.append(int(tok) if tok.isdigit() else tok)
    while out and out[-1] in (0, "", "ga", "final", "release"):
        out.pop()
    return out


def _item_rank(item: int | str) -> tuple[int, int, str]:
    if isinstance(item, int):
        return (2, item, "")
    q = _QUALIFIERS.get(item)
    if q is None:
        return (1, 2, item)
    if q < 5:
        return (0, q, "")
    return (1, 0 if q == 5 else 1, "")


def compare_versions(a: str, b: str) -> int:
    ta, tb = _tokens(a), _tokens(b)
    for i in range(max(len(ta), len(tb))):
        x = ta[i] if i < len(ta) else None
        y = tb[i] if i < len(tb) else None
        # Padding is 0 beside a number and a plain release beside a qualifier.
        if x is None:
            x = 0 if isinstance(y, int) else ""
        if y is None:
            y = 0 if isinstance(x, int) else ""
        rx, ry = _item_rank(x), _item_rank(y)
        if rx != ry:
            return (rx > ry) - (rx < ry)
    return 0


version_key = functools.cmp_to_key(compare_versions)


def is_range(spec: str) -> bool:
    return spec[:1] in "[(" and spec[-1:] in "])"


def _parse_ranges(spec: str) -> list[tuple[str | None, bool, str | None, bool]]:
    ranges = []
    for m in re.finditer(r"([\[(])([^\[\]()]*)([\])])", spec):
        lo_inc, body, hi_inc = m.group(1) == "[", m.group(2), m.group(3) == "]"
        if "," in body:
            lo, hi = (s.strip() or None for s in body.split(",", 1))
        else:
            lo = hi = body.strip()
        ranges.append((lo, lo_inc, hi, hi_inc))
    if not ranges:
        raise UnresolvableVersion(f"unparseable version range {spec!r}")
    return ranges


def in_range(version: str, spec: str) -> bool:
    for lo, lo_inc, hi, hi_inc in _parse_ranges(spec):
        if lo is not None:
            c = compare_versions(version, lo)
            if c < 0 or (c == 0 and not lo_inc):
                continue
        if hi is not None:
            c = compare_versions(version, hi)
            if c > 0 or (c == 0 and not hi_inc):
                continue
        return True
    return False


def parse_metadata_versions(document: str | bytes) -> list[str]:
    """Versions listed in a ``maven-metadata.xml`` document."""
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise XmlSyntax(str(exc)) from exc
    versions = []
    for listing in root.iter():
        if not isinstance(listing.tag, str) or listing.tag.rsplit("}", 1)[-1] != "versions":
            continue
        for elem in listing:
            text = (elem.text or "").strip()
            if text and text not in versions:
                versions.append(text)
    return versions


def select_from_range(spec: str, available: list[str]) -> str:
    """Highest listed version satisfying ``spec``."""
    matching = [v for v in available if in_range(v, spec)]
    if not matching:
        raise UnresolvableVersion(f"no listed version satisfies {spec!r}")
    return max(matching, key=version_key)
