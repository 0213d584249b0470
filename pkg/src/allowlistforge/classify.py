"""Classify fully qualified class names found in an app.

Each FQCN falls in exactly one category, checked in this order:

1. ``InAppPackage``: the package is the app package or nested under it.
2. ``Obfuscated``: the first segment or the class name is a single letter.
3. ``Library``: the package is covered by the allowlist.
4. ``Other``: everything else.

With ``three_way`` reports, ``Library`` is folded into ``Other``.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
from dataclasses import dataclass, field
from typing import Iterable

from . import kernels
from .errors import MalformedName
from .names import AllowList, PackageName, atomic_write_text, parse_package_name

logger = logging.getLogger(__name__)


class Category(str, enum.Enum):
    IN_APP_PACKAGE = "InAppPackage"
    OBFUSCATED = "Obfuscated"
    LIBRARY = "Library"
    OTHER = "Other"


_BY_CODE = {
    kernels.IN_APP: Category.IN_APP_PACKAGE,
    kernels.OBFUSCATED: Category.OBFUSCATED,
    kernels.LIBRARY: Category.LIBRARY,
    kernels.OTHER: Category.OTHER,
}


def _single_letter(text: str) -> bool:
    return len(text) == 1 and ("a" <= text <= "z" or "A" <= text <= "Z")


@dataclass(frozen=True)
class FqcnRecord:
    package_part: PackageName | None
    class_name: str

    def __post_init__(self) -> None:
        if not self.class_name or "." in self.class_name or any(c.isspace() for c in self.class_name):
            raise MalformedName(self.class_name, "bad class name")

    @classmethod
    def parse(cls, text: str) -> FqcnRecord:
        text = text.strip()
        pkg, dot, name = text.rpartition(".")
        if not dot:
            return cls(None, text)
        return cls(parse_package_name(pkg), name)

    def __str__(self) -> str:
        if self.package_part is None:
            return self.class_name
        return f"{self.package_part}.{self.class_name}"


def is_obfuscated(fqcn: FqcnRecord) -> bool:
    first = fqcn.package_part.root() if fqcn.package_part is not None else fqcn.class_name
    return _single_letter(first) or _single_letter(fqcn.class_name)


def classify_fqcn(fqcn: FqcnRecord, app_package: PackageName, allowlist: AllowList) -> Category:
    pkg = fqcn.package_part
    if pkg is not None and app_package.covers(pkg):
        return Category.IN_APP_PACKAGE
    if is_obfuscated(fqcn):
        return Category.OBFUSCATED
    if pkg is not None and kernels.is_covered(str(pkg), allowlist.name_set()):
        return Category.LIBRARY
    return Category.OTHER


@dataclass
class StudyReport:
    counts: dict[Category, int] = field(default_factory=dict)
    total: int = 0
    skipped: int = 0
    three_way: bool = False

    @property
    def categories(self) -> list[Category]:
        if self.three_way:
            return [Category.IN_APP_PACKAGE, Category.OBFUSCATED, Category.OTHER]
        return list(Category)

    @property
    def proportions(self) -> dict[Category, float]:
        if not self.total:
            return {c: 0.0 for c in self.categories}
        return {c: self.counts.get(c, 0) / self.total for c in self.categories}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["category", "count", "proportion"])
        props = self.proportions
        for c in self.categories:
            writer.writerow([c.value, self.counts.get(c, 0), f"{props[c]:.6f}"])
        return buf.getvalue()


def _tally(categories: Iterable[Category], three_way: bool) -> StudyReport:
    report = StudyReport(three_way=three_way)
    report.counts = {c: 0 for c in report.categories}
    for cat in categories:
        if three_way and cat is Category.LIBRARY:
            cat = Category.OTHER
        report.counts[cat] += 1
        report.total += 1
    return report


def study_report(
    records: Iterable[FqcnRecord],
    app_package: PackageName,
    allowlist: AllowList,
    three_way: bool = False,
) -> StudyReport:
    return _tally((classify_fqcn(r, app_package, allowlist) for r in records), three_way)


def classify_lines(
    lines: Iterable[str], app_package: PackageName, allowlist: AllowList
) -> tuple[list[tuple[str, Category]], int]:
    """Batch-classify raw FQCN lines through the kernel.

    Blank lines are ignored. Malformed lines are skipped and counted.
    """
    fqcns = [line.strip() for line in lines if line.strip()]
    codes = kernels.classify_many(fqcns, str(app_package), allowlist.name_set())
    labeled = []
    skipped = 0
    for fqcn, code in zip(fqcns, codes):
        if code == kernels.MALFORMED:
            skipped += 1
            logger.debug("skipping malformed FQCN %r", fqcn)
            continue
        labeled.append((fqcn, _BY_CODE[code]))
    return labeled, skipped


def study_report_from_lines(
    lines: Iterable[str], app_package: PackageName, allowlist: AllowList, three_way: bool = False
) -> tuple[StudyReport, list[tuple[str, Category]]]:
    labeled, skipped = classify_lines(lines, app_package, allowlist)
    report = _tally((cat for _, cat in labeled), three_way)
    report.skipped = skipped
    return report, labeled


def write_labeled_csv(labeled: list[tuple[str, Category]], destination) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fqcn", "category"])
    for fqcn, cat in labeled:
        writer.writerow([fqcn, cat.value])
    atomic_write_text(destination, buf.getvalue())
