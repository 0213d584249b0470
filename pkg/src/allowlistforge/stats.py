"""Root and field statistics over an allowlist.

Field occurrences are counted per position, so ``com.a.com`` contributes two
occurrences of ``com`` to the with-roots table and one to the without-roots
table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import kernels
from .names import AllowList, atomic_write_text


def top_n(counts: dict[str, int], n: int) -> list[tuple[str, int]]:
    """Highest counts first; ties broken by ascending name."""
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]


@dataclass
class StatsReport:
    roots_histogram: dict[str, int] = field(default_factory=dict)
    fields_histogram: dict[int, int] = field(default_factory=dict)
    field_occurrences_with_roots: dict[str, int] = field(default_factory=dict)
    field_occurrences_without_roots: dict[str, int] = field(default_factory=dict)
    total: int = 0
    top: int = 10

    @property
    def unique_roots(self) -> int:
        return len(self.roots_histogram)

    def top_roots(self, n: int | None = None) -> list[tuple[str, int]]:
        return top_n(self.roots_histogram, self.top if n is None else n)

    def top_fields(self, n: int | None = None) -> list[tuple[str, int]]:
        return top_n(self.field_occurrences_with_roots, self.top if n is None else n)

    def top_fields_without_roots(self, n: int | None = None) -> list[tuple[str, int]]:
        return top_n(self.field_occurrences_without_roots, self.top if n is None else n)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "unique_roots": self.unique_roots,
            "fields_histogram": {str(k): v for k, v in sorted(self.fields_histogram.items())},
            "roots_histogram": dict(sorted(self.roots_histogram.items())),
            "field_occurrences_with_roots": dict(sorted(self.field_occurrences_with_roots.items())),
            "field_occurrences_without_roots": dict(sorted(self.field_occurrences_without_roots.items())),
            "top_n": self.top,
            "top_roots": [[k, v] for k, v in self.top_roots()],
            "top_fields": [[k, v] for k, v in self.top_fields()],
            "top_fields_without_roots": [[k, v] for k, v in self.top_fields_without_roots()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> StatsReport:
        return cls(
            roots_histogram=dict(data["roots_histogram"]),
            fields_histogram={int(k): v for k, v in data["fields_histogram"].items()},
            field_occurrences_with_roots=dict(data["field_occurrences_with_roots"]),
            field_occurrences_without_roots=dict(data["field_occurrences_without_roots"]),
            total=data["total"],
            top=data.get("top_n", 10),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def compute_stats(allowlist: AllowList, top: int = 10) -> StatsReport:
    roots, hist, with_roots, without_roots = kernels.field_stats(allowlist.names())
    return StatsReport(
        roots_histogram=roots,
        fields_histogram=hist,
        field_occurrences_with_roots=with_roots,
        field_occurrences_without_roots=without_roots,
        total=len(allowlist),
        top=top,
    )


def write_stats(report: StatsReport, destination) -> None:
    atomic_write_text(destination, report.to_json())
