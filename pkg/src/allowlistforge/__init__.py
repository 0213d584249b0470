"""Build, refine and apply allowlists of third-party library package names."""

from .classify import Category, FqcnRecord, classify_fqcn, is_obfuscated, study_report
from .kernels import BACKEND
from .names import AllowList, MergeStore, PackageName, merge, parse_package_name, read_allowlist, write_allowlist
from .refine import PrefixTrie, is_covered, refine, refine_with_report
from .stats import StatsReport, compute_stats

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AllowList", "Category", "FqcnRecord", "MergeStore", "PackageName", "PrefixTrie",
    "StatsReport", "classify_fqcn", "compute_stats", "is_covered", "is_obfuscated", "merge",
    "parse_package_name", "read_allowlist", "refine", "refine_with_report", "study_report",
    "write_allowlist",
]
