"""Command-line entry point: ``allowlistforge <stage> [options]``.

Exit codes: 0 on success, 1 when a stage fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import kernels
from .crawl import FetchPolicy, clear_cache
from .errors import AllowlistError
from .pipeline.stages import Pipeline, StageSummary
from .pipeline.workers import DEFAULT_TASK_DEADLINE, WorkerConfig

logger = logging.getLogger("allowlistforge")

DEFAULT_WORKDIR = "allowlistforge-work"


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--journal-dir", default=DEFAULT_WORKDIR,
                        help="work directory holding the journal and stage outputs")
    common.add_argument("--cache-dir", default=None, help="HTTP cache directory")
    common.add_argument("--clear-cache", action="store_true", help="empty the HTTP cache before running")
    common.add_argument("--force", action="store_true", help="re-run stages even if already completed")
    common.add_argument("--verbose", "-v", action="store_true")
    common.add_argument("--timeout-secs", type=_positive_float, default=DEFAULT_TASK_DEADLINE,
                        help="per-request and per-task deadline (default: 30)")
    common.add_argument("--retries", type=_nonneg_int, default=3, help="HTTP retries on 5xx/transport errors")
    common.add_argument("--politeness-ms", type=_nonneg_int, default=200,
                        help="delay between paginated requests")
    common.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1,
                        help="parallel resolution tasks (default: processor count)")

    parser = argparse.ArgumentParser(
        prog="allowlistforge",
        description="Build, refine and apply allowlists of third-party library package names.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({kernels.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("mine-maven", parents=[common], help="groups from a repository index export")
    p.add_argument("--index-export", required=True, metavar="FILE")

    p = sub.add_parser("resolve-deps", parents=[common], help="transitive dependency groups")
    p.add_argument("--coords", metavar="FILE", help="group:artifact:version lines (default: mine-maven output)")
    p.add_argument("--repo-url", required=True, metavar="URL", help="repository base URL or local directory")
    p.add_argument("--stop-after-stable-batches", type=_positive_int, default=None, metavar="N",
                   help="stop once N consecutive batches add no new groups")

    p = sub.add_parser("crawl-google", parents=[common], help="groups from the Google Maven master index")
    p.add_argument("--base-url", required=True, metavar="URL")

    p = sub.add_parser("crawl-portal", parents=[common], help="plugin ids from the Gradle Plugin Portal")
    p.add_argument("--base-url", required=True, metavar="URL")
    p.add_argument("--max-pages", type=_positive_int, default=None, metavar="N")

    p = sub.add_parser("mine-gradle", parents=[common], help="dependencies from checked-out projects")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--projects-dir", metavar="DIR")
    src.add_argument("--source-list", metavar="FILE", help="app_id,source_url listing to turn into a clone plan")
    p.add_argument("--extended-configurations", action="store_true",
                   help="also accept api, testImplementation, annotationProcessor and kapt")

    sub.add_parser("merge", parents=[common], help="union of all source stage outputs")
    sub.add_parser("refine", parents=[common], help="drop names covered by a shorter entry")

    p = sub.add_parser("stats", parents=[common], help="root and field statistics")
    p.add_argument("--top-n", type=_positive_int, default=10, metavar="N")
    p.add_argument("--input", metavar="FILE", help="allowlist to describe (default: refine output)")

    p = sub.add_parser("classify", parents=[common], help="categorise an app's class names")
    p.add_argument("--fqcns", required=True, metavar="FILE")
    p.add_argument("--app-package", required=True, metavar="PKG")
    p.add_argument("--allowlist", required=True, metavar="FILE")
    p.add_argument("--three-way", action="store_true", help="fold Library into Other")
    p.add_argument("--labeled", action="store_true", help="also write a per-record labeled CSV")

    p = sub.add_parser("run", parents=[common], help="run every stage whose inputs are given, then merge/refine/stats")
    p.add_argument("--index-export", metavar="FILE")
    p.add_argument("--google-url", metavar="URL")
    p.add_argument("--repo-url", metavar="URL")
    p.add_argument("--coords", metavar="FILE")
    p.add_argument("--projects-dir", metavar="DIR")
    p.add_argument("--portal-url", metavar="URL")
    p.add_argument("--max-pages", type=_positive_int, default=None, metavar="N")
    p.add_argument("--top-n", type=_positive_int, default=10, metavar="N")
    p.add_argument("--stop-after-stable-batches", type=_positive_int, default=None, metavar="N")
    return parser


def _stage_calls(args: argparse.Namespace) -> list[tuple[str, dict]]:
    cmd = args.command
    if cmd == "mine-maven":
        return [("mine-maven", {"index_export": args.index_export})]
    if cmd == "resolve-deps":
        return [("resolve-deps", {"coords": args.coords, "repo_url": args.repo_url,
                                  "stop_after_stable_batches": args.stop_after_stable_batches})]
    if cmd == "crawl-google":
        return [("crawl-google", {"base_url": args.base_url})]
    if cmd == "crawl-portal":
        return [("crawl-portal", {"base_url": args.base_url, "max_pages": args.max_pages})]
    if cmd == "mine-gradle":
        if args.source_list:
            return [("clone-plan", {"source_list": args.source_list})]
        return [("mine-gradle", {"projects_dir": args.projects_dir, "extended": args.extended_configurations})]
    if cmd in ("merge", "refine"):
        return [(cmd, {})]
    if cmd == "stats":
        return [("stats", {"top_n": args.top_n, "input": args.input})]
    if cmd == "classify":
        return [("classify", {"fqcns": args.fqcns, "app_package": args.app_package, "allowlist": args.allowlist,
                              "three_way": args.three_way, "labeled": args.labeled})]
    calls: list[tuple[str, dict]] = []
    if args.index_export:
        calls.append(("mine-maven", {"index_export": args.index_export}))
    if args.google_url:
        calls.append(("crawl-google", {"base_url": args.google_url}))
    if args.repo_url:
        calls.append(("resolve-deps", {"coords": args.coords, "repo_url": args.repo_url,
                                       "stop_after_stable_batches": args.stop_after_stable_batches}))
    if args.projects_dir:
        calls.append(("mine-gradle", {"projects_dir": args.projects_dir, "extended": False}))
    if args.portal_url:
        calls.append(("crawl-portal", {"base_url": args.portal_url, "max_pages": args.max_pages}))
    calls += [("merge", {}), ("refine", {}), ("stats", {"top_n": args.top_n, "input": None})]
    return calls


def _print_summary(summary: StageSummary) -> None:
    print(summary.line())
    for step in summary.accounting:
        print(f"  {step['source']:<20} +{step['produced']:<8} -{step['duplicates']:<8} -> {step['running_total']}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.clear_cache and args.cache_dir:
        logger.info("cleared %d cached responses", clear_cache(args.cache_dir))
    policy = FetchPolicy(
        max_retries=args.retries,
        timeout=args.timeout_secs,
        cache_dir=args.cache_dir,
        politeness=args.politeness_ms / 1000.0,
    )
    workers = WorkerConfig(jobs=args.jobs, task_deadline=args.timeout_secs)
    try:
        with Pipeline(args.journal_dir, force=args.force, policy=policy, workers=workers) as pipeline:
            for name, params in _stage_calls(args):
                _print_summary(pipeline.run_stage(name, **params))
    except AllowlistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
