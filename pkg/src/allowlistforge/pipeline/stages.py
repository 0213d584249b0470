"""Pipeline stages, journaled and resumable.

All stage outputs live in one work directory next to the journal. A stage
is skipped when the journal shows it completed with the same input digest
(stage parameters plus the content of its input files) and its outputs are
still present. Because upstream outputs feed downstream digests, re-running
an upstream stage with ``force`` invalidates everything that depends on it.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import filelock

from ..classify import study_report_from_lines
from ..crawl import FetchPolicy, crawl_google_index, crawl_gradle_plugin_portal
from ..errors import AllowlistError, MalformedLine, MissingInput, StageFailed
from ..gradle import build_clone_plan, dependency_report_csv, mine_projects
from ..maven.coords import MavenCoordinate
from ..maven.index import parse_index_export
from ..names import AllowList, MergeStore, PackageName, atomic_write_text, parse_package_name, \
    read_allowlist, serialize_allowlist
from ..refine import refine_with_report
from ..stats import compute_stats
from .journal import Journal, StageRecord, now_iso
from .workers import Task, WorkerConfig, run_parallel

logger = logging.getLogger(__name__)

# Merge order follows the order sources are added to the list.
SOURCES = (
    ("maven", "mine-maven", "maven.txt"),
    ("google", "crawl-google", "google.txt"),
    ("transitive", "resolve-deps", "transitive.txt"),
    ("os-imports", "mine-gradle", "os-imports.txt"),
    ("gradlePluginPortal", "crawl-portal", "portal.txt"),
)
STAGE_ORDER = ("mine-maven", "crawl-google", "resolve-deps", "mine-gradle", "clone-plan",
               "crawl-portal", "merge", "refine", "stats", "classify")


class PipelineLocked(AllowlistError):
    """Another pipeline process holds the work directory."""


@dataclass
class StageOutcome:
    outputs: dict[str, str]
    produced: int = 0
    duplicates: int = 0
    failures: int = 0
    running_total: int | None = None
    accounting: list[dict] = field(default_factory=list)


@dataclass
class StageSummary:
    stage: str
    outputs: list[str]
    produced: int
    duplicates: int
    failures: int
    cached: bool
    running_total: int | None = None
    accounting: list[dict] = field(default_factory=list)

    def line(self) -> str:
        text = f"{self.stage}: produced={self.produced} duplicates={self.duplicates} failures={self.failures}"
        if self.running_total is not None:
            text += f" running_total={self.running_total}"
        return text + (" [cached]" if self.cached else "")


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _names_text(names) -> str:
    return serialize_allowlist(AllowList(tuple(names)))


def _failures_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "reason"])
    writer.writerows(rows)
    return buf.getvalue()


# Resolution task (runs inside worker processes)

_REPO_CACHE: dict[tuple, Any] = {}


def _repository(repo: str, cache_dir: str | None, timeout: float, retries: int):
    from ..maven.repository import CachedRepository, HttpRepository, LocalRepository

    key = (repo, cache_dir, timeout, retries)
    if key not in _REPO_CACHE:
        if repo.startswith(("http://", "https://")):
            policy = FetchPolicy(max_retries=retries, timeout=timeout, cache_dir=cache_dir)
            base = HttpRepository(repo, policy)
        else:
            base = LocalRepository(repo)
        _REPO_CACHE[key] = CachedRepository(base)
    return _REPO_CACHE[key]


def resolve_groups(coord: str, repo: str, cache_dir: str | None, deadline: float, retries: int = 3) -> list[str]:
    """Groups in the transitive closure of ``coord``; picklable task entry point."""
    from ..maven.tree import collect_transitive, resolve_library

    tree = resolve_library(MavenCoordinate.parse(coord), _repository(repo, cache_dir, deadline, retries), deadline)
    return sorted(str(g) for g in collect_transitive(tree))


# Stage implementations: each returns its required input paths and a runner.


def _require(params: dict, key: str) -> Any:
    if params.get(key) in (None, ""):
        raise MissingInput(f"missing required parameter {key!r}")
    return params[key]


def _mine_maven(p: Pipeline, params: dict) -> StageOutcome:
    errors: list[MalformedLine] = []
    with open(params["index_export"], encoding="utf-8") as fh:
        coords = parse_index_export(fh, errors)
    groups = {parse_package_name(c.group) for c in coords}
    versioned = sorted(str(c) for c in coords if c.is_complete)
    return StageOutcome(
        outputs={
            "maven.txt": _names_text(groups),
            "maven-coords.txt": "".join(f"{c}\n" for c in versioned),
        },
        produced=len(groups),
        duplicates=len(coords) - len(groups),
        failures=len(errors),
    )


def _crawl_google(p: Pipeline, params: dict) -> StageOutcome:
    result = crawl_google_index(_require(params, "base_url"), p.policy)
    return StageOutcome(
        outputs={"google.txt": _names_text(result.names), "google-failures.csv": _failures_csv(result.failures)},
        produced=len(result.names),
        failures=len(result.failures),
    )


def _crawl_portal(p: Pipeline, params: dict) -> StageOutcome:
    result = crawl_gradle_plugin_portal(_require(params, "base_url"), p.policy, params.get("max_pages"))
    return StageOutcome(
        outputs={"portal.txt": _names_text(result.names), "portal-failures.csv": _failures_csv(result.failures)},
        produced=len(result.names),
        failures=len(result.failures),
    )


def _resolve_deps(p: Pipeline, params: dict) -> StageOutcome:
    repo = _require(params, "repo_url")
    coords = []
    skipped = []
    with open(params["coords"], encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                c = MavenCoordinate.parse(line)
            except ValueError as exc:
                skipped.append((f"line {lineno}", f"Malformed: {exc}"))
                continue
            if not c.is_complete:
                skipped.append((str(c), "Unversioned: no version to resolve"))
                continue
            coords.append(str(c))
    coords = sorted(set(coords))
    deadline = p.workers.task_deadline
    cache_dir = str(p.policy.cache_dir) if p.policy.cache_dir else None
    store = MergeStore()
    reported = 0

    def collect(key: str, groups: list[str]) -> None:
        nonlocal reported
        reported += len(groups)
        store.submit(groups)

    failures = list(skipped)
    stable_limit = params.get("stop_after_stable_batches")
    batch_size = max(1, p.workers.jobs * 4) if stable_limit else max(1, len(coords))
    stable = 0
    for start in range(0, len(coords), batch_size):
        batch = coords[start:start + batch_size]
        before = len(store)
        outcome = run_parallel(
            (Task(c, resolve_groups, (c, repo, cache_dir, deadline, p.policy.max_retries)) for c in batch),
            p.workers,
            on_result=collect,
        )
        failures.extend((f.key, f"{f.kind}: {f.message}") for f in outcome.failures)
        if stable_limit:
            stable = stable + 1 if len(store) == before else 0
            if stable >= stable_limit:
                logger.info("no new groups for %d batches; stopping early", stable)
                break
    names = store.snapshot()
    return StageOutcome(
        outputs={"transitive.txt": serialize_allowlist(names), "resolve-failures.csv": _failures_csv(failures)},
        produced=len(names),
        duplicates=reported - len(names),
        failures=len(failures),
    )


def _project_dirs(projects_dir: Path) -> list[Path]:
    children = sorted(d for d in projects_dir.iterdir() if d.is_dir() and not d.name.startswith("."))
    return children or [projects_dir]


def _mine_gradle(p: Pipeline, params: dict) -> StageOutcome:
    projects_dir = Path(_require(params, "projects_dir"))
    if not projects_dir.is_dir():
        raise MissingInput(f"projects directory {projects_dir} does not exist")
    result = mine_projects(_project_dirs(projects_dir), extended=bool(params.get("extended")))
    repos = sorted(str(r) for r in result.repositories)
    return StageOutcome(
        outputs={
            "os-imports.txt": _names_text(result.names),
            "gradle-repositories.txt": "".join(f"{r}\n" for r in repos),
            "gradle-dependencies.csv": dependency_report_csv(result.dependencies),
        },
        produced=len(result.names),
        duplicates=len(result.dependencies) - len(result.names),
        failures=len(result.errors),
    )


def _clone_plan(p: Pipeline, params: dict) -> StageOutcome:
    with open(params["source_list"], encoding="utf-8", newline="") as fh:
        plan = build_clone_plan(fh)
    return StageOutcome(
        outputs={"clone-plan.csv": plan.to_csv()},
        produced=len(plan.entries),
        failures=plan.malformed,
    )


def _merge(p: Pipeline, params: dict) -> StageOutcome:
    running: set[PackageName] = set()
    accounting = []
    total = 0
    for source, _, filename in SOURCES:
        path = p.workdir / filename
        if not path.exists():
            continue
        names = set(read_allowlist(path))
        duplicates = len(names & running)
        running |= names
        total = total + len(names) - duplicates
        accounting.append({"source": source, "produced": len(names), "duplicates": duplicates,
                           "running_total": total})
    merged = AllowList(tuple(running))
    return StageOutcome(
        outputs={"merged.txt": serialize_allowlist(merged)},
        produced=sum(a["produced"] for a in accounting),
        duplicates=sum(a["duplicates"] for a in accounting),
        running_total=len(merged),
        accounting=accounting,
    )


def _refine(p: Pipeline, params: dict) -> StageOutcome:
    source = read_allowlist(p.workdir / "merged.txt")
    result = refine_with_report(source)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["removed_name", "covering_name"])
    writer.writerows((str(r), str(c)) for r, c in result.removed)
    return StageOutcome(
        outputs={"refined.txt": serialize_allowlist(result.allowlist), "refine-removed.csv": buf.getvalue()},
        produced=len(result.allowlist),
        duplicates=result.removed_count,
        running_total=len(result.allowlist),
    )


def _stats_input(p: Pipeline, params: dict) -> Path:
    return Path(params["input"]) if params.get("input") else p.workdir / "refined.txt"


def _stats(p: Pipeline, params: dict) -> StageOutcome:
    report = compute_stats(read_allowlist(_stats_input(p, params)), params.get("top_n") or 10)
    return StageOutcome(outputs={"stats.json": report.to_json()}, produced=report.total)


def _classify(p: Pipeline, params: dict) -> StageOutcome:
    allowlist = read_allowlist(params["allowlist"])
    app = parse_package_name(_require(params, "app_package"))
    with open(params["fqcns"], encoding="utf-8") as fh:
        report, labeled = study_report_from_lines(fh, app, allowlist, bool(params.get("three_way")))
    outputs = {"classify-report.csv": report.to_csv()}
    if params.get("labeled"):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["fqcn", "category"])
        writer.writerows((f, c.value) for f, c in labeled)
        outputs["classify-labeled.csv"] = buf.getvalue()
    return StageOutcome(outputs=outputs, produced=report.total, failures=report.skipped)


@dataclass(frozen=True)
class _Stage:
    inputs: Callable[[Pipeline, dict], list[Path]]
    run: Callable[[Pipeline, dict], StageOutcome]


def _param_paths(*keys: str) -> Callable[[Pipeline, dict], list[Path]]:
    def inputs(p: Pipeline, params: dict) -> list[Path]:
        return [Path(_require(params, k)) for k in keys]
    return inputs


def _workdir_paths(*names: str) -> Callable[[Pipeline, dict], list[Path]]:
    def inputs(p: Pipeline, params: dict) -> list[Path]:
        return [p.workdir / n for n in names]
    return inputs


def _merge_inputs(p: Pipeline, params: dict) -> list[Path]:
    present = [p.workdir / f for _, _, f in SOURCES if (p.workdir / f).exists()]
    if not present:
        raise MissingInput("merge needs at least one source stage output")
    return present


def _resolve_inputs(p: Pipeline, params: dict) -> list[Path]:
    if not params.get("coords"):
        params["coords"] = str(p.workdir / "maven-coords.txt")
    return [Path(params["coords"])]


STAGES: dict[str, _Stage] = {
    "mine-maven": _Stage(_param_paths("index_export"), _mine_maven),
    "crawl-google": _Stage(lambda p, params: [], _crawl_google),
    "resolve-deps": _Stage(_resolve_inputs, _resolve_deps),
    "mine-gradle": _Stage(lambda p, params: [], _mine_gradle),
    "clone-plan": _Stage(_param_paths("source_list"), _clone_plan),
    "crawl-portal": _Stage(lambda p, params: [], _crawl_portal),
    "merge": _Stage(_merge_inputs, _merge),
    "refine": _Stage(_workdir_paths("merged.txt"), _refine),
    "stats": _Stage(lambda p, params: [_stats_input(p, params)], _stats),
    "classify": _Stage(_param_paths("fqcns", "allowlist"), _classify),
}


def _tree_digest(root: Path) -> str:
    """Digest of every build file under a projects directory."""
    from ..gradle import scan_project

    h = hashlib.sha256()
    for path in scan_project(root):
        h.update(str(path.relative_to(root)).encode())
        h.update(_sha256_file(path).encode())
    return h.hexdigest()


class Pipeline:
    """Runs stages inside one work directory, guarded by a lock file."""

    def __init__(
        self,
        workdir: str | os.PathLike[str],
        *,
        force: bool = False,
        policy: FetchPolicy | None = None,
        workers: WorkerConfig | None = None,
    ) -> None:
        self.workdir = Path(workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)
        self.force = force
        self.policy = policy or FetchPolicy()
        self.workers = workers or WorkerConfig()
        self.journal = Journal(self.workdir)
        self._lock = filelock.FileLock(str(self.workdir / ".lock"))

    def __enter__(self) -> Pipeline:
        try:
            self._lock.acquire(timeout=0)
        except filelock.Timeout:
            raise PipelineLocked(f"another pipeline is running in {self.workdir}") from None
        return self

    def __exit__(self, *exc) -> None:
        self._lock.release()

    def _digest(self, name: str, params: dict, inputs: list[Path]) -> str:
        h = hashlib.sha256()
        h.update(name.encode())
        h.update(json.dumps(params, sort_keys=True, default=str).encode())
        for path in inputs:
            h.update(path.name.encode())
            h.update(_sha256_file(path).encode())
        if name == "mine-gradle" and params.get("projects_dir"):
            h.update(_tree_digest(Path(params["projects_dir"])).encode())
        return h.hexdigest()

    def run_stage(self, name: str, **params: Any) -> StageSummary:
        if name not in STAGES:
            raise ValueError(f"unknown stage {name!r}")
        stage = STAGES[name]
        params = {k: (str(v) if isinstance(v, os.PathLike) else v) for k, v in params.items()}
        inputs = stage.inputs(self, params)
        missing = [str(p) for p in inputs if not p.exists()]
        if missing:
            raise MissingInput(f"{name}: missing input(s): {', '.join(missing)}")
        digest = self._digest(name, params, inputs)

        previous = self.journal.latest().get(name)
        if (
            not self.force
            and previous is not None
            and previous.completed
            and previous.inputs_digest == digest
            and all((self.workdir / o).exists() for o in previous.outputs)
        ):
            logger.info("%s already completed; skipping", name)
            return StageSummary(name, [str(self.workdir / o) for o in previous.outputs], previous.produced,
                                previous.duplicates, previous.failures, True, previous.running_total,
                                previous.accounting)

        record = StageRecord(stage=name, inputs_digest=digest, started=now_iso())
        self.journal.append(record)
        try:
            outcome = stage.run(self, params)
        except AllowlistError as exc:
            raise StageFailed(f"{name}: {exc}") from exc
        except OSError as exc:
            raise StageFailed(f"{name}: {exc}") from exc
        for filename, text in outcome.outputs.items():
            atomic_write_text(self.workdir / filename, text)

        record.outputs = sorted(outcome.outputs)
        record.produced = outcome.produced
        record.duplicates = outcome.duplicates
        record.failures = outcome.failures
        record.running_total = outcome.running_total
        record.accounting = outcome.accounting
        record.finished = now_iso()
        record.completed = True
        self.journal.append(record)
        return StageSummary(name, [str(self.workdir / o) for o in record.outputs], outcome.produced,
                            outcome.duplicates, outcome.failures, False, outcome.running_total,
                            outcome.accounting)
