import json
import multiprocessing as mp

import pytest
from helpers import (
    FINAL_OUTPUTS,
    PIPELINE_ACCOUNTING,
    PIPELINE_REFINED,
    PIPELINE_REMOVED,
    build_pipeline_corpus,
    crash_during_refine,
    run_all_stages,
)

from allowlistforge.crawl import FetchPolicy
from allowlistforge.errors import MissingInput, StageFailed
from allowlistforge.pipeline import Pipeline, PipelineLocked
from allowlistforge.pipeline.journal import Journal
from allowlistforge.pipeline.workers import WorkerConfig

WORKERS = WorkerConfig(jobs=2, task_deadline=20)
POLICY = FetchPolicy(politeness=0, backoff_base=0.01)


@pytest.fixture
def corpus(tmp_path, server, data_dir):
    return build_pipeline_corpus(tmp_path / "inputs", server, data_dir / "gradle_projects")


def pipeline(workdir, **kw):
    return Pipeline(workdir, policy=POLICY, workers=WORKERS, **kw)


def test_full_run_accounting(tmp_path, corpus):
    work = tmp_path / "work"
    with pipeline(work) as p:
        summaries = run_all_stages(p, corpus)
    by_stage = {s.stage: s for s in summaries}
    assert [by_stage[s].produced for s in ("mine-maven", "crawl-google", "resolve-deps", "mine-gradle",
                                            "crawl-portal")] == [5, 4, 12, 4, 4]
    assert by_stage["mine-maven"].failures == 1  # the malformed index line
    merge = by_stage["merge"]
    assert merge.accounting == PIPELINE_ACCOUNTING
    assert merge.running_total == 21
    prev = 0
    for step in merge.accounting:
        assert step["running_total"] == prev + step["produced"] - step["duplicates"]
        prev = step["running_total"]
    assert (work / "refined.txt").read_text().splitlines() == PIPELINE_REFINED
    assert by_stage["refine"].duplicates == 6
    assert (work / "refine-removed.csv").read_text().splitlines()[1:] == [
        f"com.android.tools.{n},com.android.tools" for n in PIPELINE_REMOVED]
    stats = json.loads((work / "stats.json").read_text())
    assert stats["total"] == 15
    assert (work / "maven-coords.txt").read_text().splitlines() == [
        "com.android.tools:sdk-common:22.9.0", "com.google.guava:guava:15.0"]
    assert (work / "gradle-repositories.txt").read_text().splitlines() == ["https://jitpack.io", "jcenter()"]

    # the journal's latest merge record carries the same accounting
    latest = Journal(work).latest()
    assert latest["merge"].accounting == PIPELINE_ACCOUNTING
    assert all(r.completed for r in latest.values())


def test_second_run_is_cached(tmp_path, corpus, server):
    work = tmp_path / "work"
    with pipeline(work) as p:
        run_all_stages(p, corpus)
    hits = dict(server.hits)
    with pipeline(work) as p:
        again = run_all_stages(p, corpus)
    assert all(s.cached for s in again)
    assert dict(server.hits) == hits


def test_force_and_input_change_cascade(tmp_path, corpus):
    work = tmp_path / "work"
    with pipeline(work) as p:
        run_all_stages(p, corpus)
    with pipeline(work, force=True) as p:
        assert not p.run_stage("mine-maven", index_export=corpus["index_export"]).cached
    with pipeline(work) as p:
        # same content, so downstream digests still match
        assert p.run_stage("merge").cached
    with open(corpus["index_export"], "a") as fh:
        fh.write("net.extra\n")
    with pipeline(work) as p:
        s = p.run_stage("mine-maven", index_export=corpus["index_export"])
        assert not s.cached and s.produced == 6
        merged = p.run_stage("merge")
        assert not merged.cached and merged.running_total == 22
        assert not p.run_stage("refine").cached


def test_deleted_output_triggers_rerun(tmp_path, corpus):
    work = tmp_path / "work"
    with pipeline(work) as p:
        run_all_stages(p, corpus)
    (work / "stats.json").unlink()
    with pipeline(work) as p:
        assert not p.run_stage("stats", top_n=10, input=None).cached


def test_crash_resume_byte_identical(tmp_path, corpus):
    clean = tmp_path / "clean"
    with pipeline(clean) as p:
        run_all_stages(p, corpus)

    crashed = tmp_path / "crashed"
    child = mp.get_context("fork").Process(target=crash_during_refine, args=(str(crashed), corpus, WORKERS))
    child.start()
    child.join(60)
    assert child.exitcode == 9
    latest = Journal(crashed).latest()
    assert latest["merge"].completed and not latest["refine"].completed

    with pipeline(crashed) as p:
        resumed = run_all_stages(p, corpus)
    cached = {s.stage: s.cached for s in resumed}
    assert all(cached[s] for s in ("mine-maven", "crawl-google", "resolve-deps", "mine-gradle", "crawl-portal",
                                   "merge"))
    assert not cached["refine"] and not cached["stats"]
    for name in FINAL_OUTPUTS:
        assert (crashed / name).read_bytes() == (clean / name).read_bytes(), name


def test_lock_excludes_second_pipeline(tmp_path):
    with pipeline(tmp_path):
        with pytest.raises(PipelineLocked):
            with pipeline(tmp_path):
                pass


def test_missing_inputs(tmp_path):
    with pipeline(tmp_path) as p:
        with pytest.raises(MissingInput):
            p.run_stage("merge")
        with pytest.raises(MissingInput):
            p.run_stage("refine")
        with pytest.raises(ValueError):
            p.run_stage("no-such-stage")


def test_stage_failure_is_wrapped(tmp_path, server):
    server.route("/master-index.xml", "<broken")
    with pipeline(tmp_path) as p:
        with pytest.raises(StageFailed):
            p.run_stage("crawl-google", base_url=server.url)
    assert not Journal(tmp_path).latest()["crawl-google"].completed


def test_resolve_failures_are_recorded(tmp_path, corpus):
    coords = tmp_path / "coords.txt"
    coords.write_text("com.android.tools:sdk-common:22.9.0\nno.such:artifact:1.0\njust-a-group\ng:a\n")
    with pipeline(tmp_path / "work") as p:
        s = p.run_stage("resolve-deps", coords=str(coords), repo_url=corpus["repo_url"])
    assert s.produced == 12
    rows = (tmp_path / "work" / "resolve-failures.csv").read_text().splitlines()
    assert rows[0] == "source,reason"
    assert len(rows) - 1 == s.failures == 3


def test_stop_after_stable_batches(tmp_path):
    from helpers import pom, write_repo

    # jobs=1 gives batches of 4: [a.one:x:*] adds a.one, [a.one:y:*] adds nothing, z.last is never reached.
    listed = [f"a.one:{a}:{v}" for a in "xy" for v in range(1, 5)] + ["z.last:x:1"]
    repo = write_repo(tmp_path / "m2", {c: pom(c) for c in listed})
    coords = tmp_path / "coords.txt"
    coords.write_text("".join(c + "\n" for c in listed))
    with Pipeline(tmp_path / "w", policy=POLICY, workers=WorkerConfig(jobs=1)) as p:
        early = p.run_stage("resolve-deps", coords=str(coords), repo_url=str(repo), stop_after_stable_batches=1)
        full = p.run_stage("resolve-deps", coords=str(coords), repo_url=str(repo), stop_after_stable_batches=None)
    assert early.produced == 1
    assert full.produced == 2


def test_classify_stage(tmp_path, data_dir):
    import csv

    fqcns = tmp_path / "fqcns.txt"
    with open(data_dir / "fqcn_labeled.csv", newline="") as fh:
        fqcns.write_text("".join(r["fqcn"] + "\n" for r in csv.DictReader(fh)) + "bad..x.Y\n")
    with pipeline(tmp_path / "w") as p:
        s = p.run_stage("classify", fqcns=str(fqcns), app_package="org.example",
                        allowlist=str(data_dir / "fqcn_labeled_allowlist.txt"), three_way=False, labeled=True)
    assert (s.produced, s.failures) == (100, 1)
    assert (tmp_path / "w" / "classify-report.csv").read_text().splitlines()[1:] == [
        "InAppPackage,25,0.250000", "Obfuscated,25,0.250000", "Library,25,0.250000", "Other,25,0.250000"]
    assert len((tmp_path / "w" / "classify-labeled.csv").read_text().splitlines()) == 101


def test_clone_plan_stage(tmp_path):
    listing = tmp_path / "sources.csv"
    listing.write_text("app_id,source_url\norg.a,https://github.com/a/a\nbroken\n")
    with pipeline(tmp_path / "w") as p:
        s = p.run_stage("clone-plan", source_list=str(listing))
    assert (s.produced, s.failures) == (1, 1)
