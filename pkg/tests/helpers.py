"""Fixture builders shared by the test modules."""

from __future__ import annotations

import threading
from collections import defaultdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from xml.sax.saxutils import escape


def dep(coord: str, scope: str | None = None, optional: bool = False, exclusions=(), type_: str | None = None) -> str:
    parts = coord.split(":")
    g, a = parts[0], parts[1]
    v = parts[2] if len(parts) > 2 else None
    xml = [f"<dependency><groupId>{escape(g)}</groupId><artifactId>{escape(a)}</artifactId>"]
    if v:
        xml.append(f"<version>{escape(v)}</version>")
    if type_:
        xml.append(f"<type>{type_}</type>")
    if scope:
        xml.append(f"<scope>{scope}</scope>")
    if optional:
        xml.append("<optional>true</optional>")
    if exclusions:
        xml.append("<exclusions>")
        for ex in exclusions:
            eg, ea = ex.split(":")
            xml.append(f"<exclusion><groupId>{eg}</groupId><artifactId>{ea}</artifactId></exclusion>")
        xml.append("</exclusions>")
    xml.append("</dependency>")
    return "".join(xml)


def pom(coord: str, deps=(), parent: str | None = None, properties: dict | None = None,
        managed=(), packaging: str | None = None) -> str:
    """A POM document. ``coord`` may leave group or version empty (``:a:`` style)."""
    g, a, v = (coord.split(":") + ["", ""])[:3]
    out = ['<?xml version="1.0"?>\n<project xmlns="http://maven.apache.org/POM/4.0.0">',
           "<modelVersion>4.0.0</modelVersion>"]
    if parent:
        pg, pa, pv = parent.split(":")
        out.append(f"<parent><groupId>{pg}</groupId><artifactId>{pa}</artifactId><version>{pv}</version></parent>")
    if g:
        out.append(f"<groupId>{g}</groupId>")
    out.append(f"<artifactId>{a}</artifactId>")
    if v:
        out.append(f"<version>{v}</version>")
    if packaging:
        out.append(f"<packaging>{packaging}</packaging>")
    if properties:
        out.append("<properties>" + "".join(f"<{k}>{escape(val)}</{k}>" for k, val in properties.items())
                   + "</properties>")
    if managed:
        out.append("<dependencyManagement><dependencies>" + "".join(managed) + "</dependencies></dependencyManagement>")
    if deps:
        out.append("<dependencies>" + "".join(deps) + "</dependencies>")
    out.append("</project>\n")
    return "\n".join(out)


def write_repo(root: Path, poms: dict[str, str], metadata: dict[str, list[str]] | None = None) -> Path:
    """Lay out ``{"g:a:v": pom_xml}`` in the standard repository directory structure."""
    for coord, xml in poms.items():
        g, a, v = coord.split(":")
        d = root / g.replace(".", "/") / a / v
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{a}-{v}.pom").write_text(xml, encoding="utf-8")
    for ga, versions in (metadata or {}).items():
        g, a = ga.split(":")
        d = root / g.replace(".", "/") / a
        d.mkdir(parents=True, exist_ok=True)
        listing = "".join(f"<version>{v}</version>" for v in versions)
        (d / "maven-metadata.xml").write_text(
            f"<metadata><groupId>{g}</groupId><artifactId>{a}</artifactId>"
            f"<versioning><versions>{listing}</versions></versioning></metadata>",
            encoding="utf-8",
        )
    return root


# A repository in which the stub for com.android.tools:sdk-common:22.9.0
# resolves to exactly 12 nodes, each with its own groupId, so the closure
# holds 12 coordinates and 12 groups. Hand trace (breadth-first, nearest wins):
#
#   stub
#   \- sdk-common                         depth 1
#      +- sdklib                          depth 2
#      |  +- layoutlib-api                depth 3  (its annotations and guava:13.0 lose)
#      |  +- dvlib                        depth 3  (version from the parent's dependencyManagement)
#      |  +- commons-compress             depth 3
#      |  +- httpclient                   depth 3  (commons-codec excluded by sdklib)
#      |  |  \- commons-logging           depth 4
#      |  \- kxml2                        depth 3
#      |     \- xmlpull                   depth 4
#      \- common                          depth 2  (junit is test scope: dropped)
#         +- guava:15.0                   depth 3  (version from a parent property)
#         \- annotations                  depth 3
#
# sdklib's own "common" loses to the depth-2 one; bcprov is optional and dropped.
SDK_COMMON = "com.android.tools:sdk-common:22.9.0"
TOOLS_PARENT = "com.android.tools:tools-parent:22.9.0"
_T = "com.android.tools"


def sdk_common_repo() -> dict[str, str]:
    return {
        TOOLS_PARENT: pom(
            TOOLS_PARENT, packaging="pom",
            properties={"guavaVersion": "15.0"},
            managed=[dep(f"{_T}.dvlib:dvlib:${{project.version}}")],
        ),
        SDK_COMMON: pom(
            ":sdk-common:", parent=TOOLS_PARENT,
            deps=[dep(f"{_T}.sdklib:sdklib:${{project.version}}"),
                  dep(f"{_T}.common:common:${{project.version}}"),
                  dep("junit:junit:4.11", scope="test")],
        ),
        f"{_T}.sdklib:sdklib:22.9.0": pom(
            f"{_T}.sdklib:sdklib:", parent=TOOLS_PARENT,
            deps=[dep(f"{_T}.layoutlib:layoutlib-api:22.9.0"),
                  dep(f"{_T}.dvlib:dvlib"),
                  dep(f"{_T}.common:common:22.9.0"),
                  dep("org.apache.commons:commons-compress:1.8.1"),
                  dep("org.apache.httpcomponents:httpclient:4.1.1", exclusions=["commons-codec:commons-codec"]),
                  dep("net.sf.kxml:kxml2:2.3.0"),
                  dep("org.bouncycastle:bcprov-jdk15on:1.48", optional=True)],
        ),
        f"{_T}.common:common:22.9.0": pom(
            f"{_T}.common:common:", parent=TOOLS_PARENT,
            deps=[dep("com.google.guava:guava:${guavaVersion}"), dep(f"{_T}.annotations:annotations:22.9.0")],
        ),
        f"{_T}.layoutlib:layoutlib-api:22.9.0": pom(
            f"{_T}.layoutlib:layoutlib-api:22.9.0",
            deps=[dep(f"{_T}.annotations:annotations:22.9.0"), dep("com.google.guava:guava:13.0")],
        ),
        f"{_T}.dvlib:dvlib:22.9.0": pom(f"{_T}.dvlib:dvlib:", parent=TOOLS_PARENT),
        f"{_T}.annotations:annotations:22.9.0": pom(f"{_T}.annotations:annotations:", parent=TOOLS_PARENT),
        "org.apache.commons:commons-compress:1.8.1": pom("org.apache.commons:commons-compress:1.8.1"),
        "org.apache.httpcomponents:httpclient:4.1.1": pom(
            "org.apache.httpcomponents:httpclient:4.1.1",
            deps=[dep("commons-logging:commons-logging:1.1.1"), dep("commons-codec:commons-codec:1.4")],
        ),
        "net.sf.kxml:kxml2:2.3.0": pom("net.sf.kxml:kxml2:2.3.0", deps=[dep("xmlpull:xmlpull:1.1.3.1")]),
        "xmlpull:xmlpull:1.1.3.1": pom("xmlpull:xmlpull:1.1.3.1"),
        "commons-logging:commons-logging:1.1.1": pom("commons-logging:commons-logging:1.1.1"),
        "commons-codec:commons-codec:1.4": pom("commons-codec:commons-codec:1.4"),
        "com.google.guava:guava:15.0": pom("com.google.guava:guava:15.0"),
        "com.google.guava:guava:13.0": pom("com.google.guava:guava:13.0"),
        "org.bouncycastle:bcprov-jdk15on:1.48": pom("org.bouncycastle:bcprov-jdk15on:1.48"),
        "junit:junit:4.11": pom("junit:junit:4.11", deps=[dep("org.hamcrest:hamcrest-core:1.3")]),
    }


SDK_COMMON_CLOSURE = {
    "com.android.tools:sdk-common:22.9.0",
    "com.android.tools.sdklib:sdklib:22.9.0",
    "com.android.tools.common:common:22.9.0",
    "com.android.tools.layoutlib:layoutlib-api:22.9.0",
    "com.android.tools.dvlib:dvlib:22.9.0",
    "org.apache.commons:commons-compress:1.8.1",
    "org.apache.httpcomponents:httpclient:4.1.1",
    "net.sf.kxml:kxml2:2.3.0",
    "com.google.guava:guava:15.0",
    "com.android.tools.annotations:annotations:22.9.0",
    "commons-logging:commons-logging:1.1.1",
    "xmlpull:xmlpull:1.1.3.1",
}
SDK_COMMON_GROUPS = {c.split(":")[0] for c in SDK_COMMON_CLOSURE}

SDK_COMMON_TREE_TEXT = """\
org.allowlistforge:stub:pom:1.0
\\- com.android.tools:sdk-common:jar:22.9.0:compile
   +- com.android.tools.sdklib:sdklib:jar:22.9.0:compile
   |  +- com.android.tools.layoutlib:layoutlib-api:jar:22.9.0:compile
   |  +- com.android.tools.dvlib:dvlib:jar:22.9.0:compile
   |  +- org.apache.commons:commons-compress:jar:1.8.1:compile
   |  +- org.apache.httpcomponents:httpclient:jar:4.1.1:compile
   |  |  \\- commons-logging:commons-logging:jar:1.1.1:compile
   |  \\- net.sf.kxml:kxml2:jar:2.3.0:compile
   |     \\- xmlpull:xmlpull:jar:1.1.3.1:compile
   \\- com.android.tools.common:common:jar:22.9.0:compile
      +- com.google.guava:guava:jar:15.0:compile
      \\- com.android.tools.annotations:annotations:jar:22.9.0:compile
"""


# Scripted HTTP fixture server


class FixtureServer:
    """Serves scripted responses; each path has a list of (status, body) replayed in order."""

    def __init__(self) -> None:
        self.routes: dict[str, list[tuple[int, bytes]]] = {}
        self.hits: dict[str, int] = defaultdict(int)
        self.delays: dict[str, float] = {}
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self) -> None:  # noqa: N802
                import time

                path = self.path
                server.hits[path] += 1
                if path in server.delays:
                    time.sleep(server.delays[path])
                script = server.routes.get(path)
                if not script:
                    status, body = 404, b"not found"
                else:
                    idx = min(server.hits[path], len(script)) - 1
                    status, body = script[idx]
                self.send_response(status)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args) -> None:
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, args=(0.02,), daemon=True)

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def route(self, path: str, *responses) -> None:
        script = []
        for r in responses:
            if isinstance(r, tuple):
                status, body = r
            else:
                status, body = 200, r
            script.append((status, body.encode() if isinstance(body, str) else body))
        self.routes[path] = script

    def start(self) -> FixtureServer:
        self.thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


def portal_page(ids, next_href: str | None = None, style: str = "rel") -> str:
    items = "".join(f'<li><a class="plugin" href="/plugin/{i}">{i}</a></li>' for i in ids)
    nav = ""
    if next_href:
        if style == "rel":
            nav = f'<a rel="next" href="{next_href}">&raquo;</a>'
        else:
            nav = f'<a href="{next_href}">Next &raquo;</a>'
    return f"<html><body><ul>{items}</ul><nav>{nav}</nav></body></html>"


# Worker tasks must be importable by child processes.


def instant_task(x: int) -> int:
    return x * x


def sleeping_task(seconds: float) -> str:
    import time

    time.sleep(seconds)
    return "done"


def failing_task() -> None:
    raise RuntimeError("boom")


def crashing_task() -> None:
    import os

    os._exit(3)


# Five-source pipeline corpus. Hand-computed accounting, in merge order:
#
#   source              produced  duplicates  running_total
#   maven                      5           0              5
#   google                     4           1              8   (com.android.tools)
#   transitive                12           3             17   (com.android.tools, com.google.guava,
#                                                              org.apache.commons)
#   os-imports                 4           3             18   (com.android.tools.build,
#                                                              com.squareup.okhttp3, org.apache.commons)
#   gradlePluginPortal         4           1             21   (com.android.tools.build)
#
# refine then drops the six com.android.tools.* names, leaving 15.
PIPELINE_ACCOUNTING = [
    {"source": "maven", "produced": 5, "duplicates": 0, "running_total": 5},
    {"source": "google", "produced": 4, "duplicates": 1, "running_total": 8},
    {"source": "transitive", "produced": 12, "duplicates": 3, "running_total": 17},
    {"source": "os-imports", "produced": 4, "duplicates": 3, "running_total": 18},
    {"source": "gradlePluginPortal", "produced": 4, "duplicates": 1, "running_total": 21},
]
PIPELINE_REMOVED = ["annotations", "build", "common", "dvlib", "layoutlib", "sdklib"]
PIPELINE_REFINED = [
    "androidx.core", "com.android.tools", "com.github.ben-manes.versions", "com.google.android.gms",
    "com.google.guava", "com.squareup.okhttp3", "commons-logging", "io.reactivex.rxjava2",
    "io.spring.dependency-management", "junit", "net.sf.kxml", "org.apache.commons", "org.apache.httpcomponents",
    "org.jetbrains.kotlin.jvm", "xmlpull",
]


def build_pipeline_corpus(root: Path, server: FixtureServer, gradle_src: Path) -> dict:
    """Write the corpus inputs under ``root`` and register the HTTP routes."""
    import shutil

    root.mkdir(parents=True, exist_ok=True)
    index = root / "index-export.txt"
    index.write_text(
        "com.android.tools:sdk-common:22.9.0\n"
        "com.google.guava:guava:15.0\n"
        "com.squareup.okhttp3:okhttp\n"
        "org.apache.commons\n"
        "junit\n"
        "bad group:x:1\n",
        encoding="utf-8",
    )
    repo = write_repo(root / "m2", sdk_common_repo())
    projects = root / "projects"
    shutil.copytree(gradle_src, projects)
    server.route("/google/master-index.xml",
                 "<metadata><androidx.core/><com.android.tools/><com.google.android.gms/>"
                 "<com.android.tools.build/></metadata>")
    server.route("/plugins", portal_page(["org.jetbrains.kotlin.jvm", "com.github.ben-manes.versions"],
                                         "/plugins?page=2"))
    server.route("/plugins?page=2", portal_page(["com.android.tools.build", "io.spring.dependency-management"],
                                                "/plugins?page=3"))
    server.route("/plugins?page=3", portal_page(["org.jetbrains.kotlin.jvm"]))
    return {
        "index_export": str(index),
        "repo_url": str(repo),
        "projects_dir": str(projects),
        "google_url": server.url + "/google",
        "portal_url": server.url + "/plugins",
    }


def stage_calls(corpus: dict) -> list[tuple[str, dict]]:
    return [
        ("mine-maven", {"index_export": corpus["index_export"]}),
        ("crawl-google", {"base_url": corpus["google_url"]}),
        ("resolve-deps", {"coords": None, "repo_url": corpus["repo_url"], "stop_after_stable_batches": None}),
        ("mine-gradle", {"projects_dir": corpus["projects_dir"], "extended": False}),
        ("crawl-portal", {"base_url": corpus["portal_url"], "max_pages": None}),
        ("merge", {}),
        ("refine", {}),
        ("stats", {"top_n": 10, "input": None}),
    ]


def run_all_stages(pipeline, corpus: dict, until: str | None = None) -> list:
    """Run every stage in order, stopping before ``until`` if given."""
    summaries = []
    for name, params in stage_calls(corpus):
        if name == until:
            break
        summaries.append(pipeline.run_stage(name, **params))
    return summaries


FINAL_OUTPUTS = ("merged.txt", "refined.txt", "refine-removed.csv", "stats.json")


def crash_during_refine(workdir: str, corpus: dict, config) -> None:
    """Child-process body: run up to refine, then die right after refine writes its first output."""
    import os

    from allowlistforge.crawl import FetchPolicy
    from allowlistforge.pipeline import stages

    with stages.Pipeline(workdir, policy=FetchPolicy(politeness=0), workers=config) as p:
        run_all_stages(p, corpus, until="refine")
        real = stages.atomic_write_text

        def write_then_die(dest, text):
            real(dest, text)
            os._exit(9)

        stages.atomic_write_text = write_then_die
        p.run_stage("refine")
