"""HTTP acquisition: cached fetch with retries, and the two registry crawls.

Cache layout: one file per URL in ``cache_dir``, named by the SHA-256 hex
digest of the exact URL string plus ``.body``. Entries never expire; pass
``--clear-cache`` (or call :func:`clear_cache`) to drop them.
"""

from __future__ import annotations

import hashlib
import html
import logging
import os
import re
import threading
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import parse_qsl, urlencode, urljoin, urlsplit, urlunsplit

import requests

from .errors import FetchError, FetchTimeout, MalformedName, RetriesExhausted, Terminal4xx, XmlSyntax
from .names import PackageName, parse_package_name

logger = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "allowlistforge/0.1 (+library allowlist builder)"


@dataclass(frozen=True)
class FetchPolicy:
    max_retries: int = 3
    backoff_base: float = 1.0
    cache_dir: Path | None = None
    timeout: float = 30.0
    user_agent: str = DEFAULT_USER_AGENT
    politeness: float = 0.2

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.cache_dir is not None and not isinstance(self.cache_dir, Path):
            object.__setattr__(self, "cache_dir", Path(self.cache_dir))


@dataclass
class CrawlResult:
    names: set[PackageName] = field(default_factory=set)
    pages_fetched: int = 0
    cache_hits: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)


_key_locks: dict[str, threading.Lock] = {}
_key_locks_guard = threading.Lock()


def _lock_for(key: str) -> threading.Lock:
    with _key_locks_guard:
        return _key_locks.setdefault(key, threading.Lock())


def cache_path(cache_dir: Path, url: str) -> Path:
    return cache_dir / (hashlib.sha256(url.encode("utf-8")).hexdigest() + ".body")


def clear_cache(cache_dir: str | os.PathLike[str]) -> int:
    removed = 0
    for path in Path(cache_dir).glob("*.body"):
        path.unlink()
        removed += 1
    return removed


def _store(path: Path, body: bytes) -> None:
    with _lock_for(str(path)):
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(f".{path.name}.{os.getpid()}.{threading.get_ident()}.tmp")
        tmp.write_bytes(body)
        os.replace(tmp, path)


def fetch_with_info(url: str, policy: FetchPolicy, session: requests.Session | None = None) -> tuple[bytes, bool]:
    """Like :func:`fetch` but also reports whether the cache answered."""
    scheme = urlsplit(url).scheme
    if scheme not in ("http", "https"):
        raise ValueError(f"not an http(s) url: {url!r}")
    cached = cache_path(policy.cache_dir, url) if policy.cache_dir is not None else None
    if cached is not None and cached.is_file():
        return cached.read_bytes(), True

    get = session.get if session is not None else requests.get
    attempt = 0
    while True:
        timed_out = False
        try:
            resp = get(url, timeout=policy.timeout, headers={"User-Agent": policy.user_agent})
        except requests.Timeout as exc:
            timed_out = True
            last = f"timeout: {exc}"
        except requests.RequestException as exc:
            last = f"transport error: {exc}"
        else:
            status = resp.status_code
            if 200 <= status < 300:
                body = resp.content
                if cached is not None:
                    _store(cached, body)
                return body, False
            if 400 <= status < 500:
                raise Terminal4xx(url, status)
            last = f"HTTP {status}"
        if attempt >= policy.max_retries:
            if timed_out:
                raise FetchTimeout(url, f"timed out after {attempt + 1} attempts")
            raise RetriesExhausted(url, attempt + 1, last)
        delay = policy.backoff_base * (2 ** attempt)
        logger.info("retrying %s in %.2fs (%s)", url, delay, last)
        time.sleep(delay)
        attempt += 1


def fetch(url: str, policy: FetchPolicy, session: requests.Session | None = None) -> bytes:
    """GET ``url``; 5xx and transport errors are retried with doubling backoff.

    Successful bodies are cached by exact URL when ``policy.cache_dir`` is
    set. 4xx responses raise :class:`Terminal4xx` without retrying.
    """
    return fetch_with_info(url, policy, session)[0]


def _add_name(result: CrawlResult, text: str, where: str) -> None:
    try:
        result.names.add(parse_package_name(text))
    except MalformedName as exc:
        result.failures.append((where, f"malformed name {text!r}: {exc.reason}"))


def crawl_google_index(base_url: str, policy: FetchPolicy) -> CrawlResult:
    """Collect group ids from ``<base_url>/master-index.xml``.

    Fetch errors for the index itself propagate; malformed group entries are
    recorded in ``failures``.
    """
    url = base_url.rstrip("/") + "/master-index.xml"
    body, hit = fetch_with_info(url, policy)
    try:
        root = ET.fromstring(body)
    except ET.ParseError as exc:
        raise XmlSyntax(f"{url}: {exc}") from exc
    result = CrawlResult(pages_fetched=1, cache_hits=int(hit))
    for elem in root:
        if isinstance(elem.tag, str):
            _add_name(result, elem.tag.rsplit("}", 1)[-1], url)
    return result


_PLUGIN_HREF = re.compile(r"""href\s*=\s*["'](?:https?://[^/"']+)?/plugin/([^"'/?#]+)""", re.I)
_TAG = re.compile(r"<(a|link)\b([^>]*)>", re.I)
_ANCHOR = re.compile(r"<a\b([^>]*)>(.*?)</a\s*>", re.I | re.S)
_ATTR = re.compile(r"""([\w-]+)\s*=\s*(?:"([^"]*)"|'([^']*)')""")
_STRIP_TAGS = re.compile(r"<[^>]+>")


def _attrs(text: str) -> dict[str, str]:
    return {m.group(1).lower(): html.unescape(m.group(2) if m.group(2) is not None else m.group(3))
            for m in _ATTR.finditer(text)}


def plugin_ids(page: str) -> list[str]:
    """Plugin ids linked as ``/plugin/<id>`` on a listing page, first-seen order."""
    seen: dict[str, None] = {}
    for m in _PLUGIN_HREF.finditer(page):
        seen.setdefault(html.unescape(m.group(1)), None)
    return list(seen)


def next_page_link(page: str, page_url: str) -> str | None:
    """Target of a ``rel="next"`` link, or else of an anchor whose text starts with "Next"."""
    for m in _TAG.finditer(page):
        attrs = _attrs(m.group(2))
        if "next" in attrs.get("rel", "").lower().split() and attrs.get("href"):
            return urljoin(page_url, attrs["href"])
    for m in _ANCHOR.finditer(page):
        label = html.unescape(_STRIP_TAGS.sub("", m.group(2))).strip().lower()
        href = _attrs(m.group(1)).get("href")
        if href and label.startswith("next"):
            return urljoin(page_url, href)
    return None


def _guess_following_page(url: str) -> str | None:
    parts = urlsplit(url)
    query = parse_qsl(parts.query, keep_blank_values=True)
    for i, (k, v) in enumerate(query):
        if k == "page" and v.isdigit():
            query[i] = (k, str(int(v) + 1))
            return urlunsplit(parts._replace(query=urlencode(query)))
    return None


MAX_CONSECUTIVE_FAILURES = 3


def crawl_gradle_plugin_portal(base_url: str, policy: FetchPolicy, max_pages: int | None = None) -> CrawlResult:
    """Follow the portal's listing pages and collect plugin ids.

    Stops on a page without a next link, on a page listing no plugins, or
    after ``max_pages`` pages. A failed page is recorded and skipped when the
    following page can be derived from a ``page=N`` query parameter; three
    failures in a row abort the crawl.
    """
    result = CrawlResult()
    url: str | None = base_url
    attempts = 0
    consecutive = 0
    while url is not None and (max_pages is None or attempts < max_pages):
        if attempts and policy.politeness > 0:
            time.sleep(policy.politeness)
        attempts += 1
        try:
            body, hit = fetch_with_info(url, policy)
        except (FetchError, requests.RequestException) as exc:
            result.failures.append((url, str(exc)))
            consecutive += 1
            if consecutive >= MAX_CONSECUTIVE_FAILURES:
                logger.error("aborting portal crawl after %d consecutive failures", consecutive)
                break
            url = _guess_following_page(url)
            continue
        consecutive = 0
        result.pages_fetched += 1
        result.cache_hits += int(hit)
        page = body.decode("utf-8", errors="replace")
        ids = plugin_ids(page)
        if not ids:
            break
        for plugin_id in ids:
            _add_name(result, plugin_id, url)
        url = next_page_link(page, url)
    return result
