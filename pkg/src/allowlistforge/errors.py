"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations


class AllowlistError(Exception):
    """Base class for all errors raised by allowlistforge."""


class MalformedName(AllowlistError, ValueError):
    """A candidate package name failed validation."""

    def __init__(self, text: str, reason: str, line: int | None = None) -> None:
        self.text = text
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"malformed package name {text!r}{where}: {reason}")


class MalformedLine(AllowlistError, ValueError):
    """A line of a line-oriented input could not be parsed."""

    def __init__(self, line: int, text: str, reason: str) -> None:
        self.line = line
        self.text = text
        self.reason = reason
        super().__init__(f"line {line}: {reason}: {text!r}")


class IoFailure(AllowlistError, OSError):
    """Reading or writing a file failed."""


# maven-resolve


class XmlSyntax(AllowlistError):
    """A POM or metadata document is not well-formed XML."""


class MissingMandatory(AllowlistError):
    """A POM lacks a mandatory element such as artifactId."""


class NotFound(AllowlistError):
    """The repository has no document for the requested coordinate."""


class DepthExceeded(AllowlistError):
    """A parent chain or dependency tree exceeded its depth cap."""


class UnresolvedProperty(AllowlistError):
    """A ``${...}`` reference names a property that is not defined."""

    def __init__(self, name: str, where: str = "") -> None:
        self.name = name
        suffix = f" in {where}" if where else ""
        super().__init__(f"unresolved property ${{{name}}}{suffix}")


class UnresolvableVersion(AllowlistError):
    """No concrete version could be determined for a dependency."""


class TimedOut(AllowlistError, TimeoutError):
    """A resolution or task exceeded its deadline."""


class MalformedTreeLine(AllowlistError, ValueError):
    def __init__(self, line: int, text: str, reason: str = "unparseable node") -> None:
        self.line = line
        self.text = text
        super().__init__(f"line {line}: {reason}: {text!r}")


class IndentationJump(MalformedTreeLine):
    def __init__(self, line: int, text: str) -> None:
        super().__init__(line, text, "depth increases by more than one level")


# repo-crawl


class FetchError(AllowlistError):
    def __init__(self, url: str, message: str) -> None:
        self.url = url
        super().__init__(f"{url}: {message}")


class Terminal4xx(FetchError):
    def __init__(self, url: str, status: int) -> None:
        self.status = status
        super().__init__(url, f"HTTP {status}")


class RetriesExhausted(FetchError):
    def __init__(self, url: str, attempts: int, last: str) -> None:
        self.attempts = attempts
        super().__init__(url, f"gave up after {attempts} attempts ({last})")


class FetchTimeout(FetchError, TimeoutError):
    pass


# cli-pipeline


class MissingInput(AllowlistError):
    """A stage was asked to run before its inputs exist."""


class StageFailed(AllowlistError):
    """A stage raised while producing its output."""
