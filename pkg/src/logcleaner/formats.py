"""Versioned header handling shared by every on-disk artifact."""

from __future__ import annotations

from typing import Iterable, Iterator, TextIO

VERSION = "v1"
KINDS = ("templates", "events", "groups", "model", "metrics", "trace",
         "categories", "scores", "reduced", "stats", "config")


class ArtifactError(ValueError):
    """Raised when an artifact file is malformed or has the wrong kind/version."""


def header(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown artifact kind {kind!r}")
    return f"#logcleaner-{kind} {VERSION}"


def parse_header(line: str) -> tuple[str, str]:
    line = line.rstrip("\n")
    if not line.startswith("#logcleaner-"):
        raise ArtifactError(f"missing #logcleaner header: {line[:60]!r}")
    try:
        tag, version = line[len("#logcleaner-"):].split(" ", 1)
    except ValueError:
        raise ArtifactError(f"malformed header: {line!r}") from None
    return tag, version.strip()


def check_header(line: str, kind: str) -> None:
    tag, version = parse_header(line)
    if tag != kind:
        raise ArtifactError(f"expected a {kind} artifact, found {tag}")
    if version != VERSION:
        raise ArtifactError(f"unsupported {kind} version {version} (want {VERSION})")


def read_kind(path) -> tuple[str, str]:
    """Peek at the header of *path* and return (kind, version)."""
    with open(path, encoding="utf-8") as fh:
        return parse_header(fh.readline())


def open_artifact(path, kind: str) -> Iterator[str]:
    """Yield the body lines of an artifact after validating its header."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first:
            raise ArtifactError(f"{path}: empty file")
        check_header(first, kind)
        for line in fh:
            yield line.rstrip("\n")


def write_lines(fh: TextIO, kind: str, lines: Iterable[str]) -> None:
    fh.write(header(kind) + "\n")
    for line in lines:
        fh.write(line + "\n")
