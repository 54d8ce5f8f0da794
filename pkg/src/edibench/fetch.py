"""Download a list of image URLs into a directory, skipping files already present."""
from __future__ import annotations

import logging
import os
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

__all__ = ["FetchReport", "FetchError", "parse_manifest", "fetch_dataset"]


class FetchError(RuntimeError):
    """Every listed file failed to download."""


@dataclass
class FetchReport:
    downloaded: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    failed: list = field(default_factory=list)  # (url, reason)


def parse_manifest(path) -> list[tuple[str, str]]:
    """``(url, filename)`` pairs; one URL per line, optional second column names the file."""
    entries = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        url = parts[0]
        name = parts[1] if len(parts) > 1 else os.path.basename(urllib.parse.urlparse(url).path)
        if not name:
            raise ValueError(f"{path}: cannot derive a file name from {url!r}")
        entries.append((url, name))
    return entries


def _download(url: str, target: Path, timeout: float) -> None:
    tmp = target.with_name(target.name + ".part")
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            declared = resp.headers.get("Content-Length")
            body = resp.read()
        if declared is not None and len(body) != int(declared):
            raise OSError(f"received {len(body)} bytes, server declared {declared}")
        tmp.write_bytes(body)
        os.replace(tmp, target)
    finally:
        if tmp.exists():
            tmp.unlink()


def fetch_dataset(manifest, dest, *, timeout: float = 60.0) -> FetchReport:
    """Fetch every manifest entry into ``dest``.

    Existing files are left alone without touching the network.  Failures are
    logged and collected; only a run where every attempted download failed
    raises :class:`FetchError`.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    report = FetchReport()
    for url, name in parse_manifest(manifest):
        target = dest / name
        if target.exists():
            report.skipped.append(name)
            continue
        try:
            _download(url, target, timeout)
        except (OSError, urllib.error.URLError, ValueError) as exc:
            log.warning("failed to fetch %s: %s", url, exc)
            report.failed.append((url, str(exc)))
            continue
        report.downloaded.append(name)
    if report.failed and not report.downloaded and not report.skipped:
        raise FetchError(f"all {len(report.failed)} download(s) failed; first: {report.failed[0][1]}")
    return report
