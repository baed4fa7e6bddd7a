"""Hourly GitHub-Archive download helper.

Downloads gzip NDJSON archive files for a date span. Idempotent: a file
already present with the expected size (when the server reports one) is
skipped. Per-file failures are collected in the report instead of
aborting the whole span.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import requests

ARCHIVE_URL = "https://data.gharchive.org/{stamp}.json.gz"


@dataclass
class FetchReport:
    paths: list[Path] = field(default_factory=list)
    downloaded: list[Path] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)


def hour_stamps(start: date, end: date) -> list[str]:
    """Hourly archive stamps (YYYY-MM-DD-H) for days start..end inclusive."""
    if end < start:
        raise ValueError(f"end {end} before start {start}")
    stamps = []
    day = start
    while day <= end:
        for hour in range(24):
            stamps.append(f"{day.isoformat()}-{hour}")
        day += timedelta(days=1)
    return stamps


def _download(url: str, dest: Path) -> None:
    resp = requests.get(url, stream=True, timeout=60)
    resp.raise_for_status()
    tmp = dest.with_suffix(dest.suffix + ".part")
    with open(tmp, "wb") as f:
        for chunk in resp.iter_content(chunk_size=1 << 16):
            f.write(chunk)
    tmp.rename(dest)


def _remote_size(url: str) -> int | None:
    try:
        resp = requests.head(url, timeout=30)
        resp.raise_for_status()
        size = resp.headers.get("Content-Length")
        return int(size) if size is not None else None
    except requests.RequestException:
        return None


def fetch_archive(start: date, end: date, dest_dir, downloader=_download,
                  size_probe=_remote_size) -> FetchReport:
    """Fetch hourly archives for the span into dest_dir.

    downloader and size_probe are injectable for testing.
    """
    dest_dir = Path(dest_dir)
    dest_dir.mkdir(parents=True, exist_ok=True)
    report = FetchReport()
    for stamp in hour_stamps(start, end):
        url = ARCHIVE_URL.format(stamp=stamp)
        path = dest_dir / f"{stamp}.json.gz"
        if path.exists() and path.stat().st_size > 0:
            expected = size_probe(url)
            if expected is None or path.stat().st_size == expected:
                report.paths.append(path)
                continue
        try:
            downloader(url, path)
        except Exception as exc:
            report.errors[stamp] = str(exc)
            continue
        report.paths.append(path)
        report.downloaded.append(path)
    return report
