"""GitHub event ingestion and monthly aggregation.

Takes newline-delimited JSON in the GitHub-Archive field layout and turns
it into per-contributor monthly action-count trajectories. The dataset
JSON file written by :func:`save_dataset` is the contract consumed by the
weighting, environment, and evaluation layers.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .schema import map_event


@dataclass
class RawEvent:
    event_type: str  # schema dimension name the event maps to
    actor_login: str
    repo_name: str
    timestamp: datetime
    detail: str | None = None


@dataclass
class MonthlyTrajectory:
    contributor_id: str
    month_indices: np.ndarray  # (T,) strictly increasing ints
    counts: np.ndarray  # (T, m) non-negative ints
    cumulative: np.ndarray | None = None  # (T,) filled by annotate_trajectory

    @property
    def n_months(self) -> int:
        return len(self.month_indices)

    def total_events(self) -> int:
        return int(self.counts.sum())


@dataclass
class ProjectDataset:
    project: str
    schema: list[str]
    trajectories: list[MonthlyTrajectory]


@dataclass
class ContributorPool:
    """Trajectories of a project's top contributors (the expert data)."""

    schema: list[str]
    trajectories: list[MonthlyTrajectory]


@dataclass
class ParseResult:
    events: list[RawEvent] = field(default_factory=list)
    skipped_malformed: int = 0
    skipped_unmapped: int = 0


def _parse_timestamp(raw: str) -> datetime:
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_events(stream, schema: list[str]) -> ParseResult:
    """Parse an NDJSON stream of GitHub-Archive records.

    Accepts an iterable of lines (str or bytes). Records that fail to parse
    or do not map to a schema dimension are counted and skipped; a bad line
    never aborts the stream.
    """
    result = ParseResult()
    dims = set(schema)
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            event_type = rec["type"]
            actor = rec["actor"]
            actor_login = actor["login"] if isinstance(actor, dict) else str(actor)
            repo = rec.get("repo", {})
            repo_name = repo["name"] if isinstance(repo, dict) else str(repo)
            timestamp = _parse_timestamp(rec["created_at"])
            action = rec.get("payload", {}).get("action")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            result.skipped_malformed += 1
            continue
        dim = map_event(event_type, action)
        if dim is None or dim not in dims:
            result.skipped_unmapped += 1
            continue
        result.events.append(
            RawEvent(
                event_type=dim,
                actor_login=actor_login,
                repo_name=repo_name,
                timestamp=timestamp,
                detail=action,
            )
        )
    return result


def open_event_file(path):
    """Open a plain or gzipped NDJSON file as a text line iterator."""
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def aggregate_monthly(events: list[RawEvent], project: str, schema: list[str]) -> ProjectDataset:
    """Aggregate events into per-contributor monthly action vectors.

    Months are UTC calendar months. Month indices are contributor-relative
    (0 is the contributor's first active month) and gap months between the
    first and last active month appear as zero vectors.
    """
    m = len(schema)
    dim_index = {name: j for j, name in enumerate(schema)}
    # actor -> month ordinal (year*12 + month) -> counts
    per_actor: dict[str, dict[int, np.ndarray]] = {}
    for ev in events:
        ordinal = ev.timestamp.year * 12 + (ev.timestamp.month - 1)
        months = per_actor.setdefault(ev.actor_login, {})
        vec = months.get(ordinal)
        if vec is None:
            vec = np.zeros(m, dtype=np.int64)
            months[ordinal] = vec
        vec[dim_index[ev.event_type]] += 1

    trajectories = []
    for actor in sorted(per_actor):
        months = per_actor[actor]
        first, last = min(months), max(months)
        span = last - first + 1
        counts = np.zeros((span, m), dtype=np.int64)
        for ordinal, vec in months.items():
            counts[ordinal - first] = vec
        trajectories.append(
            MonthlyTrajectory(
                contributor_id=actor,
                month_indices=np.arange(span, dtype=np.int64),
                counts=counts,
            )
        )
    return ProjectDataset(project=project, schema=list(schema), trajectories=trajectories)


def top_contributors(dataset: ProjectDataset, n: int) -> ContributorPool:
    """Select the n trajectories with the largest total event count.

    Ties break toward the lexicographically smaller contributor_id; if the
    dataset holds fewer than n trajectories, all are returned.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not dataset.trajectories:
        raise ValueError(f"dataset {dataset.project!r} has no contributors")
    ranked = sorted(
        dataset.trajectories, key=lambda t: (-t.total_events(), t.contributor_id)
    )
    return ContributorPool(schema=list(dataset.schema), trajectories=ranked[:n])


def dataset_to_dict(dataset: ProjectDataset) -> dict:
    return {
        "project": dataset.project,
        "schema": dataset.schema,
        "trajectories": [
            {
                "contributor_id": t.contributor_id,
                "months": [
                    {"index": int(i), "counts": [int(c) for c in row]}
                    for i, row in zip(t.month_indices, t.counts)
                ],
            }
            for t in dataset.trajectories
        ],
    }


def dataset_from_dict(data: dict) -> ProjectDataset:
    m = len(data["schema"])
    trajectories = []
    for t in data["trajectories"]:
        indices = np.array([mo["index"] for mo in t["months"]], dtype=np.int64)
        counts = np.array([mo["counts"] for mo in t["months"]], dtype=np.int64)
        counts = counts.reshape(len(indices), m)
        trajectories.append(
            MonthlyTrajectory(
                contributor_id=t["contributor_id"],
                month_indices=indices,
                counts=counts,
            )
        )
    return ProjectDataset(
        project=data["project"], schema=list(data["schema"]), trajectories=trajectories
    )


def save_dataset(dataset: ProjectDataset, path) -> None:
    with open(path, "w") as f:
        json.dump(dataset_to_dict(dataset), f)


def load_dataset(path) -> ProjectDataset:
    with open(path) as f:
        return dataset_from_dict(json.load(f))
