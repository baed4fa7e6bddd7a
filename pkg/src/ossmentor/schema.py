"""Action-dimension schema and GitHub event mapping.

The default schema covers six event-derived action dimensions. Both the
schema and the conditioning parent map are configurable; the defaults
encode the usual issue/PR dependency structure (comments and closes
depend on the corresponding open action).
"""

import json

DEFAULT_SCHEMA = [
    "open_issue",
    "issue_comment",
    "close_issue",
    "open_pr",
    "pr_comment",
    "merge_pr",
]

# child dimension -> parent dimension it is conditioned on
DEFAULT_PARENT_MAP = {
    "issue_comment": "open_issue",
    "close_issue": "open_issue",
    "pr_comment": "open_pr",
    "merge_pr": "open_pr",
}

# (event type, payload.action) -> dimension name; None matches any action
_EVENT_MAP = {
    ("IssuesEvent", "opened"): "open_issue",
    ("IssuesEvent", "closed"): "close_issue",
    ("IssueCommentEvent", None): "issue_comment",
    ("PullRequestEvent", "opened"): "open_pr",
    ("PullRequestEvent", "closed"): "merge_pr",
    ("PullRequestReviewCommentEvent", None): "pr_comment",
}


def map_event(event_type: str, payload_action: str | None) -> str | None:
    """Map a GitHub event to its schema dimension, or None if unmapped."""
    dim = _EVENT_MAP.get((event_type, payload_action))
    if dim is None:
        dim = _EVENT_MAP.get((event_type, None))
    return dim


def load_schema(path) -> list[str]:
    """Load a schema file: a JSON list of dimension names."""
    with open(path) as f:
        dims = json.load(f)
    if not isinstance(dims, list) or not all(isinstance(d, str) for d in dims):
        raise ValueError(f"schema file {path} must be a JSON list of strings")
    return dims


def load_parent_map(path) -> dict[str, str]:
    """Load a parent map file: a JSON object of child -> parent names."""
    with open(path) as f:
        parents = json.load(f)
    if not isinstance(parents, dict):
        raise ValueError(f"parent map file {path} must be a JSON object")
    return parents
