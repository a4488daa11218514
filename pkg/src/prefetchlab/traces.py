"""Core domain types: requests, per-user traces, and repetition statistics.

Request identity throughout the library is exact byte equality of the full
URL string (query string included). Nothing is canonicalized: no percent
decoding, no query-parameter reordering, no public-suffix reduction. Two
requests are "the same" iff their ``url_key`` strings compare equal.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field


class InvalidURLError(ValueError):
    """Raised for URLs the library refuses to work with (currently: empty)."""


def parse_domain(url_key: str) -> str:
    """Extract the lowercased host component of a URL.

    If the URL carries a scheme ("http://..."), the host is everything
    between the scheme separator and the first '/', '?' or '#'. Without a
    scheme, the leading token up to the first such delimiter is taken as
    the host. Userinfo and ports are kept as-is (opaque bytes), so the
    function is idempotent: parse_domain(parse_domain(u)) == parse_domain(u).
    """
    if not url_key:
        raise InvalidURLError("empty url_key")
    rest = url_key
    sep = url_key.find("://")
    if sep != -1:
        rest = url_key[sep + 3:]
    for delim in ("/", "?", "#"):
        cut = rest.find(delim)
        if cut != -1:
            rest = rest[:cut]
    return rest.lower()


@dataclass(frozen=True)
class Request:
    """One HTTP GET record.

    ``domain`` is derived from ``url_key`` via :func:`parse_domain`; use
    :meth:`build` unless you already have a consistent value in hand.
    """

    user_id: str
    timestamp: int  # milliseconds since epoch
    url_key: str    # full URL including query string
    domain: str

    @classmethod
    def build(cls, user_id: str, timestamp: int, url_key: str) -> "Request":
        return cls(user_id, timestamp, url_key, parse_domain(url_key))


@dataclass(frozen=True)
class UserTrace:
    """Time-ordered request sequence for one user; the unit of model building."""

    user_id: str
    requests: tuple[Request, ...]

    @classmethod
    def build(cls, user_id: str, requests: list[Request] | tuple[Request, ...]) -> "UserTrace":
        """Sort requests by timestamp (stable: input order breaks ties)."""
        for r in requests:
            if r.user_id != user_id:
                raise ValueError(f"request user_id {r.user_id!r} does not match trace {user_id!r}")
        ordered = sorted(requests, key=lambda r: r.timestamp)
        return cls(user_id, tuple(ordered))

    def __len__(self) -> int:
        return len(self.requests)

    @property
    def url_keys(self) -> list[str]:
        return [r.url_key for r in self.requests]


@dataclass(frozen=True)
class RepetitionStats:
    """Counts of repeated requests within a single trace.

    A request counts as repeated when its url_key occurs at least twice in
    the trace; every occurrence of such a key contributes to
    ``repeated_count``. ``unique_count`` is the number of distinct url_keys.
    """

    unique_count: int
    repeated_count: int
    repeated_pct: float
    occurrence_histogram: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "unique_count": self.unique_count,
            "repeated_count": self.repeated_count,
            "repeated_pct": self.repeated_pct,
            "occurrence_histogram": dict(sorted(self.occurrence_histogram.items())),
        }


def repetition_stats(trace: UserTrace) -> RepetitionStats:
    """Compute repeated-request counts for one user trace.

    Order-insensitive; an empty trace yields all-zero stats.
    """
    counts = Counter(r.url_key for r in trace.requests)
    total = len(trace.requests)
    histogram = {key: n for key, n in counts.items() if n >= 2}
    repeated = sum(histogram.values())
    return RepetitionStats(
        unique_count=len(counts),
        repeated_count=repeated,
        repeated_pct=(repeated / total) if total else 0.0,
        occurrence_histogram=histogram,
    )
