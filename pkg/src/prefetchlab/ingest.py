"""Raw request-log parsing, GET filtering, and outlier-user removal.

Input formats (declared, not sniffed):

* csv   — header ``user_id,timestamp_ms,method,url``, UTF-8, RFC-4180 quoting
* jsonl — one object per line with the same four fields

Rows with a non-GET method are dropped (counted, not an error). Malformed
rows are a per-row error carrying the line number; in the default lenient
mode they are skipped and counted, in strict mode the first one aborts.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .traces import Request, UserTrace

FORMATS = ("csv", "jsonl")
CSV_HEADER = ["user_id", "timestamp_ms", "method", "url"]

# retained in LoadSummary for human inspection; the full count is always exact
MAX_RECORDED_ERRORS = 20


class LogParseError(ValueError):
    """A malformed input row. ``line_no`` is 1-based (header included for CSV)."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class RawLogRecord:
    user_id: str
    timestamp_ms: int
    method: str  # normalized uppercase
    url: str


@dataclass
class LoadSummary:
    rows_read: int = 0
    kept: int = 0
    dropped_non_get: int = 0
    skipped_malformed: int = 0
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "kept": self.kept,
            "dropped_non_get": self.dropped_non_get,
            "skipped_malformed": self.skipped_malformed,
            "errors": list(self.errors),
        }


@dataclass
class OutlierReport:
    """Tukey fences over per-user request counts plus the removal list.

    Only the upper fence triggers removal; the low end is handled by the
    ``min_request_floor``. A negative lower fence is recorded as-is.
    """

    q1: float
    q3: float
    iqr: float
    lower_fence: float
    upper_fence: float
    removed_users: list[str]
    min_request_floor: int

    def to_dict(self) -> dict:
        return {
            "q1": self.q1,
            "q3": self.q3,
            "iqr": self.iqr,
            "lower_fence": self.lower_fence,
            "upper_fence": self.upper_fence,
            "removed_users": list(self.removed_users),
            "min_request_floor": self.min_request_floor,
        }


def filter_get(records: Iterable[RawLogRecord]) -> list[RawLogRecord]:
    """Keep only GET records, order preserved. Methods are already uppercased."""
    return [r for r in records if r.method == "GET"]


def _parse_csv_row(line_no: int, row: list[str]) -> RawLogRecord:
    if len(row) != 4:
        raise LogParseError(line_no, f"expected 4 fields, got {len(row)}")
    user_id, ts_raw, method, url = (f.strip() for f in row)
    return _build_record(line_no, user_id, ts_raw, method, url)


def _parse_jsonl_row(line_no: int, line: str) -> RawLogRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogParseError(line_no, f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise LogParseError(line_no, "row is not a JSON object")
    missing = [k for k in CSV_HEADER if k not in obj]
    if missing:
        raise LogParseError(line_no, f"missing fields: {', '.join(missing)}")
    return _build_record(line_no, str(obj["user_id"]), obj["timestamp_ms"], str(obj["method"]), str(obj["url"]))


def _build_record(line_no: int, user_id: str, ts_raw, method: str, url: str) -> RawLogRecord:
    if not user_id:
        raise LogParseError(line_no, "empty user_id")
    try:
        timestamp = int(ts_raw)
    except (TypeError, ValueError):
        raise LogParseError(line_no, f"timestamp_ms is not an integer: {ts_raw!r}") from None
    if not url:
        raise LogParseError(line_no, "empty url")
    return RawLogRecord(user_id, timestamp, method.upper(), url)


def iter_log_records(path: str | Path, fmt: str = "csv", strict: bool = False,
                     summary: LoadSummary | None = None) -> Iterable[RawLogRecord]:
    """Yield parsed records from a log file, applying the lenient/strict policy."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")
    summary = summary if summary is not None else LoadSummary()
    path = Path(path)

    def handle(exc: LogParseError):
        if strict:
            raise exc
        summary.skipped_malformed += 1
        if len(summary.errors) < MAX_RECORDED_ERRORS:
            summary.errors.append(str(exc))

    with path.open(newline="", encoding="utf-8") as fh:
        if fmt == "csv":
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise LogParseError(1, "empty file")
            if [h.strip() for h in header] != CSV_HEADER:
                raise LogParseError(1, f"bad header {header!r}, expected {CSV_HEADER}")
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                summary.rows_read += 1
                try:
                    yield _parse_csv_row(line_no, row)
                except LogParseError as exc:
                    handle(exc)
        else:
            any_line = False
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                any_line = True
                summary.rows_read += 1
                try:
                    yield _parse_jsonl_row(line_no, line)
                except LogParseError as exc:
                    handle(exc)
            if not any_line and summary.rows_read == 0:
                raise LogParseError(1, "empty file")


def load_traces(path: str | Path, fmt: str = "csv", strict: bool = False,
                ) -> tuple[dict[str, UserTrace], LoadSummary]:
    """Parse a log file into one time-ordered UserTrace per user.

    Non-GET records are dropped and counted. Requests are sorted by
    timestamp with input order preserved among ties, so concatenating the
    returned traces reproduces exactly the GET subset of the input.
    """
    summary = LoadSummary()
    per_user: dict[str, list[Request]] = defaultdict(list)
    for record in iter_log_records(path, fmt=fmt, strict=strict, summary=summary):
        if record.method != "GET":
            summary.dropped_non_get += 1
            continue
        summary.kept += 1
        per_user[record.user_id].append(
            Request.build(record.user_id, record.timestamp_ms, record.url))
    traces = {uid: UserTrace.build(uid, reqs) for uid, reqs in per_user.items()}
    return traces, summary


def remove_outlier_users(traces: dict[str, UserTrace], min_requests: int = 10,
                         ) -> tuple[dict[str, UserTrace], OutlierReport]:
    """Drop users above the Tukey upper fence or below the request floor.

    Quartiles use linear interpolation between order statistics (numpy's
    default percentile rule), so fixtures are exactly reproducible. Removal
    is strict: count > upper fence, or count < min_requests.
    """
    if not traces:
        raise ValueError("remove_outlier_users requires at least one trace")
    counts = {uid: len(t.requests) for uid, t in traces.items()}
    values = np.array(sorted(counts.values()), dtype=float)
    q1, q3 = np.percentile(values, [25.0, 75.0])
    iqr = q3 - q1
    upper = q3 + 1.5 * iqr
    lower = q1 - 1.5 * iqr
    removed = sorted(uid for uid, n in counts.items() if n > upper or n < min_requests)
    removed_set = set(removed)
    kept = {uid: t for uid, t in traces.items() if uid not in removed_set}
    report = OutlierReport(
        q1=float(q1), q3=float(q3), iqr=float(iqr),
        lower_fence=float(lower), upper_fence=float(upper),
        removed_users=removed, min_request_floor=min_requests,
    )
    return kept, report


# --- normalized per-user trace files (ingest output, consumed by the other commands) ---

def _safe_filename(user_id: str) -> str:
    out = []
    for ch in user_id:
        if ch.isalnum() or ch in "-_":
            out.append(ch)
        else:
            out.append(f"%{ord(ch):02x}")
    return "".join(out)


def write_trace_files(traces: dict[str, UserTrace], out_dir: str | Path) -> Path:
    """Write one JSONL file per user plus an index; returns the traces directory.

    The per-user files use the same four-field JSONL schema as raw input,
    so they can be re-loaded with load_traces as well.
    """
    traces_dir = Path(out_dir) / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    index = {}
    for uid in sorted(traces):
        fname = f"{_safe_filename(uid)}.jsonl"
        index[uid] = fname
        with (traces_dir / fname).open("w", encoding="utf-8") as fh:
            for r in traces[uid].requests:
                fh.write(json.dumps(
                    {"user_id": r.user_id, "timestamp_ms": r.timestamp,
                     "method": "GET", "url": r.url_key},
                    sort_keys=True) + "\n")
    with (traces_dir / "index.json").open("w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return traces_dir


def read_trace_files(in_dir: str | Path) -> dict[str, UserTrace]:
    """Load the per-user traces written by write_trace_files."""
    traces_dir = Path(in_dir) / "traces"
    index_path = traces_dir / "index.json"
    if not index_path.exists():
        raise FileNotFoundError(
            f"no ingested traces under {in_dir!s} (expected {index_path!s}; run 'ingest' first)")
    with index_path.open(encoding="utf-8") as fh:
        index = json.load(fh)
    traces: dict[str, UserTrace] = {}
    for uid in sorted(index):
        loaded, _ = load_traces(traces_dir / index[uid], fmt="jsonl", strict=True)
        if uid not in loaded:
            raise ValueError(f"trace file for {uid!r} holds no requests for that user")
        traces[uid] = loaded[uid]
    return traces
