"""
Parsing a raw request log into per-user traces
==============================================

A log is a flat file of (user_id, timestamp_ms, method, url) rows. Parsing
filters it down to GET requests, groups rows by user, sorts each group by
timestamp, and drops outlier users whose request volume would distort any
per-user average.
"""

import tempfile
from pathlib import Path

from prefetchlab import load_traces, remove_outlier_users, repetition_stats

# a tiny log: two normal users, one robot-like heavy user, one drive-by
log_text = "user_id,timestamp_ms,method,url\n"
for i in range(30):
    log_text += f"alice,{1000 + i},GET,https://news.example/story{i % 6}\n"
for i in range(26):
    log_text += f"bob,{1000 + i},GET,https://shop.example/item?id={i % 9}\n"
for i in range(900):
    log_text += f"crawler,{1000 + i},GET,https://news.example/page{i}\n"
log_text += "eve,1000,GET,https://news.example/story0\n"
log_text += "eve,1001,POST,https://news.example/login\n"  # non-GET: dropped

log_path = Path(tempfile.mkdtemp()) / "access.csv"
log_path.write_text(log_text, encoding="utf-8")

traces, summary = load_traces(log_path)
print(f"rows read {summary.rows_read}, GET kept {summary.kept}, "
      f"non-GET dropped {summary.dropped_non_get}")
print("users parsed:", sorted(traces))

# Tukey fence on per-user counts removes "crawler"; the 10-request floor
# removes "eve" (one GET is not enough history to learn from)
kept, outliers = remove_outlier_users(traces)
print(f"upper fence {outliers.upper_fence:.1f} -> removed {outliers.removed_users}")
print("users kept:", sorted(kept))

for uid, trace in sorted(kept.items()):
    stats = repetition_stats(trace)
    print(f"{uid}: {len(trace)} requests, {stats.unique_count} unique, "
          f"{stats.repeated_pct:.0%} repeated")
