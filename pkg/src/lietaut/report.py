"""Structured experiment reports: a versioned key-value tree on disk.

Reports are JSON documents with sorted keys, so identical configurations
(including seeds) produce byte-identical files apart from the ``timing``
subtree.  Every report embeds the full effective configuration; the
plot-data emitter reads these files back.
"""

from __future__ import annotations

import json
import time

import numpy as np

from .verdicts import TautVerdict

SCHEMA_VERSION = 1

TIMING_KEYS = ("timestamp", "wall_time_s")


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def verdict_payload(v: TautVerdict) -> dict:
    payload = {
        "samples_requested": v.samples_requested,
        "samples_used": v.samples_used,
        "samples_rejected": v.samples_rejected,
        "counts_histogram": {str(k): int(n) for k, n in sorted(v.counts_histogram.items())},
        "expected": v.expected,
        "verdict": v.verdict,
        "seed": v.seed,
        "rejection_reasons": dict(sorted(v.rejection_reasons.items())),
        "records": [
            {
                "index": r.index,
                "status": r.status,
                "reason": r.reason,
                "count": r.count,
                "refined_count": r.refined_count,
            }
            for r in v.records
        ],
        "diagnostics": _jsonable(v.diagnostics),
    }
    if v.distance_histogram is not None:
        payload["distance_histogram"] = {
            str(k): int(n) for k, n in sorted(v.distance_histogram.items())
        }
        payload["distance_rejection_reasons"] = dict(
            sorted((v.distance_rejection_reasons or {}).items())
        )
    if v.example_field is not None:
        payload["example_field"] = _jsonable(v.example_field)
    return payload


def build_report(check: str, config: dict, results: dict, wall_time_s: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "check": check,
        "config": _jsonable(config),
        "results": _jsonable(results),
        "timing": {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "wall_time_s": float(wall_time_s),
        },
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(report))


def read_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def strip_timing(report: dict) -> dict:
    """Copy of the report without the volatile timing subtree."""
    out = dict(report)
    out.pop("timing", None)
    return out
