"""Multi-rate stream alignment to head-camera timestamps.

Matching is latest-at-or-before (causal): a reading from the future never
explains a camera frame. Head samples missing any match within max_gap are
dropped, not interpolated.
"""

import json
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .core import BoundingBox, DepthGrid, PipelineError

HEAD_STREAM = "head"
CONTROL_STREAM = "control"


class EmptyStream(PipelineError):
    pass


class NonMonotoneTimestamps(PipelineError):
    pass


@dataclass
class SampleStream:
    """Time-ordered (timestamp, payload) samples from one source."""

    name: str
    rate_hz: float
    samples: list  # list[(float, payload)]

    def timestamps(self) -> list:
        return [t for t, _ in self.samples]


@dataclass
class SyncedFrame:
    """One head-camera frame with the latest-at-or-before match per stream."""

    t: float
    detections: list = field(default_factory=list)
    depth: DepthGrid = None
    q: np.ndarray = None
    aux: dict = field(default_factory=dict)
    source_t: dict = field(default_factory=dict)  # stream name -> matched timestamp


def _check_stream(s: SampleStream) -> list:
    if not s.samples:
        raise EmptyStream(f"stream '{s.name}' has no samples")
    ts = s.timestamps()
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise NonMonotoneTimestamps(f"stream '{s.name}' timestamps not strictly increasing")
    return ts


def align_streams(head: SampleStream, others: list, max_gap: float) -> list:
    """One SyncedFrame per head sample fully matched within max_gap.

    Head payloads are mappings with 'detections' and 'depth' entries; the
    stream named CONTROL_STREAM carries joint vectors, surfaced as frame.q.
    Every matched payload also lands in frame.aux under its stream name.
    """
    if max_gap <= 0:
        raise ValueError("max_gap must be positive")
    head_ts = _check_stream(head)
    other_ts = {s.name: _check_stream(s) for s in others}

    frames = []
    for t, payload in head.samples:
        matches = {}
        times = {}
        complete = True
        for s in others:
            ts = other_ts[s.name]
            idx = bisect_right(ts, t) - 1
            if idx < 0 or t - ts[idx] > max_gap:
                complete = False
                break
            matches[s.name] = s.samples[idx][1]
            times[s.name] = ts[idx]
        if not complete:
            continue
        frame = SyncedFrame(t=t, aux=matches, source_t=times)
        if isinstance(payload, dict):
            frame.detections = payload.get("detections", [])
            frame.depth = payload.get("depth")
        if CONTROL_STREAM in matches:
            frame.q = np.asarray(matches[CONTROL_STREAM], dtype=float).reshape(-1)
        frames.append(frame)
    return frames


def read_stream_log(path) -> list:
    """Parse a multi-stream JSONL log: one {stream, t, payload} object per line.

    Head payloads may carry detections (list of {label, box}) and a depth grid
    {w, h, values}; other payloads pass through as parsed.
    """
    streams = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            name = rec["stream"]
            payload = rec["payload"]
            if isinstance(payload, dict) and "detections" in payload:
                payload = dict(payload)
                payload["detections"] = [BoundingBox.from_dict(d) for d in payload["detections"]]
                if "depth" in payload and isinstance(payload["depth"], dict):
                    dd = payload["depth"]
                    payload["depth"] = DepthGrid(int(dd["w"]), int(dd["h"]),
                                                 np.array(dd["values"], dtype=float))
            streams.setdefault(name, []).append((float(rec["t"]), payload))
    out = []
    for name, samples in streams.items():
        ts = [t for t, _ in samples]
        rate = (len(ts) - 1) / (ts[-1] - ts[0]) if len(ts) > 1 and ts[-1] > ts[0] else 0.0
        out.append(SampleStream(name=name, rate_hz=rate, samples=samples))
    return out
