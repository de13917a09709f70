import numpy as np
import pytest

from graphact import SampleStream, align_streams
from graphact.stream_sync import (CONTROL_STREAM, EmptyStream,
                                  NonMonotoneTimestamps, read_stream_log)


def _head(ts):
    return SampleStream("head", 30.0, [(t, {"detections": [], "depth": None}) for t in ts])


def _control(ts):
    return SampleStream(CONTROL_STREAM, 150.0, [(t, [float(t)] * 2) for t in ts])


def test_align_30hz_head_with_150hz_control():
    # head {0, 1/30, 2/30}; control k/150: frame at 1/30 matches 5/150 exactly
    head = _head([k / 30 for k in range(3)])
    control = _control([k / 150 for k in range(20)])
    frames = align_streams(head, [control], max_gap=2 / 150)
    assert len(frames) == 3
    assert frames[1].source_t[CONTROL_STREAM] == 5 / 150
    assert frames[1].t - frames[1].source_t[CONTROL_STREAM] == 0.0
    assert np.array_equal(frames[1].q, [5 / 150, 5 / 150])


def test_coincident_timestamps_match_with_zero_gap():
    frames = align_streams(_head([0.0]), [_control([0.0])], max_gap=0.01)
    assert len(frames) == 1
    assert frames[0].t - frames[0].source_t[CONTROL_STREAM] == 0.0


def test_frame_dropped_when_no_match_within_gap():
    # control stream exists only after the head sample
    frames = align_streams(_head([0.5]), [_control([0.6, 0.7])],
                           max_gap=1 / 150 + 1e-6)
    assert frames == []
    # control sample exists before but too stale
    frames = align_streams(_head([0.5]), [_control([0.3])], max_gap=1 / 150 + 1e-6)
    assert frames == []


def test_output_ordering_and_count():
    head = _head([k / 30 for k in range(10)])
    control = _control([k / 150 for k in range(5, 60)])  # starts at 1/30
    frames = align_streams(head, [control], max_gap=2 / 150)
    assert len(frames) <= 10
    ts = [f.t for f in frames]
    assert ts == sorted(ts)


def test_matched_gap_bound_150hz_vs_30hz():
    rng = np.random.default_rng(3)
    for _ in range(20):
        offset = rng.uniform(0, 1 / 150)
        head = _head([offset + k / 30 for k in range(30)])
        control = _control([k / 150 for k in range(200)])
        frames = align_streams(head, [control], max_gap=2 / 150)
        assert len(frames) == 30
        for f in frames:
            gap = f.t - f.source_t[CONTROL_STREAM]
            assert 0 <= gap < 1 / 150 + 1e-12


def test_align_is_idempotent():
    head = _head([k / 30 + 0.001 for k in range(8)])
    control = _control([k / 150 for k in range(50)])
    first = align_streams(head, [control], max_gap=2 / 150)
    rehead = SampleStream("head", 30.0, [(f.t, {"detections": f.detections,
                                                "depth": f.depth}) for f in first])
    recontrol = SampleStream(CONTROL_STREAM, 150.0,
                             [(f.t, list(f.q)) for f in first])
    second = align_streams(rehead, [recontrol], max_gap=2 / 150)
    assert [f.t for f in second] == [f.t for f in first]
    for a, b in zip(first, second):
        assert np.array_equal(a.q, b.q)


def test_empty_and_non_monotone_errors():
    with pytest.raises(EmptyStream):
        align_streams(_head([]), [_control([0.0])], max_gap=0.1)
    with pytest.raises(NonMonotoneTimestamps):
        align_streams(_head([0.0, 0.0]), [_control([0.0])], max_gap=0.1)
    with pytest.raises(NonMonotoneTimestamps):
        align_streams(_head([0.0]), [_control([0.1, 0.05])], max_gap=0.1)


def test_aux_carries_other_streams():
    imu = SampleStream("imu", 100.0, [(k / 100, {"w": k}) for k in range(30)])
    frames = align_streams(_head([0.1]), [_control([k / 150 for k in range(30)]), imu],
                           max_gap=0.05)
    assert frames[0].aux["imu"] == {"w": 10}
    assert CONTROL_STREAM in frames[0].aux


def test_read_stream_log_roundtrip(tmp_path):
    import json
    path = tmp_path / "log.jsonl"
    lines = [
        {"stream": "head", "t": 0.0,
         "payload": {"detections": [{"label": "egg", "box": [1.0, 2.0, 3.0, 4.0]}],
                     "depth": {"w": 2, "h": 2, "values": [1.0, 2.0, 3.0, 4.0]}}},
        {"stream": CONTROL_STREAM, "t": 0.0, "payload": [0.1, 0.2]},
        {"stream": CONTROL_STREAM, "t": 1 / 150, "payload": [0.2, 0.3]},
    ]
    path.write_text("\n".join(json.dumps(l) for l in lines) + "\n")
    streams = {s.name: s for s in read_stream_log(path)}
    frames = align_streams(streams["head"], [streams[CONTROL_STREAM]], max_gap=0.1)
    assert len(frames) == 1
    assert frames[0].detections[0].label == "egg"
    assert frames[0].depth.values[1, 0] == 3.0
    assert np.array_equal(frames[0].q, [0.1, 0.2])
