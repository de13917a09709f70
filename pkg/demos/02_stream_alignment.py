"""Align a 150 Hz control stream to 30 Hz head-camera timestamps.

Cameras and joint telemetry run at different rates; every emitted frame
carries, for each stream, the latest sample at or before the camera
timestamp. Head samples without a complete match within max_gap are dropped
rather than interpolated.
"""

import numpy as np

from graphact import SampleStream, align_streams
from graphact.stream_sync import CONTROL_STREAM

# 30 Hz camera with a small phase offset; control telemetry at 150 Hz
head = SampleStream("head", 30.0, [
    (0.004 + k / 30, {"detections": [], "depth": None}) for k in range(6)
])
control = SampleStream(CONTROL_STREAM, 150.0, [
    (k / 150, np.array([np.sin(k / 150), np.cos(k / 150)])) for k in range(40)
])
# a slow auxiliary stream that stops early, forcing late frames to drop
aux = SampleStream("gripper", 10.0, [(k / 10, {"open": k % 2 == 0}) for k in range(2)])

frames = align_streams(head, [control, aux], max_gap=2 / 15)
print(f"{len(head.samples)} head samples -> {len(frames)} aligned frames\n")
for f in frames:
    gap_ctrl = f.t - f.source_t[CONTROL_STREAM]
    gap_aux = f.t - f.source_t["gripper"]
    print(f"t={f.t:.4f}  control(t-{gap_ctrl:.4f}s) q={np.round(f.q, 3)}  "
          f"gripper(t-{gap_aux:.4f}s) {f.aux['gripper']}")

print("\nmatched control gap never exceeds one control period:")
gaps = [f.t - f.source_t[CONTROL_STREAM] for f in frames]
print(f"  max gap {max(gaps):.5f}s < {1 / 150:.5f}s + slack")
