"""Build a 3D scene graph from one synthetic RGB-D/joint frame.

The simulator places objects on a table, forward-projects them into detection
boxes and a depth grid, and the pipeline inverts that: box centers are
backprojected through the camera intrinsics, moved to the robot base frame,
and combined with forward-kinematics joint positions into a single graph.
Because the simulator is exact, recovered object positions must match the
ground truth to sub-micron precision.
"""

import numpy as np

from graphact import SCENARIOS, build_graph, default_config, gen_episode

cfg = default_config()
episode = gen_episode(SCENARIOS["food"], variant=0, n_frames=1, seed=7, cfg=cfg)

print("scene ground truth:")
for obj in episode.scene.objects:
    print(f"  {obj.label:8s} at {np.round(obj.position, 3)}")

frame = episode.frames[0]
print(f"\nframe has {len(frame.detections)} detections, "
      f"{frame.depth.width}x{frame.depth.height} depth grid")

graph = build_graph(frame, cfg.intrinsics, cfg.extrinsics, cfg.chains)
print(f"\ngraph: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
for node in graph.nodes:
    print(f"  [{node.id:2d}] {node.kind:13s} {node.label:10s} "
          f"{np.round(node.position, 3)}")

print("\nrecovery error vs ground truth:")
for obj in episode.scene.objects:
    node = next(n for n in graph.nodes if n.label == obj.label)
    err = np.abs(node.position - obj.position).max()
    print(f"  {obj.label:8s} {err:.2e} m")
