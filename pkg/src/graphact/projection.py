"""Pinhole geometry: box centers, depth lookup, backprojection, and the
forward-projection oracle used to verify it."""

import numpy as np

from .core import BoundingBox, CameraIntrinsics, DepthGrid, PipelineError, RigidTransform


class NoValidDepth(PipelineError):
    pass


class NonPositiveDepth(PipelineError):
    pass


class BehindCamera(PipelineError):
    pass


def bbox_center(b: BoundingBox) -> np.ndarray:
    """Pixel center ((x_min+x_max)/2, (y_min+y_max)/2)."""
    return np.array([(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0])


def depth_at(depth: DepthGrid, p, window: int = 3) -> float:
    """Depth at the nearest integer pixel; median fallback over a window.

    Invalid values are non-positive (or non-finite). When the center pixel is
    invalid, returns the median of valid values in the window x window
    neighborhood; raises NoValidDepth when the whole neighborhood is invalid.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    u = int(round(float(p[0])))
    v = int(round(float(p[1])))
    u = min(max(u, 0), depth.width - 1)
    v = min(max(v, 0), depth.height - 1)
    val = depth.values[v, u]
    if np.isfinite(val) and val > 0:
        return float(val)
    r = window // 2
    patch = depth.values[max(v - r, 0):v + r + 1, max(u - r, 0):u + r + 1]
    valid = patch[np.isfinite(patch) & (patch > 0)]
    if valid.size == 0:
        raise NoValidDepth(f"no valid depth near pixel ({u}, {v})")
    return float(np.median(valid))


def backproject(p, depth: float, K: CameraIntrinsics) -> np.ndarray:
    """Pixel + metric depth -> 3D point in the camera frame."""
    if depth <= 0:
        raise NonPositiveDepth(f"depth must be positive, got {depth}")
    u, v = float(p[0]), float(p[1])
    return np.array([(u - K.cx) / K.fx * depth, (v - K.cy) / K.fy * depth, depth])


def transform_point(T: RigidTransform, p) -> np.ndarray:
    """rotation @ p + translation."""
    return T.rotation @ np.asarray(p, dtype=float) + T.translation


def project(p_cam, K: CameraIntrinsics):
    """Camera-frame point -> (pixel, depth). Inverse of backproject."""
    x, y, z = (float(c) for c in p_cam)
    if z <= 0:
        raise BehindCamera(f"point has non-positive camera depth z={z}")
    return np.array([K.fx * x / z + K.cx, K.fy * y / z + K.cy]), z
