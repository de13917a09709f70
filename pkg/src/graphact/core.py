"""Shared domain types, configuration, and deterministic randomness.

All geometry is double precision. Timestamps are plain floats (seconds since
episode start); joint configurations are 1-D float arrays in radians.
"""

import json
from dataclasses import dataclass, field

import numpy as np

# Generator identity for every seeded stream in this package. Equal seeds
# produce equal draw sequences within one numpy version.
RNG_ALGORITHM = "numpy.random.Generator(PCG64)"

ORTHONORMAL_TOL = 1e-9


class PipelineError(Exception):
    """Base class for errors raised by this package."""


class ShapeMismatch(PipelineError):
    pass


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator (see RNG_ALGORITHM)."""
    return np.random.default_rng(seed)


def derive_seed(root_seed: int, *indices: int) -> int:
    """Stable child seed for stream (root, i, j, ...); used for per-episode rngs."""
    ss = np.random.SeedSequence([root_seed, *indices])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics; focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside image")

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, d: dict) -> "CameraIntrinsics":
        return cls(fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]),
                   cy=float(d["cy"]), width=int(d["width"]), height=int(d["height"]))


class RigidTransform:
    """Proper rigid transform (rotation + translation), meters.

    Rotation must be orthonormal with det +1 within ORTHONORMAL_TOL.
    """

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation, translation, check: bool = True):
        R = np.asarray(rotation, dtype=float).reshape(3, 3)
        t = np.asarray(translation, dtype=float).reshape(3)
        if check:
            if not np.allclose(R.T @ R, np.eye(3), atol=ORTHONORMAL_TOL):
                raise ValueError("rotation is not orthonormal")
            if abs(np.linalg.det(R) - 1.0) > 1e-6:
                raise ValueError("rotation determinant is not +1")
        self.rotation = R
        self.translation = t

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3), check=False)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self ∘ other)(p) = self(other(p))."""
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation,
                              check=False)

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation, check=False)

    def apply(self, p) -> np.ndarray:
        """Transform one point (3,) or a stack of points (N, 3)."""
        p = np.asarray(p, dtype=float)
        return p @ self.rotation.T + self.translation

    def to_dict(self) -> dict:
        return {"rotation": [float(x) for x in self.rotation.ravel()],
                "translation": [float(x) for x in self.translation]}

    @classmethod
    def from_dict(cls, d: dict) -> "RigidTransform":
        return cls(np.array(d["rotation"], dtype=float).reshape(3, 3),
                   np.array(d["translation"], dtype=float))

    def __repr__(self):
        return f"RigidTransform(t={self.translation.tolist()})"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned detection box in pixel coordinates."""

    label: str
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def is_valid(self, width: int, height: int) -> bool:
        return (self.x_min < self.x_max and self.y_min < self.y_max
                and self.x_min >= 0 and self.y_min >= 0
                and self.x_max <= width and self.y_max <= height)

    def to_dict(self) -> dict:
        return {"label": self.label,
                "box": [self.x_min, self.y_min, self.x_max, self.y_max]}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundingBox":
        x0, y0, x1, y1 = (float(v) for v in d["box"])
        return cls(label=str(d["label"]), x_min=x0, y_min=y0, x_max=x1, y_max=y1)


@dataclass
class DepthGrid:
    """Metric depth image, meters. Non-positive values encode invalid depth."""

    width: int
    height: int
    values: np.ndarray  # (height, width) float64

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.height, self.width)

    @classmethod
    def constant(cls, width: int, height: int, value: float) -> "DepthGrid":
        return cls(width, height, np.full((height, width), float(value)))


@dataclass
class FrameRecord:
    """One time-aligned multimodal observation."""

    t: float
    detections: list  # list[BoundingBox]
    depth: DepthGrid
    q: np.ndarray  # (J,) radians

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(-1)


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_frame(frame: FrameRecord, cfg: "PipelineConfig") -> ValidationReport:
    """Report-style frame check; empty report iff the frame is usable."""
    rep = ValidationReport()
    w, h = frame.depth.width, frame.depth.height
    for b in frame.detections:
        if b.x_min >= b.x_max or b.y_min >= b.y_max:
            rep.violations.append(f"degenerate bounding box: {b.label}")
        elif not b.is_valid(w, h):
            rep.violations.append(f"box out of image bounds: {b.label}")
    if np.isnan(frame.depth.values).any():
        rep.violations.append("NaN depth values")
    if frame.q.size != cfg.j_total:
        rep.violations.append(f"joint dof mismatch: got {frame.q.size}, expected {cfg.j_total}")
    else:
        lo, hi = cfg.joint_limits
        if (frame.q < lo).any() or (frame.q > hi).any():
            rep.violations.append("joint limit violated")
    return rep


@dataclass
class PipelineConfig:
    """Everything the pipeline needs to run; round-trips through JSON."""

    intrinsics: CameraIntrinsics
    extrinsics: RigidTransform          # head camera frame -> robot base frame
    chains: list                        # list[kinematics.KinematicChain]
    j_total: int = 14
    joint_limits: tuple = (-np.pi, np.pi)
    sigma: float = 1.0                  # action-noise scale for flow sampling
    seed: int = 0
    max_gap: float = 2.0 / 30.0         # stream alignment tolerance, seconds
    camera_rate_hz: float = 30.0
    control_rate_hz: float = 150.0
    scenario_names: tuple = ("food", "outfit")
    gnn_dims: tuple = (32, 32, 32)      # (d, h, d_out)
    flow_horizon: int = 30
    flow_hidden: int = 64
    flow_alpha: float = 1.5
    flow_beta: float = 1.0
    euler_steps: int = 10
    cot_dt_frames: int = 30
    cot_window: int = 8
    cot_hidden: int = 64
    cot_embed: int = 16
    lambda_cot: float = 1.0
    lambda_action: float = 1.0
    dropout_p: float = 0.5
    cot_max_len: int = 96

    def to_dict(self) -> dict:
        return {
            "intrinsics": self.intrinsics.to_dict(),
            "extrinsics": self.extrinsics.to_dict(),
            "chains": [c.to_dict() for c in self.chains],
            "j_total": self.j_total,
            "joint_limits": list(self.joint_limits),
            "sigma": self.sigma,
            "seed": self.seed,
            "max_gap": self.max_gap,
            "camera_rate_hz": self.camera_rate_hz,
            "control_rate_hz": self.control_rate_hz,
            "scenario_names": list(self.scenario_names),
            "gnn_dims": list(self.gnn_dims),
            "flow_horizon": self.flow_horizon,
            "flow_hidden": self.flow_hidden,
            "flow_alpha": self.flow_alpha,
            "flow_beta": self.flow_beta,
            "euler_steps": self.euler_steps,
            "cot_dt_frames": self.cot_dt_frames,
            "cot_window": self.cot_window,
            "cot_hidden": self.cot_hidden,
            "cot_embed": self.cot_embed,
            "lambda_cot": self.lambda_cot,
            "lambda_action": self.lambda_action,
            "dropout_p": self.dropout_p,
            "cot_max_len": self.cot_max_len,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        from .kinematics import KinematicChain
        return cls(
            intrinsics=CameraIntrinsics.from_dict(d["intrinsics"]),
            extrinsics=RigidTransform.from_dict(d["extrinsics"]),
            chains=[KinematicChain.from_dict(c) for c in d["chains"]],
            j_total=int(d["j_total"]),
            joint_limits=tuple(d["joint_limits"]),
            sigma=float(d["sigma"]),
            seed=int(d["seed"]),
            max_gap=float(d["max_gap"]),
            camera_rate_hz=float(d["camera_rate_hz"]),
            control_rate_hz=float(d["control_rate_hz"]),
            scenario_names=tuple(d["scenario_names"]),
            gnn_dims=tuple(d["gnn_dims"]),
            flow_horizon=int(d["flow_horizon"]),
            flow_hidden=int(d["flow_hidden"]),
            flow_alpha=float(d["flow_alpha"]),
            flow_beta=float(d["flow_beta"]),
            euler_steps=int(d["euler_steps"]),
            cot_dt_frames=int(d["cot_dt_frames"]),
            cot_window=int(d["cot_window"]),
            cot_hidden=int(d["cot_hidden"]),
            cot_embed=int(d["cot_embed"]),
            lambda_cot=float(d["lambda_cot"]),
            lambda_action=float(d["lambda_action"]),
            dropout_p=float(d["dropout_p"]),
            cot_max_len=int(d["cot_max_len"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))

    @property
    def context_dim(self) -> int:
        """pooled graph embedding + joint state + scenario one-hot."""
        return self.gnn_dims[2] + self.j_total + len(self.scenario_names)
