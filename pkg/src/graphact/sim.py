"""Synthetic scenes and episodes: ground truth for every pipeline stage.

Objects are placed at nominal positions with uniform translation jitter
(default +/-10 cm per axis) and yaw jitter (default +/-30 degrees), then
forward-projected into detections and a sparse depth grid. Robot motion is a
scripted joint-space cubic; no claim of behavioral realism.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (BoundingBox, CameraIntrinsics, DepthGrid, FrameRecord,
                   PipelineConfig, PipelineError, RigidTransform, make_rng)
from .kinematics import default_chains
from .projection import BehindCamera, project


class InvalidVariant(PipelineError):
    pass


class EmptyEpisode(PipelineError):
    pass


TRANSLATE_JITTER = 0.10          # meters, per horizontal axis
YAW_JITTER = math.radians(30.0)

DEFAULT_BOX_SIZE = 20.0          # rendered detection box, pixels
DEFAULT_FAR = 5.0                # background depth, meters


@dataclass(frozen=True)
class SceneObject:
    label: str
    position: np.ndarray  # (3,) base frame
    yaw: float


@dataclass
class Scene:
    objects: list
    table_bounds: tuple  # ((x0, x1), (y0, y1), (z0, z1))

    def labels(self) -> list:
        return [o.label for o in self.objects]

    def position_of(self, label: str) -> np.ndarray:
        for o in self.objects:
            if o.label == label:
                return o.position
        raise KeyError(label)


@dataclass(frozen=True)
class InstructionScenario:
    """One task family: object universe, requirement set, and availability
    variants (which subset of the universe is on the table)."""

    name: str
    universe: tuple
    required: tuple
    variants: tuple          # tuple of label tuples
    instruction_text: str
    nominal: dict            # label -> (x, y, z)
    table_bounds: tuple


_TABLE = ((0.30, 0.80), (-0.35, 0.35), (0.0, 0.25))

FOOD = InstructionScenario(
    name="food",
    universe=("egg", "tomato", "fish", "pepper"),
    required=("fish", "pepper"),
    variants=(("egg", "tomato", "fish", "pepper"),
              ("egg", "tomato", "pepper"),
              ("egg", "tomato")),
    instruction_text="i want to eat spicy river food .",
    nominal={"egg": (0.45, -0.15, 0.02), "tomato": (0.45, 0.15, 0.02),
             "fish": (0.65, -0.15, 0.02), "pepper": (0.65, 0.15, 0.02)},
    table_bounds=_TABLE,
)

OUTFIT = InstructionScenario(
    name="outfit",
    universe=("sweater", "t-shirt", "shorts"),
    required=("t-shirt", "shorts"),
    variants=(("sweater", "t-shirt", "shorts"),
              ("sweater", "t-shirt"),
              ("sweater",)),
    instruction_text="i want a light summer outfit .",
    nominal={"sweater": (0.45, -0.18, 0.02), "t-shirt": (0.45, 0.18, 0.02),
             "shorts": (0.65, 0.0, 0.02)},
    table_bounds=_TABLE,
)

SCENARIOS = {s.name: s for s in (FOOD, OUTFIT)}


def look_at(eye, target, up=(0.0, 0.0, 1.0)) -> RigidTransform:
    """Camera-to-base transform for a pinhole camera (+x right, +y down,
    +z forward) positioned at eye and looking at target."""
    eye = np.asarray(eye, dtype=float)
    forward = np.asarray(target, dtype=float) - eye
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(up, dtype=float))
    nr = np.linalg.norm(right)
    if nr < 1e-9:
        raise ValueError("view direction parallel to up vector")
    right = right / nr
    down = np.cross(forward, right)
    R = np.stack([right, down, forward], axis=1)
    return RigidTransform(R, eye)


def default_config(seed: int = 0) -> PipelineConfig:
    """Desk-scale rig: 640x480 head camera over a tabletop, two 7-DOF arms."""
    K = CameraIntrinsics(fx=525.0, fy=525.0, cx=320.0, cy=240.0, width=640, height=480)
    T = look_at(eye=(0.05, 0.0, 0.75), target=(0.55, 0.0, 0.0))
    return PipelineConfig(intrinsics=K, extrinsics=T, chains=default_chains(), seed=seed)


def gen_scene(scenario: InstructionScenario, variant: int, rng,
              translate_jitter: float = TRANSLATE_JITTER,
              yaw_jitter: float = YAW_JITTER) -> Scene:
    """Place the variant's available objects at nominal + jitter positions."""
    if not 0 <= variant < len(scenario.variants):
        raise InvalidVariant(f"scenario '{scenario.name}' has no variant {variant}")
    objects = []
    for label in scenario.variants[variant]:
        dx, dy = rng.uniform(-translate_jitter, translate_jitter, size=2)
        yaw = float(rng.uniform(-yaw_jitter, yaw_jitter))
        nx, ny, nz = scenario.nominal[label]
        objects.append(SceneObject(label=label,
                                   position=np.array([nx + dx, ny + dy, nz]),
                                   yaw=yaw))
    return Scene(objects=objects, table_bounds=scenario.table_bounds)


def _box_region(box: BoundingBox, width: int, height: int) -> tuple:
    x0 = max(int(math.floor(box.x_min)), 0)
    y0 = max(int(math.floor(box.y_min)), 0)
    x1 = min(int(math.ceil(box.x_max)), width)
    y1 = min(int(math.ceil(box.y_max)), height)
    return x0, y0, x1, y1


def render_frame(scene: Scene, q, t: float, K: CameraIntrinsics, T: RigidTransform,
                 box_size: float = DEFAULT_BOX_SIZE, far: float = DEFAULT_FAR,
                 omitted: list = None) -> FrameRecord:
    """Forward-project each object into a detection box and depth patch.

    Depth is written only inside detection boxes over a constant far
    background; overlapping boxes keep the nearer surface. Objects behind the
    camera raise BehindCamera; objects projecting outside the image (or
    within a pixel of its border) are omitted and recorded in `omitted`.
    """
    T_inv = T.inverse()
    grid = DepthGrid.constant(K.width, K.height, far)
    detections = []
    for obj in scene.objects:
        p_cam = T_inv.apply(obj.position)
        if p_cam[2] <= 0:
            raise BehindCamera(f"object '{obj.label}' behind the head camera")
        pix, z = project(p_cam, K)
        u, v = float(pix[0]), float(pix[1])
        half = box_size / 2.0
        hu = min(half, u, K.width - u)
        hv = min(half, v, K.height - v)
        if hu < 1.0 or hv < 1.0:
            if omitted is not None:
                omitted.append(obj.label)
            continue
        box = BoundingBox(label=obj.label, x_min=u - hu, y_min=v - hv,
                          x_max=u + hu, y_max=v + hv)
        x0, y0, x1, y1 = _box_region(box, K.width, K.height)
        grid.values[y0:y1, x0:x1] = np.minimum(grid.values[y0:y1, x0:x1], z)
        detections.append(box)
    return FrameRecord(t=t, detections=detections, depth=grid, q=np.asarray(q, dtype=float))


# Fixed map from a target bearing to per-arm joint offsets; arbitrary but
# deterministic, bounded so scripted goals stay well inside +/-pi limits.
_BEARING_TO_JOINTS = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [0.3, 0.3, 0.3],
])


def _goal_config(scene: Scene, scenario: InstructionScenario, cfg: PipelineConfig,
                 home: np.ndarray) -> np.ndarray:
    target = next((lbl for lbl in scenario.required if lbl in scene.labels()), None)
    if target is None:
        return home.copy()
    p = scene.position_of(target)
    goal = home.copy()
    offset = 0
    for chain in cfg.chains:
        bearing = p - chain.base.translation
        delta = 0.6 * np.tanh(_BEARING_TO_JOINTS[:chain.dof] @ bearing)
        goal[offset:offset + chain.dof] += delta
        offset += chain.dof
    lo, hi = cfg.joint_limits
    return np.clip(goal, lo, hi)


@dataclass
class Episode:
    frames: list
    scene: Scene
    scenario: InstructionScenario
    trajectory: list        # list of (J,) arrays, one per frame
    variant: int = 0
    seed: int = 0
    K: CameraIntrinsics = None
    T: RigidTransform = None
    far: float = DEFAULT_FAR
    omitted: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)


def gen_episode(scenario: InstructionScenario, variant: int, n_frames: int,
                seed: int, cfg: PipelineConfig = None,
                box_size: float = DEFAULT_BOX_SIZE, far: float = DEFAULT_FAR) -> Episode:
    """Deterministic episode: jittered scene, cubic home-to-goal trajectory,
    frames rendered at the camera rate. The scene is reproducible from the
    recorded seed (it consumes the generator's first draws)."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    cfg = cfg or default_config()
    rng = make_rng(seed)
    scene = gen_scene(scenario, variant, rng)
    home = np.zeros(cfg.j_total)
    goal = _goal_config(scene, scenario, cfg, home)
    trajectory = []
    for i in range(n_frames):
        u = i / (n_frames - 1) if n_frames > 1 else 0.0
        s = 3.0 * u ** 2 - 2.0 * u ** 3  # smooth cubic, zero end velocities
        trajectory.append(home + s * (goal - home))
    omitted = []
    frames = [render_frame(scene, trajectory[i], i / cfg.camera_rate_hz,
                           cfg.intrinsics, cfg.extrinsics, box_size, far, omitted)
              for i in range(n_frames)]
    return Episode(frames=frames, scene=scene, scenario=scenario, trajectory=trajectory,
                   variant=variant, seed=seed, K=cfg.intrinsics, T=cfg.extrinsics,
                   far=far, omitted=omitted)


def write_episode(ep: Episode, path) -> None:
    """One JSONL file: header line, then one line per frame with detections
    and the depth patches under each detection box."""
    with open(path, "w") as f:
        header = {"scenario": ep.scenario.name, "variant": ep.variant,
                  "K": ep.K.to_dict(), "T": ep.T.to_dict(),
                  "resolution": [ep.K.width, ep.K.height], "seed": ep.seed}
        f.write(json.dumps(header) + "\n")
        for frame in ep.frames:
            boxes = []
            for det in frame.detections:
                x0, y0, x1, y1 = _box_region(det, frame.depth.width, frame.depth.height)
                boxes.append({"x0": x0, "y0": y0, "x1": x1, "y1": y1,
                              "values": [float(v) for v in
                                         frame.depth.values[y0:y1, x0:x1].ravel()]})
            line = {"t": float(frame.t),
                    "q": [float(v) for v in frame.q],
                    "detections": [d.to_dict() for d in frame.detections],
                    "depth": {"w": frame.depth.width, "h": frame.depth.height,
                              "boxes": boxes},
                    "far": float(ep.far)}
            f.write(json.dumps(line) + "\n")


def load_episode(path) -> Episode:
    """Inverse of write_episode; the scene is regenerated from the header seed."""
    with open(path) as f:
        lines = [json.loads(l) for l in f if l.strip()]
    if len(lines) < 2:
        raise EmptyEpisode(f"episode file {path} has no frames")
    header = lines[0]
    scenario = SCENARIOS[header["scenario"]]
    K = CameraIntrinsics.from_dict(header["K"])
    T = RigidTransform.from_dict(header["T"])
    seed = int(header["seed"])
    scene = gen_scene(scenario, int(header["variant"]), make_rng(seed))
    frames = []
    trajectory = []
    far = DEFAULT_FAR
    for rec in lines[1:]:
        far = float(rec["far"])
        grid = DepthGrid.constant(int(rec["depth"]["w"]), int(rec["depth"]["h"]), far)
        for b in rec["depth"]["boxes"]:
            vals = np.array(b["values"], dtype=float)
            h, w = b["y1"] - b["y0"], b["x1"] - b["x0"]
            grid.values[b["y0"]:b["y1"], b["x0"]:b["x1"]] = vals.reshape(h, w)
        q = np.array(rec["q"], dtype=float)
        frames.append(FrameRecord(t=float(rec["t"]),
                                  detections=[BoundingBox.from_dict(d)
                                              for d in rec["detections"]],
                                  depth=grid, q=q))
        trajectory.append(q)
    return Episode(frames=frames, scene=scene, scenario=scenario, trajectory=trajectory,
                   variant=int(header["variant"]), seed=seed, K=K, T=T, far=far)
