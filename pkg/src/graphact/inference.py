"""Hybrid-reasoning inference: reasoning text is generated only on scheduled
frames (by default the first), every frame gets a sampled action chunk, and
per-stage wall-clock timings are collected into a benchmark report."""

import time
from dataclasses import dataclass, field

import numpy as np

from .core import PipelineConfig, PipelineError, make_rng
from .cot import CotHead, detokenize, generate_cot
from .flow import FlowExpert, sample_actions
from .gnn import GnnWeights, encode, pooled_embedding
from .graph import GraphOptions, build_graph
from .sim import EmptyEpisode, Episode


class ArtifactLoadError(PipelineError):
    pass


@dataclass
class InferenceSchedule:
    """Reasoning cadence: first frame by default, every cot_period frames
    when set. rate_budget_hz paces the loop only when pace is on."""

    cot_on_first_frame: bool = True
    cot_period: int = None
    rate_budget_hz: float = 10.0
    pace: bool = False

    def __post_init__(self):
        if self.cot_period is not None and self.cot_period < 1:
            raise ValueError("cot_period must be >= 1 when set")
        if self.rate_budget_hz <= 0:
            raise ValueError("rate_budget_hz must be positive")

    def wants_cot(self, frame_index: int) -> bool:
        if self.cot_period is not None:
            return frame_index % self.cot_period == 0
        return self.cot_on_first_frame and frame_index == 0


@dataclass
class BenchReport:
    """Per-stage timings in milliseconds plus the achieved frame rate."""

    stages: dict = field(default_factory=dict)  # stage -> {mean_ms, p95_ms, count}
    frame_ms: dict = field(default_factory=dict)
    achieved_hz: float = 0.0
    frame_samples: list = field(default_factory=list)  # raw per-frame ms

    def to_dict(self) -> dict:
        return {"stages": self.stages, "frame_ms": self.frame_ms,
                "achieved_hz": self.achieved_hz}


def _summarize(samples: list) -> dict:
    arr = np.asarray(samples, dtype=float)
    return {"mean_ms": float(arr.mean()), "p95_ms": float(np.percentile(arr, 95)),
            "count": int(arr.size)}


@dataclass
class FrameOutput:
    index: int
    t: float
    actions: np.ndarray       # (H_a, J)
    cot_text: str = None


def scenario_onehot(cfg: PipelineConfig, name: str) -> np.ndarray:
    onehot = np.zeros(len(cfg.scenario_names))
    onehot[cfg.scenario_names.index(name)] = 1.0
    return onehot


def make_context(pooled: np.ndarray, q: np.ndarray, onehot: np.ndarray) -> np.ndarray:
    """Conditioning vector: pooled graph embedding + joint state + task one-hot."""
    return np.concatenate([np.ravel(pooled), np.ravel(q), np.ravel(onehot)])


def run_inference_loop(episode: Episode, gnn_w: GnnWeights, expert: FlowExpert,
                       cot_head: CotHead, schedule: InferenceSchedule,
                       cfg: PipelineConfig, seed: int = 0,
                       euler_steps: int = None, graph_opts: GraphOptions = None,
                       max_cot_len: int = None) -> tuple:
    """Run the per-frame pipeline over an episode.

    Returns (outputs, report): one FrameOutput per frame (reasoning text only
    on scheduled frames) and a BenchReport of per-stage timings.
    """
    if not episode.frames:
        raise EmptyEpisode("cannot run inference on an empty episode")
    euler_steps = euler_steps or cfg.euler_steps
    max_cot_len = max_cot_len or cfg.cot_max_len
    onehot = scenario_onehot(cfg, episode.scenario.name)
    rng = make_rng(seed)
    stage_times = {"graph_build": [], "encode": [], "cot_generation": [], "action_sampling": []}
    frame_times = []
    outputs = []
    loop_start = time.perf_counter()
    for i, frame in enumerate(episode.frames):
        frame_start = time.perf_counter()

        t0 = time.perf_counter()
        g = build_graph(frame, episode.K or cfg.intrinsics, episode.T or cfg.extrinsics,
                        cfg.chains, graph_opts)
        stage_times["graph_build"].append((time.perf_counter() - t0) * 1e3)

        t0 = time.perf_counter()
        pooled = pooled_embedding(encode(g, gnn_w))
        stage_times["encode"].append((time.perf_counter() - t0) * 1e3)

        context = make_context(pooled, frame.q, onehot)

        cot_text = None
        if schedule.wants_cot(i):
            t0 = time.perf_counter()
            ids = generate_cot(cot_head, context, max_cot_len)
            cot_text = detokenize(ids, cot_head.vocab)
            stage_times["cot_generation"].append((time.perf_counter() - t0) * 1e3)

        t0 = time.perf_counter()
        actions = sample_actions(expert, context, euler_steps, rng)
        stage_times["action_sampling"].append((time.perf_counter() - t0) * 1e3)

        frame_times.append((time.perf_counter() - frame_start) * 1e3)
        outputs.append(FrameOutput(index=i, t=frame.t, actions=actions, cot_text=cot_text))

        if schedule.pace:
            budget = 1.0 / schedule.rate_budget_hz
            elapsed = time.perf_counter() - frame_start
            if elapsed < budget:
                time.sleep(budget - elapsed)

    total = time.perf_counter() - loop_start
    report = BenchReport(
        stages={name: _summarize(ts) for name, ts in stage_times.items() if ts},
        frame_ms=_summarize(frame_times),
        achieved_hz=float(len(episode.frames) / total) if total > 0 else 0.0,
        frame_samples=frame_times,
    )
    return outputs, report


def outputs_to_dict(outputs: list) -> dict:
    """Deterministic serialization of loop outputs (no timings)."""
    return {"frames": [{"index": o.index, "t": float(o.t),
                        "actions": [[float(v) for v in row] for row in o.actions],
                        "cot": o.cot_text}
                       for o in outputs]}
