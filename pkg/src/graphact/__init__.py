"""graphact: scene-graph conditioned action pipeline at desk scale.

Builds per-frame 3D scene graphs from synchronized detections, depth, and
joint streams; encodes them with a small graph network; generates action
chunks with a flow-matching expert; and supervises a structured reasoning
head co-trained with Bernoulli dropout. A synthetic scene generator provides
exact ground truth for every stage.
"""

from .core import (BoundingBox, CameraIntrinsics, DepthGrid, FrameRecord,
                   PipelineConfig, PipelineError, RigidTransform, ShapeMismatch,
                   ValidationReport, derive_seed, make_rng, validate_frame)
from .stream_sync import SampleStream, SyncedFrame, align_streams
from .kinematics import DhLink, KinematicChain, default_chains, dh_transform, fk_positions
from .projection import backproject, bbox_center, depth_at, project, transform_point
from .graph import (GraphNode, GraphOptions, PoseObjectGraph, adjacency_matrix,
                    build_graph, graph_from_json, graph_to_json)
from .gnn import (GnnWeights, encode, graph_conv, init_gnn_weights,
                  initial_embedding, layer_norm, pooled_embedding)
from .flow import (FlowExpert, fm_loss, grad_check, init_flow_expert, interpolate,
                   sample_actions, sample_tau, target_field, train_step)
from .cot import (CotHead, CotLabel, TokenVocab, build_default_vocab, ce_loss,
                  detokenize, future_indices, generate_cot, grad_check_cot,
                  make_cot_label, sample_dropout, tokenize, total_loss,
                  train_cot_head)
from .sim import (SCENARIOS, Episode, InstructionScenario, Scene, default_config,
                  gen_episode, gen_scene, load_episode, render_frame, write_episode)
from .inference import (BenchReport, FrameOutput, InferenceSchedule, make_context,
                        run_inference_loop, scenario_onehot)
from .selfcheck import run_selfcheck

__version__ = "0.1.0"
