"""Two-layer graph encoder: per layer, layer normalization, symmetric-normalized
graph convolution with self-loops, then ReLU. Inference only; weights are
loaded from file and never trained here."""

import json
from dataclasses import dataclass

import numpy as np

from .core import PipelineError, ShapeMismatch
from .graph import END_EFFECTOR, JOINT, OBJECT, PoseObjectGraph, adjacency_matrix

LN_EPS = 1e-5

# Node-kind one-hot order appended to raw 3D positions (input dim 6).
KIND_ORDER = (OBJECT, END_EFFECTOR, JOINT)
INPUT_DIM = 3 + len(KIND_ORDER)


class EmptyGraph(PipelineError):
    pass


@dataclass
class GnnWeights:
    lift_w: np.ndarray   # (INPUT_DIM, d)
    lift_b: np.ndarray   # (d,)
    layer1_w: np.ndarray  # (d, h)
    layer1_b: np.ndarray  # (h,)
    layer2_w: np.ndarray  # (h, d_out)
    layer2_b: np.ndarray  # (d_out,)

    @property
    def dims(self) -> tuple:
        return self.lift_w.shape[1], self.layer1_w.shape[1], self.layer2_w.shape[1]

    def __post_init__(self):
        d, h, d_out = self.dims
        if self.lift_w.shape != (INPUT_DIM, d) or self.lift_b.shape != (d,):
            raise ShapeMismatch("lift weights inconsistent")
        if self.layer1_w.shape != (d, h) or self.layer1_b.shape != (h,):
            raise ShapeMismatch("layer1 weights inconsistent")
        if self.layer2_w.shape != (h, d_out) or self.layer2_b.shape != (d_out,):
            raise ShapeMismatch("layer2 weights inconsistent")

    def to_dict(self) -> dict:
        d, h, d_out = self.dims
        return {
            "dims": {"d": d, "h": h, "d_out": d_out},
            "lift": {"w": self.lift_w.tolist(), "b": self.lift_b.tolist()},
            "layer1": {"w": self.layer1_w.tolist(), "b": self.layer1_b.tolist()},
            "layer2": {"w": self.layer2_w.tolist(), "b": self.layer2_b.tolist()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GnnWeights":
        def arr(x):
            return np.array(x, dtype=float)
        return cls(lift_w=arr(doc["lift"]["w"]), lift_b=arr(doc["lift"]["b"]),
                   layer1_w=arr(doc["layer1"]["w"]), layer1_b=arr(doc["layer1"]["b"]),
                   layer2_w=arr(doc["layer2"]["w"]), layer2_b=arr(doc["layer2"]["b"]))

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "GnnWeights":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def init_gnn_weights(rng: np.random.Generator, d: int = 32, h: int = 32,
                     d_out: int = 32) -> GnnWeights:
    """Seeded random init, 1/sqrt(fan_in) scale, zero biases."""
    def mat(n_in, n_out):
        return rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_in, n_out))
    return GnnWeights(lift_w=mat(INPUT_DIM, d), lift_b=np.zeros(d),
                      layer1_w=mat(d, h), layer1_b=np.zeros(h),
                      layer2_w=mat(h, d_out), layer2_b=np.zeros(d_out))


def node_inputs(g: PoseObjectGraph) -> np.ndarray:
    """Raw per-node inputs: [x, y, z, one-hot(kind)] in KIND_ORDER."""
    if not g.nodes:
        raise EmptyGraph("graph has no nodes")
    X = np.zeros((len(g.nodes), INPUT_DIM))
    for i, n in enumerate(g.nodes):
        X[i, :3] = n.position
        X[i, 3 + KIND_ORDER.index(n.kind)] = 1.0
    return X


def initial_embedding(g: PoseObjectGraph, w: GnnWeights) -> np.ndarray:
    return node_inputs(g) @ w.lift_w + w.lift_b


def layer_norm(H: np.ndarray) -> np.ndarray:
    """Per-row (x - mean) / sqrt(var + eps); no learned affine."""
    mu = H.mean(axis=1, keepdims=True)
    var = H.var(axis=1, keepdims=True)
    return (H - mu) / np.sqrt(var + LN_EPS)


def normalized_adjacency(A: np.ndarray) -> np.ndarray:
    """D^(-1/2) (A + I) D^(-1/2) with D the row-degree of (A + I)."""
    A_hat = A + np.eye(A.shape[0])
    d_inv_sqrt = 1.0 / np.sqrt(A_hat.sum(axis=1))
    return A_hat * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]


def graph_conv(H: np.ndarray, A: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    if A.shape[0] != A.shape[1] or A.shape[0] != H.shape[0]:
        raise ShapeMismatch(f"adjacency {A.shape} does not match features {H.shape}")
    if H.shape[1] != W.shape[0]:
        raise ShapeMismatch(f"features {H.shape} do not match weight {W.shape}")
    return normalized_adjacency(A) @ H @ W + b


def encode(g: PoseObjectGraph, w: GnnWeights) -> np.ndarray:
    """H1 = ReLU(conv(LN(H0))); H2 = ReLU(conv(LN(H1))); returns H2."""
    A = adjacency_matrix(g)
    H = initial_embedding(g, w)
    H = np.maximum(graph_conv(layer_norm(H), A, w.layer1_w, w.layer1_b), 0.0)
    H = np.maximum(graph_conv(layer_norm(H), A, w.layer2_w, w.layer2_b), 0.0)
    return H


def pooled_embedding(H: np.ndarray) -> np.ndarray:
    """Mean over nodes; permutation invariant."""
    if H.shape[0] < 1:
        raise EmptyGraph("no node features to pool")
    return H.mean(axis=0)
