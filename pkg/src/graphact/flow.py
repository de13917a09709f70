"""Flow-matching action expert.

Training regresses a vector field v(A_tau, context, tau) toward the
displacement eps - A along interpolants A_tau = tau*A + (1-tau)*eps, with
tau ~ Beta(alpha, beta) and eps ~ N(0, sigma^2 I). Sampling integrates
dA/dtau = -v with Euler steps from pure noise at tau = 0: the interpolant
path has derivative A - eps, i.e. minus the regression target.

The network is a small MLP (two tanh hidden layers) trained by plain
gradient descent with optional momentum; gradients are hand-derived and
verified against central differences by grad_check.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .core import PipelineError, ShapeMismatch


class EmptyBatch(PipelineError):
    pass


class InvalidShapeParam(PipelineError):
    pass


@dataclass
class FlowExpert:
    """Vector-field MLP: input [A_flat, context, tau] -> velocity (D_a,)."""

    horizon: int                 # H_a, action chunk length
    j_dim: int                   # joint dims per action step
    context_dim: int
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    learning_rate: float = 0.05
    momentum: float = 0.0
    alpha: float = 1.5
    beta: float = 1.0
    sigma: float = 1.0
    _velocity: dict = field(default_factory=dict, repr=False)  # momentum buffers

    @property
    def action_dim(self) -> int:
        return self.horizon * self.j_dim

    @property
    def input_dim(self) -> int:
        return self.action_dim + self.context_dim + 1

    def params(self) -> list:
        return [("w1", self.w1), ("b1", self.b1), ("w2", self.w2),
                ("b2", self.b2), ("w3", self.w3), ("b3", self.b3)]

    def forward(self, X: np.ndarray) -> np.ndarray:
        """Batched field evaluation; X is (B, input_dim)."""
        v, _ = self._forward_cached(X)
        return v

    def _forward_cached(self, X: np.ndarray):
        if X.shape[1] != self.input_dim:
            raise ShapeMismatch(f"expected input dim {self.input_dim}, got {X.shape[1]}")
        z1 = X @ self.w1 + self.b1
        a1 = np.tanh(z1)
        z2 = a1 @ self.w2 + self.b2
        a2 = np.tanh(z2)
        v = a2 @ self.w3 + self.b3
        return v, (X, a1, a2)

    def _backward(self, cache, dV: np.ndarray) -> dict:
        """Gradients of a scalar loss given dL/dV; reverse of _forward_cached."""
        X, a1, a2 = cache
        grads = {}
        grads["w3"] = a2.T @ dV
        grads["b3"] = dV.sum(axis=0)
        dz2 = (dV @ self.w3.T) * (1.0 - a2 ** 2)
        grads["w2"] = a1.T @ dz2
        grads["b2"] = dz2.sum(axis=0)
        dz1 = (dz2 @ self.w2.T) * (1.0 - a1 ** 2)
        grads["w1"] = X.T @ dz1
        grads["b1"] = dz1.sum(axis=0)
        return grads

    def field(self, A_flat: np.ndarray, context: np.ndarray, tau: float) -> np.ndarray:
        x = np.concatenate([np.ravel(A_flat), np.ravel(context), [tau]])
        return self.forward(x[None, :])[0]

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon, "j_dim": self.j_dim, "context_dim": self.context_dim,
            "learning_rate": self.learning_rate, "momentum": self.momentum,
            "alpha": self.alpha, "beta": self.beta, "sigma": self.sigma,
            "w1": self.w1.tolist(), "b1": self.b1.tolist(),
            "w2": self.w2.tolist(), "b2": self.b2.tolist(),
            "w3": self.w3.tolist(), "b3": self.b3.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlowExpert":
        def arr(x):
            return np.array(x, dtype=float)
        return cls(horizon=int(d["horizon"]), j_dim=int(d["j_dim"]),
                   context_dim=int(d["context_dim"]),
                   w1=arr(d["w1"]), b1=arr(d["b1"]), w2=arr(d["w2"]), b2=arr(d["b2"]),
                   w3=arr(d["w3"]), b3=arr(d["b3"]),
                   learning_rate=float(d["learning_rate"]), momentum=float(d["momentum"]),
                   alpha=float(d["alpha"]), beta=float(d["beta"]), sigma=float(d["sigma"]))

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "FlowExpert":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def init_flow_expert(rng: np.random.Generator, horizon: int, j_dim: int,
                     context_dim: int, hidden: int = 64, **hyper) -> FlowExpert:
    d_a = horizon * j_dim
    d_in = d_a + context_dim + 1

    def mat(n_in, n_out):
        return rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_in, n_out))

    return FlowExpert(horizon=horizon, j_dim=j_dim, context_dim=context_dim,
                      w1=mat(d_in, hidden), b1=np.zeros(hidden),
                      w2=mat(hidden, hidden), b2=np.zeros(hidden),
                      w3=mat(hidden, d_a), b3=np.zeros(d_a), **hyper)


def sample_tau(alpha: float, beta: float, rng: np.random.Generator) -> float:
    """Beta(alpha, beta) draw, guaranteed strictly inside (0, 1)."""
    if alpha <= 0 or beta <= 0:
        raise InvalidShapeParam(f"Beta shape parameters must be positive, got ({alpha}, {beta})")
    x = rng.beta(alpha, beta)
    while not 0.0 < x < 1.0:
        x = rng.beta(alpha, beta)
    return float(x)


def interpolate(A: np.ndarray, eps: np.ndarray, tau: float) -> np.ndarray:
    """tau*A + (1-tau)*eps, elementwise; endpoints are exact."""
    if A.shape != eps.shape:
        raise ShapeMismatch(f"chunk shapes differ: {A.shape} vs {eps.shape}")
    if tau == 1.0:
        return A.copy()
    if tau == 0.0:
        return eps.copy()
    return tau * A + (1.0 - tau) * eps


def target_field(A: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Denoising target eps - A."""
    if A.shape != eps.shape:
        raise ShapeMismatch(f"chunk shapes differ: {A.shape} vs {eps.shape}")
    return eps - A


def _draw_batch(expert: FlowExpert, batch: list, rng: np.random.Generator):
    """Fresh (tau, eps) per element; returns stacked inputs X and targets U."""
    if not batch:
        raise EmptyBatch("batch must be non-empty")
    X = np.zeros((len(batch), expert.input_dim))
    U = np.zeros((len(batch), expert.action_dim))
    for i, (A, context) in enumerate(batch):
        A = np.asarray(A, dtype=float)
        if A.size != expert.action_dim:
            raise ShapeMismatch(f"chunk has {A.size} entries, expert expects {expert.action_dim}")
        tau = sample_tau(expert.alpha, expert.beta, rng)
        eps = rng.normal(0.0, expert.sigma, size=A.shape)
        A_tau = interpolate(A, eps, tau)
        X[i] = np.concatenate([A_tau.ravel(), np.ravel(context), [tau]])
        U[i] = target_field(A, eps).ravel()
    return X, U


def fm_loss(expert: FlowExpert, batch: list, rng: np.random.Generator) -> float:
    """Mean over the batch of ||v(A_tau, ctx, tau) - (eps - A)||^2."""
    X, U = _draw_batch(expert, batch, rng)
    V = expert.forward(X)
    return float(np.sum((V - U) ** 2) / len(batch))


def _loss_and_grads(expert: FlowExpert, X: np.ndarray, U: np.ndarray):
    V, cache = expert._forward_cached(X)
    diff = V - U
    loss = float(np.sum(diff ** 2) / X.shape[0])
    grads = expert._backward(cache, 2.0 * diff / X.shape[0])
    return loss, grads


def train_step(expert: FlowExpert, batch: list, lr: float, rng: np.random.Generator) -> float:
    """One gradient-descent step on fm_loss; returns the pre-step loss."""
    if lr < 0:
        raise ValueError("learning rate must be non-negative")
    X, U = _draw_batch(expert, batch, rng)
    loss, grads = _loss_and_grads(expert, X, U)
    for name, p in expert.params():
        g = grads[name]
        if expert.momentum > 0.0:
            buf = expert._velocity.get(name)
            buf = g if buf is None else expert.momentum * buf + g
            expert._velocity[name] = buf
            g = buf
        p -= lr * g
    return loss


def grad_check(expert: FlowExpert, sample, h: float = 1e-5,
               n_params: int = 100, rng: np.random.Generator = None) -> float:
    """Max relative error between analytic and central-difference gradients.

    tau and eps are drawn once and frozen so the loss is a deterministic
    function of the parameters.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    rng = rng if rng is not None else np.random.default_rng(0)
    A, context = sample
    A = np.asarray(A, dtype=float)
    tau = sample_tau(expert.alpha, expert.beta, rng)
    eps = rng.normal(0.0, expert.sigma if expert.sigma > 0 else 1.0, size=A.shape)
    X = np.concatenate([interpolate(A, eps, tau).ravel(), np.ravel(context), [tau]])[None, :]
    U = target_field(A, eps).ravel()[None, :]

    _, grads = _loss_and_grads(expert, X, U)

    def loss_only():
        V = expert.forward(X)
        return float(np.sum((V - U) ** 2))

    names = [name for name, _ in expert.params()]
    sizes = [p.size for _, p in expert.params()]
    total = sum(sizes)
    picks = rng.choice(total, size=min(n_params, total), replace=False)
    bounds = np.cumsum([0] + sizes)

    worst = 0.0
    arrays = dict(expert.params())
    for flat_idx in picks:
        k = int(np.searchsorted(bounds, flat_idx, side="right") - 1)
        name = names[k]
        p = arrays[name]
        idx = np.unravel_index(int(flat_idx - bounds[k]), p.shape)
        orig = p[idx]
        p[idx] = orig + h
        lp = loss_only()
        p[idx] = orig - h
        lm = loss_only()
        p[idx] = orig
        cd = (lp - lm) / (2.0 * h)
        an = grads[name][idx]
        rel = abs(an - cd) / (abs(an) + abs(cd) + 1e-12)
        worst = max(worst, rel)
    return worst


def sample_actions(expert: FlowExpert, context: np.ndarray, steps: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Euler-integrate the learned field from noise; returns an (H_a, J) chunk.

    Start A = eps ~ N(0, sigma^2 I) at tau = 0 and repeatedly apply
    A <- A - v(A, context, tau) * dtau. Deterministic given (rng state,
    steps, context, weights).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    A = rng.normal(0.0, expert.sigma, size=expert.action_dim)
    dtau = 1.0 / steps
    ctx = np.ravel(context)
    for k in range(steps):
        tau = k * dtau
        x = np.concatenate([A, ctx, [tau]])
        A = A - expert.forward(x[None, :])[0] * dtau
    return A.reshape(expert.horizon, expert.j_dim)
