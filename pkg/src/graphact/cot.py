"""Structured reasoning machinery.

Labels are generated rule-based from simulator ground truth: a scene listing,
a feasibility verdict against the scenario's requirement set, a grasp plan,
and imagined future object positions / robot state at the sampled future
frames. All text lives in a closed vocabulary (template words plus binned
numeric tokens, 1 cm for positions and 0.01 rad for joints) so a small
autoregressive head can be supervised with exact cross-entropy.
"""

import json
from dataclasses import dataclass

import numpy as np

from .core import PipelineError
from .sim import SCENARIOS, EmptyEpisode, Episode, InstructionScenario, Scene

PAD, END, SEP = "<pad>", "<end>", "<sep>"

ALL_PRESENT = "all_present"
SOME_MISSING = "some_missing"
NONE_PRESENT = "none_present"


class UnknownToken(PipelineError):
    pass


class EmptyDataset(PipelineError):
    pass


class InvalidProbability(PipelineError):
    pass


def future_indices(t: int, dt: int) -> tuple:
    """Future sampling frames: (floor(t/dt)*dt + dt, t + dt)."""
    if t < 0 or dt < 1:
        raise ValueError("need t >= 0 and dt >= 1")
    return (t // dt) * dt + dt, t + dt


def bin_token(v: float) -> str:
    """0.01-step numeric token; '-0.00' normalizes to '0.00'."""
    s = f"{float(v):.2f}"
    return "0.00" if s == "-0.00" else s


@dataclass
class CotLabel:
    scene_description: str
    feasibility_feedback: str
    subtask_plan: str
    future_objects: str
    future_robot_state: str
    branch: str = ALL_PRESENT   # feasibility branch that fired
    clamped: bool = False       # future frames clamped to episode end

    def sections(self) -> list:
        return [self.scene_description, self.feasibility_feedback, self.subtask_plan,
                self.future_objects, self.future_robot_state]

    def to_text(self) -> str:
        return f" {SEP} ".join(self.sections())


def _join_labels(labels) -> str:
    return " , ".join(labels)


def make_cot_label(scene: Scene, instruction: InstructionScenario,
                   episode: Episode, t: int, dt: int = 30) -> CotLabel:
    """Deterministic ground-truth label for frame t of an episode."""
    if not episode.frames:
        raise EmptyEpisode("cannot label an episode with no frames")
    n = len(episode.frames)
    t_obj, t_robot = future_indices(t, dt)
    clamped = t_obj > n - 1 or t_robot > n - 1
    t_obj_c = min(t_obj, n - 1)
    t_robot_c = min(t_robot, n - 1)

    present = scene.labels()
    if present:
        desc = f"on the desk : {_join_labels(present)} ."
    else:
        desc = "the desk is empty ."

    have = [lbl for lbl in instruction.required if lbl in present]
    missing = [lbl for lbl in instruction.required if lbl not in present]
    if not missing:
        branch = ALL_PRESENT
        feedback = f"all required items available : {_join_labels(have)} ."
        plan_targets = list(instruction.required)
    elif have:
        branch = SOME_MISSING
        feedback = f"missing: {_join_labels(missing)} . add the missing items first ."
        plan_targets = have
    else:
        branch = NONE_PRESENT
        feedback = f"missing: {_join_labels(missing)} . task not feasible ."
        plan_targets = []

    if plan_targets:
        plan = "plan : " + " then ".join(f"grasp {lbl}" for lbl in plan_targets) + " ."
    else:
        plan = "plan : none ."

    if scene.objects:
        parts = [f"{o.label} at {bin_token(o.position[0])} {bin_token(o.position[1])} "
                 f"{bin_token(o.position[2])}" for o in scene.objects]
        future_obj = f"at frame {t_obj_c} : {' , '.join(parts)} ."
    else:
        future_obj = f"at frame {t_obj_c} : nothing ."

    q = episode.trajectory[t_robot_c]
    future_robot = f"at frame {t_robot_c} : joints {' '.join(bin_token(v) for v in q)} ."

    return CotLabel(scene_description=desc, feasibility_feedback=feedback,
                    subtask_plan=plan, future_objects=future_obj,
                    future_robot_state=future_robot, branch=branch, clamped=clamped)


_TEMPLATE_WORDS = (
    "on the desk : , . is empty all required items available missing: missing "
    "add first then plan grasp none task not feasible at frame nothing joints"
).split()


class TokenVocab:
    """Closed, ordered vocabulary with a bijective token <-> id mapping."""

    def __init__(self, tokens):
        self.tokens = list(tokens)
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        self.ids = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.ids[PAD]

    @property
    def end_id(self) -> int:
        return self.ids[END]

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.tokens, f)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "TokenVocab":
        with open(path) as f:
            return cls(json.load(f))


def build_default_vocab(max_frame: int = 360, value_range: float = 3.2) -> TokenVocab:
    """Vocabulary covering the label generator's whole output language."""
    tokens = [PAD, END, SEP]
    words = list(_TEMPLATE_WORDS)
    for scen in SCENARIOS.values():
        words.extend(scen.universe)
        words.extend(scen.instruction_text.split())
    for w in words:
        if w not in tokens:
            tokens.append(w)
    for i in range(max_frame + 1):
        tokens.append(str(i))
    n_bins = int(round(value_range * 100))
    tokens.extend(bin_token(i / 100.0) for i in range(-n_bins, n_bins + 1))
    return TokenVocab(tokens)


def tokenize(text: str, vocab: TokenVocab) -> list:
    """Whitespace tokenization over the closed vocabulary."""
    ids = []
    for tok in text.split():
        if tok not in vocab.ids:
            raise UnknownToken(f"token {tok!r} not in vocabulary")
        ids.append(vocab.ids[tok])
    return ids


def detokenize(ids, vocab: TokenVocab) -> str:
    return " ".join(vocab.tokens[i] for i in ids)


def ce_loss(logits: np.ndarray, targets) -> float:
    """Summed cross-entropy -sum_i log softmax(logits_i)[target_i]."""
    logits = np.asarray(logits, dtype=float)
    targets = np.asarray(targets, dtype=int).reshape(-1)
    if logits.ndim != 2 or logits.shape[0] != targets.size:
        raise PipelineError(f"logits {logits.shape} do not match {targets.size} targets")
    m = logits.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(logits - m).sum(axis=1))
    return float(np.sum(lse - logits[np.arange(targets.size), targets]))


class CotHead:
    """Context projection + single-hidden-layer next-token network over a
    fixed window of previous tokens."""

    def __init__(self, vocab: TokenVocab, context_dim: int, window: int = 8,
                 embed: int = 16, ctx_embed: int = 16, hidden: int = 64,
                 rng: np.random.Generator = None):
        rng = rng if rng is not None else np.random.default_rng(0)
        V = len(vocab)
        self.vocab = vocab
        self.context_dim = context_dim
        self.window = window
        x_dim = ctx_embed + window * embed

        def mat(n_in, n_out):
            return rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_in, n_out))

        self.wc = mat(context_dim, ctx_embed)
        self.bc = np.zeros(ctx_embed)
        self.emb = rng.normal(0.0, 0.1, size=(V, embed))
        self.w1 = mat(x_dim, hidden)
        self.b1 = np.zeros(hidden)
        self.w2 = mat(hidden, V)
        self.b2 = np.zeros(V)

    def params(self) -> list:
        return [("wc", self.wc), ("bc", self.bc), ("emb", self.emb),
                ("w1", self.w1), ("b1", self.b1), ("w2", self.w2), ("b2", self.b2)]

    def _windows(self, token_ids) -> np.ndarray:
        """(T, window) matrix of the previous tokens for each position."""
        padded = [self.vocab.pad_id] * self.window + list(token_ids[:-1])
        return np.array([padded[k:k + self.window] for k in range(len(token_ids))],
                        dtype=int)

    def _forward(self, context, windows: np.ndarray):
        c = np.ravel(context) @ self.wc + self.bc
        e = self.emb[windows].reshape(windows.shape[0], -1)
        X = np.concatenate([np.tile(c, (windows.shape[0], 1)), e], axis=1)
        a1 = np.tanh(X @ self.w1 + self.b1)
        logits = a1 @ self.w2 + self.b2
        return logits, (X, a1, windows)

    def sequence_logits(self, context, token_ids) -> np.ndarray:
        """Teacher-forced logits (T, V) for every position of a sequence."""
        logits, _ = self._forward(context, self._windows(token_ids))
        return logits

    def loss_and_grads(self, context, token_ids):
        """Mean per-token cross-entropy and analytic parameter gradients."""
        targets = np.asarray(token_ids, dtype=int)
        T = targets.size
        logits, (X, a1, windows) = self._forward(context, self._windows(token_ids))
        m = logits.max(axis=1, keepdims=True)
        p = np.exp(logits - m)
        p /= p.sum(axis=1, keepdims=True)
        loss = float(-np.mean(np.log(p[np.arange(T), targets] + 1e-300)))
        dlogits = p.copy()
        dlogits[np.arange(T), targets] -= 1.0
        dlogits /= T
        grads = {}
        grads["w2"] = a1.T @ dlogits
        grads["b2"] = dlogits.sum(axis=0)
        dz1 = (dlogits @ self.w2.T) * (1.0 - a1 ** 2)
        grads["w1"] = X.T @ dz1
        grads["b1"] = dz1.sum(axis=0)
        dX = dz1 @ self.w1.T
        n_ctx = self.wc.shape[1]
        dc = dX[:, :n_ctx].sum(axis=0)
        grads["wc"] = np.outer(np.ravel(context), dc)
        grads["bc"] = dc
        grads["emb"] = np.zeros_like(self.emb)
        demb = dX[:, n_ctx:].reshape(T, self.window, -1)
        np.add.at(grads["emb"], windows, demb)
        return loss, grads

    def to_dict(self) -> dict:
        return {"tokens": self.vocab.tokens, "context_dim": self.context_dim,
                "window": self.window,
                **{name: p.tolist() for name, p in self.params()}}

    @classmethod
    def from_dict(cls, d: dict) -> "CotHead":
        vocab = TokenVocab(d["tokens"])
        head = cls.__new__(cls)
        head.vocab = vocab
        head.context_dim = int(d["context_dim"])
        head.window = int(d["window"])
        for name in ("wc", "bc", "emb", "w1", "b1", "w2", "b2"):
            setattr(head, name, np.array(d[name], dtype=float))
        return head

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "CotHead":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def train_cot_head(head: CotHead, dataset: list, lr: float, epochs: int,
                   rng: np.random.Generator) -> list:
    """Teacher-forced SGD over (context, token ids) pairs; returns the
    per-epoch mean per-token loss curve."""
    if not dataset:
        raise EmptyDataset("CoT training needs at least one sample")
    curve = []
    for _ in range(epochs):
        order = rng.permutation(len(dataset))
        losses = []
        for idx in order:
            context, token_ids = dataset[idx]
            loss, grads = head.loss_and_grads(context, token_ids)
            for name, p in head.params():
                p -= lr * grads[name]
            losses.append(loss)
        curve.append(float(np.mean(losses)))
    return curve


def grad_check_cot(head: CotHead, sample, h: float = 1e-5, n_params: int = 100,
                   rng: np.random.Generator = None) -> float:
    """Max relative error of analytic vs central-difference gradients."""
    rng = rng if rng is not None else np.random.default_rng(0)
    context, token_ids = sample
    _, grads = head.loss_and_grads(context, token_ids)

    def loss_only():
        return head.loss_and_grads(context, token_ids)[0]

    names = [name for name, _ in head.params()]
    sizes = [p.size for _, p in head.params()]
    bounds = np.cumsum([0] + sizes)
    picks = rng.choice(bounds[-1], size=min(n_params, int(bounds[-1])), replace=False)
    arrays = dict(head.params())
    worst = 0.0
    for flat_idx in picks:
        k = int(np.searchsorted(bounds, flat_idx, side="right") - 1)
        p = arrays[names[k]]
        idx = np.unravel_index(int(flat_idx - bounds[k]), p.shape)
        orig = p[idx]
        p[idx] = orig + h
        lp = loss_only()
        p[idx] = orig - h
        lm = loss_only()
        p[idx] = orig
        cd = (lp - lm) / (2.0 * h)
        an = grads[names[k]][idx]
        worst = max(worst, abs(an - cd) / (abs(an) + abs(cd) + 1e-12))
    return worst


def generate_cot(head: CotHead, context, max_len: int) -> list:
    """Greedy argmax decoding until <end> or max_len; ties break to the
    lowest token id, so decoding is deterministic."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    window = [head.vocab.pad_id] * head.window
    out = []
    for _ in range(max_len):
        logits, _ = head._forward(context, np.array([window], dtype=int))
        nxt = int(np.argmax(logits[0]))
        if nxt == head.vocab.end_id:
            break
        out.append(nxt)
        window = window[1:] + [nxt]
    return out


def sample_dropout(p: float, rng: np.random.Generator) -> int:
    """Bernoulli(p) gate; 1 means the reasoning loss is dropped."""
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"p must be in [0, 1], got {p}")
    return int(rng.random() < p)


def total_loss(l_cot: float, l_action: float, d: int, lambda_cot: float,
               lambda_action: float) -> float:
    """(1 - d)*(lambda_cot*l_cot + lambda_action*l_action) + d*l_action."""
    if d not in (0, 1):
        raise ValueError("d must be 0 or 1")
    if d == 1:
        return l_action
    return lambda_cot * l_cot + lambda_action * l_action


def write_cot_dataset(path, samples) -> None:
    """JSONL dataset: {context: [...], tokens: [...], text: '...'} per line."""
    with open(path, "w") as f:
        for context, token_ids, text in samples:
            f.write(json.dumps({"context": [float(v) for v in np.ravel(context)],
                                "tokens": [int(i) for i in token_ids],
                                "text": text}) + "\n")


def read_cot_dataset(path) -> list:
    samples = []
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            samples.append((np.array(rec["context"], dtype=float),
                            list(rec["tokens"]), rec["text"]))
    return samples
