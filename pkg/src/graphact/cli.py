"""Command-line surface: data generation, graph building, training, hybrid
inference, benchmarking, and the embedded oracle suite.

Exit codes: 0 ok, 2 validation failure, 3 I/O failure, 4 oracle-suite
failure. Errors are emitted as one JSON object on stderr. The PIPELINE_CONFIG
environment variable supplies a default --config path.
"""

import argparse
import glob
import json
import os
import sys

import numpy as np

from .core import PipelineConfig, PipelineError, derive_seed, make_rng
from .cot import (CotHead, build_default_vocab, make_cot_label, tokenize,
                  train_cot_head)
from .flow import FlowExpert, init_flow_expert, train_step
from .gnn import GnnWeights, encode, init_gnn_weights, pooled_embedding
from .graph import GraphOptions, build_graph, graph_to_json
from .inference import (InferenceSchedule, make_context, outputs_to_dict,
                        run_inference_loop, scenario_onehot)
from .selfcheck import run_selfcheck
from .sim import SCENARIOS, default_config, gen_episode, load_episode, write_episode


def _load_config(path) -> PipelineConfig:
    path = path or os.environ.get("PIPELINE_CONFIG")
    if path:
        return PipelineConfig.load(path)
    return default_config()


def _loss_csv_path(out: str) -> str:
    root, ext = os.path.splitext(out)
    return root + ".loss.csv" if ext else out + ".loss.csv"


def _write_loss_csv(path, rows) -> None:
    with open(path, "w") as f:
        f.write("step,loss\n")
        for step, loss in rows:
            f.write(f"{step},{float(loss)}\n")


def cmd_gen(args) -> int:
    cfg = _load_config(args.config)
    scenario = SCENARIOS[args.scenario]
    os.makedirs(args.out, exist_ok=True)
    scen_idx = sorted(SCENARIOS).index(args.scenario)
    for i in range(args.episodes):
        seed = derive_seed(args.seed, scen_idx, args.variant, i)
        ep = gen_episode(scenario, args.variant, args.frames, seed, cfg)
        write_episode(ep, os.path.join(args.out, f"{args.scenario}_v{args.variant}_{i:03d}.jsonl"))
    print(f"wrote {args.episodes} episode(s) to {args.out}")
    return 0


def cmd_graph(args) -> int:
    cfg = _load_config(args.config)
    ep = load_episode(args.episode)
    opts = GraphOptions(joints_as_nodes=not args.paper_literal,
                        kinematic_edges=not args.paper_literal)
    os.makedirs(args.out, exist_ok=True)
    for i, frame in enumerate(ep.frames):
        g = build_graph(frame, ep.K, ep.T, cfg.chains, opts)
        with open(os.path.join(args.out, f"graph_{i:05d}.json"), "w") as f:
            f.write(graph_to_json(g) + "\n")
    print(f"wrote {len(ep.frames)} graph(s) to {args.out}")
    return 0


def _gnn_for_seed(cfg: PipelineConfig, seed: int) -> GnnWeights:
    d, h, d_out = cfg.gnn_dims
    return init_gnn_weights(make_rng(seed), d=d, h=h, d_out=d_out)


def cmd_init_weights(args) -> int:
    cfg = _load_config(args.config)
    if args.kind == "gnn":
        _gnn_for_seed(cfg, args.seed).save(args.out)
    elif args.kind == "expert":
        expert = init_flow_expert(make_rng(args.seed), horizon=cfg.flow_horizon,
                                  j_dim=cfg.j_total, context_dim=cfg.context_dim,
                                  hidden=cfg.flow_hidden, alpha=cfg.flow_alpha,
                                  beta=cfg.flow_beta, sigma=cfg.sigma)
        expert.save(args.out)
    else:
        vocab = build_default_vocab()
        CotHead(vocab, context_dim=cfg.context_dim, window=cfg.cot_window,
                hidden=cfg.cot_hidden, embed=cfg.cot_embed,
                rng=make_rng(args.seed)).save(args.out)
    print(f"wrote {args.kind} weights to {args.out}")
    return 0


def _episode_files(data_dir: str) -> list:
    files = sorted(glob.glob(os.path.join(data_dir, "*.jsonl")))
    if not files:
        raise PipelineError(f"no episode files (*.jsonl) under {data_dir}")
    return files


def _frame_context(frame, ep, cfg, gnn_w) -> np.ndarray:
    g = build_graph(frame, ep.K, ep.T, cfg.chains)
    pooled = pooled_embedding(encode(g, gnn_w))
    return make_context(pooled, frame.q, scenario_onehot(cfg, ep.scenario.name))


def _action_chunk(ep, t: int, horizon: int) -> np.ndarray:
    """Future joint targets q_{t+1..t+H}, holding the last frame at the end."""
    rows = [ep.trajectory[min(t + 1 + k, len(ep.trajectory) - 1)] for k in range(horizon)]
    return np.stack(rows)


def cmd_train_expert(args) -> int:
    cfg = _load_config(args.config)
    gnn_w = GnnWeights.load(args.gnn) if args.gnn else _gnn_for_seed(cfg, args.seed)
    dataset = []
    for path in _episode_files(args.data):
        ep = load_episode(path)
        for t, frame in enumerate(ep.frames):
            dataset.append((_action_chunk(ep, t, cfg.flow_horizon),
                            _frame_context(frame, ep, cfg, gnn_w)))
    expert = init_flow_expert(make_rng(derive_seed(args.seed, 0)),
                              horizon=cfg.flow_horizon, j_dim=cfg.j_total,
                              context_dim=cfg.context_dim, hidden=cfg.flow_hidden,
                              alpha=cfg.flow_alpha, beta=cfg.flow_beta, sigma=cfg.sigma)
    rng = make_rng(derive_seed(args.seed, 1))
    rows = []
    for step in range(args.steps):
        idx = rng.choice(len(dataset), size=min(args.batch, len(dataset)), replace=False)
        rows.append((step, train_step(expert, [dataset[i] for i in idx], args.lr, rng)))
    expert.save(args.out)
    _write_loss_csv(_loss_csv_path(args.out), rows)
    print(f"trained expert on {len(dataset)} samples; "
          f"loss {rows[0][1]:.4f} -> {rows[-1][1]:.4f}" if rows else "no steps run")
    return 0


def cmd_train_cot(args) -> int:
    cfg = _load_config(args.config)
    gnn_w = GnnWeights.load(args.gnn) if args.gnn else _gnn_for_seed(cfg, args.seed)
    vocab = build_default_vocab()
    samples = []
    for path in _episode_files(args.data):
        ep = load_episode(path)
        frames = range(0, len(ep.frames), args.stride) if args.stride > 0 else [0]
        for t in frames:
            label = make_cot_label(ep.scene, ep.scenario, ep, t, dt=cfg.cot_dt_frames)
            ids = tokenize(label.to_text(), vocab) + [vocab.end_id]
            samples.append((_frame_context(ep.frames[t], ep, cfg, gnn_w), ids, label.to_text()))
    if args.dump_dataset:
        from .cot import write_cot_dataset
        write_cot_dataset(args.dump_dataset, samples)
    head = CotHead(vocab, context_dim=cfg.context_dim, window=cfg.cot_window,
                   hidden=cfg.cot_hidden, embed=cfg.cot_embed,
                   rng=make_rng(derive_seed(args.seed, 0)))
    dataset = [(ctx, ids) for ctx, ids, _ in samples]
    curve = train_cot_head(head, dataset, args.lr, args.epochs, make_rng(derive_seed(args.seed, 1)))
    head.save(args.out)
    _write_loss_csv(_loss_csv_path(args.out), list(enumerate(curve)))
    print(f"trained reasoning head on {len(dataset)} samples; "
          f"mean loss {curve[0]:.4f} -> {curve[-1]:.4f}")
    return 0


def _schedule_from_args(args) -> InferenceSchedule:
    return InferenceSchedule(cot_on_first_frame=not args.no_first_cot,
                             cot_period=args.cot_period,
                             rate_budget_hz=args.rate_hz, pace=args.pace)


def _load_artifacts(args):
    try:
        gnn_w = GnnWeights.load(args.gnn)
        expert = FlowExpert.load(args.expert)
        head = CotHead.load(args.cot_head)
    except (OSError, KeyError, ValueError) as exc:
        from .inference import ArtifactLoadError
        raise ArtifactLoadError(str(exc)) from exc
    return gnn_w, expert, head


def cmd_infer(args) -> int:
    cfg = _load_config(args.config)
    ep = load_episode(args.episode)
    gnn_w, expert, head = _load_artifacts(args)
    outputs, report = run_inference_loop(ep, gnn_w, expert, head,
                                         _schedule_from_args(args), cfg,
                                         seed=args.seed, euler_steps=args.steps)
    with open(args.out, "w") as f:
        json.dump(outputs_to_dict(outputs), f)
        f.write("\n")
    n_cot = sum(1 for o in outputs if o.cot_text is not None)
    print(f"{len(outputs)} frame(s), {n_cot} with reasoning; "
          f"mean frame {report.frame_ms['mean_ms']:.2f} ms -> {args.out}")
    return 0


def cmd_bench(args) -> int:
    cfg = _load_config(args.config)
    ep = load_episode(args.episode)
    gnn_w, expert, head = _load_artifacts(args)
    schedule = InferenceSchedule()  # free-running
    reports = []
    for _ in range(args.repeat):
        _, report = run_inference_loop(ep, gnn_w, expert, head, schedule, cfg)
        reports.append(report)
    agg = {
        "runs": [r.to_dict() for r in reports],
        "aggregate": {
            "mean_frame_ms": float(np.mean([r.frame_ms["mean_ms"] for r in reports])),
            "p95_frame_ms": float(np.mean([r.frame_ms["p95_ms"] for r in reports])),
            "achieved_hz": float(np.mean([r.achieved_hz for r in reports])),
        },
    }
    text = json.dumps(agg, indent=2)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    print(text)
    return 0


def cmd_selfcheck(args) -> int:
    results = run_selfcheck()
    failed = False
    for name, ok, detail in results:
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}")
        failed |= not ok
    return 4 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphact", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="pipeline config JSON")

    g = sub.add_parser("gen", help="generate synthetic episodes")
    g.add_argument("--scenario", choices=sorted(SCENARIOS), required=True)
    g.add_argument("--variant", type=int, required=True)
    g.add_argument("--episodes", type=int, default=1)
    g.add_argument("--frames", type=int, default=60)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    common(g)
    g.set_defaults(fn=cmd_gen)

    g = sub.add_parser("graph", help="build per-frame scene graphs")
    g.add_argument("--episode", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--paper-literal", action="store_true",
                   help="minimal graph mode: end-effector nodes and object-to-"
                        "end-effector edges only")
    common(g)
    g.set_defaults(fn=cmd_graph)

    g = sub.add_parser("init-weights", help="write seeded random weights")
    g.add_argument("--kind", choices=("gnn", "expert", "cot"), required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    common(g)
    g.set_defaults(fn=cmd_init_weights)

    g = sub.add_parser("train-expert", help="train the action expert on episodes")
    g.add_argument("--data", required=True)
    g.add_argument("--steps", type=int, default=500)
    g.add_argument("--lr", type=float, default=5e-4,
                   help="plain-GD step; scale inversely with action dimension")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--batch", type=int, default=16)
    g.add_argument("--gnn", default=None, help="GNN weights file (default: derived from --seed)")
    g.add_argument("--out", required=True)
    common(g)
    g.set_defaults(fn=cmd_train_expert)

    g = sub.add_parser("train-cot", help="train the reasoning head on episodes")
    g.add_argument("--data", required=True)
    g.add_argument("--epochs", type=int, default=50)
    g.add_argument("--lr", type=float, default=0.2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--stride", type=int, default=0,
                   help="label every Nth frame (default: first frame only)")
    g.add_argument("--gnn", default=None)
    g.add_argument("--dump-dataset", default=None, help="also write the dataset JSONL")
    g.add_argument("--out", required=True)
    common(g)
    g.set_defaults(fn=cmd_train_cot)

    g = sub.add_parser("infer", help="run the hybrid inference loop")
    g.add_argument("--episode", required=True)
    g.add_argument("--gnn", required=True)
    g.add_argument("--expert", required=True)
    g.add_argument("--cot-head", required=True)
    g.add_argument("--cot-period", type=int, default=None)
    g.add_argument("--no-first-cot", action="store_true")
    g.add_argument("--rate-hz", type=float, default=10.0)
    g.add_argument("--pace", action="store_true", help="rate-limit to --rate-hz")
    g.add_argument("--steps", type=int, default=None, help="Euler integration steps")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    common(g)
    g.set_defaults(fn=cmd_infer)

    g = sub.add_parser("bench", help="free-running timing report")
    g.add_argument("--episode", required=True)
    g.add_argument("--gnn", required=True)
    g.add_argument("--expert", required=True)
    g.add_argument("--cot-head", required=True)
    g.add_argument("--repeat", type=int, default=3)
    g.add_argument("--out", default=None)
    common(g)
    g.set_defaults(fn=cmd_bench)

    g = sub.add_parser("selfcheck", help="run the embedded oracle suite")
    g.set_defaults(fn=cmd_selfcheck)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PipelineError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
