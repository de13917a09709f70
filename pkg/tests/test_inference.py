import pytest

from graphact import (CotHead, InferenceSchedule, SCENARIOS, build_default_vocab,
                      default_config, gen_episode, init_flow_expert,
                      init_gnn_weights, make_rng, run_inference_loop)
from graphact.inference import outputs_to_dict
from graphact.sim import EmptyEpisode

CFG = default_config()


@pytest.fixture(scope="module")
def artifacts():
    d, h, d_out = CFG.gnn_dims
    gnn_w = init_gnn_weights(make_rng(0), d=d, h=h, d_out=d_out)
    expert = init_flow_expert(make_rng(1), horizon=4, j_dim=CFG.j_total,
                              context_dim=CFG.context_dim, sigma=CFG.sigma)
    head = CotHead(build_default_vocab(), context_dim=CFG.context_dim,
                   window=CFG.cot_window, rng=make_rng(2))
    return gnn_w, expert, head


def test_default_schedule_single_cot(artifacts):
    ep = gen_episode(SCENARIOS["food"], 0, 10, seed=30, cfg=CFG)
    outputs, report = run_inference_loop(ep, *artifacts, InferenceSchedule(), CFG)
    assert len(outputs) == 10
    assert outputs[0].cot_text is not None
    assert all(o.cot_text is None for o in outputs[1:])
    assert all(o.actions.shape == (4, CFG.j_total) for o in outputs)
    assert set(report.stages) == {"graph_build", "encode", "cot_generation",
                                  "action_sampling"}
    assert report.stages["cot_generation"]["count"] == 1


def test_cot_period_schedule(artifacts):
    ep = gen_episode(SCENARIOS["food"], 0, 12, seed=31, cfg=CFG)
    outputs, _ = run_inference_loop(ep, *artifacts,
                                    InferenceSchedule(cot_period=5), CFG)
    emitted = [o.index for o in outputs if o.cot_text is not None]
    assert emitted == [0, 5, 10]


def test_cot_emission_count_formula(artifacts):
    n = 11
    ep = gen_episode(SCENARIOS["outfit"], 0, n, seed=32, cfg=CFG)
    for period in (1, 2, 3, 7):
        outputs, _ = run_inference_loop(ep, *artifacts,
                                        InferenceSchedule(cot_period=period), CFG)
        emitted = sum(1 for o in outputs if o.cot_text is not None)
        assert emitted == 1 + (n - 1) // period


def test_no_first_cot(artifacts):
    ep = gen_episode(SCENARIOS["food"], 1, 4, seed=33, cfg=CFG)
    outputs, report = run_inference_loop(
        ep, *artifacts, InferenceSchedule(cot_on_first_frame=False), CFG)
    assert all(o.cot_text is None for o in outputs)
    assert "cot_generation" not in report.stages


def test_outputs_deterministic_given_seed(artifacts):
    ep = gen_episode(SCENARIOS["food"], 0, 6, seed=34, cfg=CFG)
    a, _ = run_inference_loop(ep, *artifacts, InferenceSchedule(), CFG, seed=9)
    b, _ = run_inference_loop(ep, *artifacts, InferenceSchedule(), CFG, seed=9)
    assert outputs_to_dict(a) == outputs_to_dict(b)
    c, _ = run_inference_loop(ep, *artifacts, InferenceSchedule(), CFG, seed=10)
    assert outputs_to_dict(c) != outputs_to_dict(a)


def test_empty_episode_raises(artifacts):
    ep = gen_episode(SCENARIOS["food"], 0, 2, seed=35, cfg=CFG)
    ep.frames = []
    with pytest.raises(EmptyEpisode):
        run_inference_loop(ep, *artifacts, InferenceSchedule(), CFG)


def test_schedule_validation():
    with pytest.raises(ValueError):
        InferenceSchedule(cot_period=0)
    with pytest.raises(ValueError):
        InferenceSchedule(rate_budget_hz=0.0)


def test_pacing_limits_rate(artifacts):
    ep = gen_episode(SCENARIOS["food"], 0, 5, seed=36, cfg=CFG)
    schedule = InferenceSchedule(pace=True, rate_budget_hz=50.0)
    _, report = run_inference_loop(ep, *artifacts, schedule, CFG)
    assert report.achieved_hz <= 50.0 + 1.0
