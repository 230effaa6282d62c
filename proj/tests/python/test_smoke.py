import math

import pytest

import beamrl


def test_codebook_unit_norm():
    cb = beamrl.Codebook(8)
    assert len(cb) == 8
    for n in range(len(cb)):
        assert math.isclose(sum(abs(x) ** 2 for x in cb[n]), 1.0, rel_tol=1e-12)
    with pytest.raises(IndexError):
        cb[8]


def test_environment_episode():
    env = beamrl.Environment(beamrl.scenario_preset("sub6"), beamrl.EnvConfig())
    state = env.reset(7)
    assert len(state) == 8
    out = env.step([20.0, 20.0, 0.0, 0.0])
    assert len(out.next_state) == 8
    assert out.info.powers_dbm == [20.0, 20.0]
    with pytest.raises(beamrl.ContractViolation):
        env.step([math.nan, 0.0, 0.0, 0.0])


def test_step_before_reset_is_usage_error():
    env = beamrl.Environment()
    with pytest.raises(beamrl.UsageError):
        env.step([0.0, 0.0, 0.0, 0.0])


def test_config_and_errors():
    cfg = beamrl.parse_config_text("episodes=4\nalpha=0.8\n")
    assert "discount=0.8" in cfg.to_text()
    with pytest.raises(beamrl.ConfigError):
        beamrl.parse_config_text("antennas=3")
    with pytest.raises(ValueError):
        cfg.set("tau", "2")


def test_fpa_power_and_reward():
    assert f"{beamrl.fpa_power(beamrl.scenario_preset('sub6'), 100, 25):.2f}" == "40.00"
    assert beamrl.hierarchical_reward(5.0, [1, 2, 3, 4], [1, 2, 3, 4]) == 5.0
    assert beamrl.hierarchical_reward(5.0, [1, 2, 3, 4], [2, 2, 3, 4], 0.5) == 4.5


def test_agent_and_cell():
    cfg = beamrl.parse_config_text("episodes=3\neval_episodes=2\ncheckpoints=false\nwidth=6\ndepth=2\n")
    env = beamrl.Environment(cfg.scenario, cfg.env)
    agent = beamrl.make_agent("ddpg", env, cfg, 1)
    agent.begin_training(2)
    res = agent.run_episode(env, 11, True)
    assert 1 <= res.steps <= 50
    assert agent.episodes_trained == 1

    cell = beamrl.run_cell(cfg, "qlearning", 1, 0)
    assert cell.summary.algorithm == "qlearning"
    assert len(cell.eval_sum_rates) == 2
    assert 0.0 <= cell.summary.abort_rate <= 1.0


def test_metrics():
    pts = beamrl.ccdf([1.0, 2.0, 3.0], [0.0, 2.0, 5.0])
    assert [p for _, p in pts] == pytest.approx([1.0, 1.0 / 3.0, 0.0])
    assert len(beamrl.threshold_grid(-5.0, 40.0, 0.5)) == 91
    assert beamrl.sum_rate([[3.0, 1.0]], 2) == pytest.approx(1.5)
    assert beamrl.convergence_point([3.0] * 50) == 0
