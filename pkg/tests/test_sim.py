import math

import numpy as np
import pytest

from qtgrasp.cem import ActionMode, HybridAction
from qtgrasp.exceptions import EpisodeDoneError, PlacementError
from qtgrasp.schemas import SimConfig
from qtgrasp.sim import (
    BinObject,
    ScriptedPolicy,
    WorldState,
    near_optimal_policy,
    reset,
    run_episode,
    scripted_policy,
    step,
)
from qtgrasp.sim.env import HOME_POSE, SENTINEL

CFG = SimConfig()
MOVE_NOWHERE = HybridAction(cont=np.zeros(4), mode=ActionMode.MOVE)
CLOSE = HybridAction(cont=np.zeros(4), mode=ActionMode.CLOSE_GRIPPER)
TERMINATE = HybridAction(cont=np.zeros(4), mode=ActionMode.TERMINATE)


def one_object_state(gripper=(0.0, 0.0, 0.0, 0.0), **kw) -> WorldState:
    return WorldState(gripper=gripper, objects=(BinObject(x=0.0, y=0.0, radius=0.08),), **kw)


def scripted_success_rate(cfg: SimConfig, policy, episodes: int, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    successes = 0
    for episode in range(episodes):
        state, obs = reset(cfg, seed * 1_000_003 + episode)
        done = False
        while not done:
            state, obs, reward, done, _ = step(state, policy(obs, rng), cfg, rng)
        successes += reward == cfg.success_reward
    return successes / episodes


# --- reset ---


def test_reset_is_deterministic():
    a_state, a_obs = reset(CFG, 11)
    b_state, b_obs = reset(CFG, 11)
    assert a_state == b_state
    assert np.array_equal(a_obs, b_obs)
    assert reset(CFG, 12)[0] != a_state


def test_reset_object_counts_and_layout():
    counts = set()
    for seed in range(10_000):
        state, obs = reset(CFG, seed)
        counts.add(len(state.objects))
        if seed % 100 == 0:
            for i, obj in enumerate(state.objects):
                assert abs(obj.x) + obj.radius <= CFG.bin_extent
                assert abs(obj.y) + obj.radius <= CFG.bin_extent
                for other in state.objects[i + 1 :]:
                    assert math.hypot(obj.x - other.x, obj.y - other.y) >= obj.radius + other.radius
    assert counts == {8, 9, 10, 11, 12}


def test_reset_observation_layout():
    cfg = SimConfig(num_objects=(2, 2), max_objects=4)
    state, obs = reset(cfg, 0)
    assert state.gripper == HOME_POSE
    assert obs.shape == (cfg.observation_dim,) == (18,)
    assert np.array_equal(obs[:6], [0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    assert np.all(obs[12:] == SENTINEL)
    assert np.all(obs[6:12] != SENTINEL)


def test_reset_placement_failure():
    cfg = SimConfig(num_objects=(12, 12), object_radius=(0.5, 0.5))
    with pytest.raises(PlacementError):
        reset(cfg, 0)


# --- step ---


def test_move_in_empty_space():
    state, _ = reset(CFG, 0)
    action = HybridAction(cont=[0.1, -0.1, 0.0, 0.5], mode=ActionMode.MOVE)
    state, obs, reward, done, info = step(state, action, CFG, np.random.default_rng(0))
    assert reward == pytest.approx(-0.01)
    assert not done
    assert state.gripper[:3] == pytest.approx((0.1, -0.1, 1.0))
    assert obs[:3] == pytest.approx([0.1, -0.1, 1.0])
    assert info == {"grasped": False, "slipped": False, "success": False, "truncated": False}


def test_move_is_clamped_to_workspace():
    state = one_object_state(gripper=(0.9, -0.9, 0.5, 0.0))
    state, _, _, _, _ = step(state, HybridAction(cont=[1.0, -1.0, -1.0, 0.0]), CFG, np.random.default_rng(0))
    assert state.gripper[:3] == (1.0, -1.0, 0.0)


def test_terminate_with_held_object():
    state = one_object_state(gripper_closed=True, held_object=0)
    state, _, reward, done, info = step(state, TERMINATE, CFG, np.random.default_rng(0))
    assert reward == 1.0
    assert done and info["success"]
    assert not state.objects[0].alive
    assert state.live_objects == []


def test_terminate_empty_handed():
    state, _, reward, done, info = step(one_object_state(), TERMINATE, CFG, np.random.default_rng(0))
    assert reward == 0.0
    assert done and not info["success"]


def test_close_on_object_center_always_grasps():
    cfg = SimConfig(grasp_noise=0.0)
    for seed in range(50):
        state, _, reward, done, info = step(one_object_state(), CLOSE, cfg, np.random.default_rng(seed))
        assert info["grasped"]
        assert state.held_object == 0 and state.gripper_closed
        assert reward == pytest.approx(-0.01) and not done


def test_close_above_bin_or_far_away_misses():
    high = one_object_state(gripper=(0.0, 0.0, 0.5, 0.0))
    far = one_object_state(gripper=(0.5, 0.5, 0.0, 0.0))
    for state in (high, far):
        state, _, _, _, info = step(state, CLOSE, CFG, np.random.default_rng(0))
        assert not info["grasped"]
        assert state.held_object is None and state.gripper_closed


def test_lifting_can_slip():
    cfg = SimConfig(slip_prob=1.0)
    state = one_object_state(gripper_closed=True, held_object=0)
    lift = HybridAction(cont=[0.2, 0.0, 1.0, 0.0])
    state, obs, _, _, info = step(state, lift, cfg, np.random.default_rng(0))
    assert info["slipped"]
    assert state.held_object is None
    assert obs[5] == 0.0


def test_held_object_moves_with_gripper():
    cfg = SimConfig(slip_prob=0.0)
    state = one_object_state(gripper_closed=True, held_object=0)
    state, _, _, _, _ = step(state, HybridAction(cont=[0.3, 0.2, 0.5, 0.0]), cfg, np.random.default_rng(0))
    assert (state.objects[0].x, state.objects[0].y) == pytest.approx((0.3, 0.2))
    state, _, _, _, _ = step(state, HybridAction(cont=np.zeros(4), mode=ActionMode.OPEN_GRIPPER), cfg, np.random.default_rng(0))
    assert state.held_object is None and not state.gripper_closed


def test_truncation_at_max_steps():
    cfg = SimConfig(max_steps=3)
    state, _ = reset(cfg, 0)
    rng = np.random.default_rng(0)
    rewards = []
    done = False
    while not done:
        state, _, reward, done, info = step(state, MOVE_NOWHERE, cfg, rng)
        rewards.append(reward)
    assert rewards == pytest.approx([-0.01, -0.01, 0.0])
    assert info["truncated"]
    with pytest.raises(EpisodeDoneError):
        step(state, MOVE_NOWHERE, cfg, rng)


def test_transitions_are_reproducible():
    actions = [HybridAction(cont=[0.2, 0.1, -1.0, 0.0]), CLOSE, HybridAction(cont=[0.0, 0.0, 1.0, 0.0]), TERMINATE]

    def rollout():
        rng = np.random.default_rng(7)
        state, obs = reset(CFG, 3)
        trace = [obs]
        for action in actions:
            state, obs, reward, done, _ = step(state, action, CFG, rng)
            trace.extend([obs, np.array([reward, done])])
        return np.concatenate(trace)

    assert np.array_equal(rollout(), rollout())


# --- scripted policy ---


def test_scripted_episodes_are_short_and_well_formed():
    for seed in range(200):
        record = run_episode(CFG, seed, ScriptedPolicy(CFG), np.random.default_rng(seed))
        assert len(record.transitions) <= CFG.max_steps
        assert record.transitions[-1].terminal
        assert record.transitions[-1].action.mode == ActionMode.TERMINATE
        assert {t.reward for t in record.transitions} <= {-0.01, 0.0, 1.0}
        assert -0.19 - 1e-9 <= record.episode_return <= 1.0
        assert record.success == (record.transitions[-1].reward == 1.0)


def test_run_episode_is_deterministic():
    a = run_episode(CFG, 5, scripted_policy, np.random.default_rng(1))
    b = run_episode(CFG, 5, scripted_policy, np.random.default_rng(1))
    assert a == b


def test_scripted_success_rate():
    rate = scripted_success_rate(CFG, ScriptedPolicy(CFG), 2_000)
    assert abs(rate - 0.46) <= 0.05


@pytest.mark.slow
def test_scripted_success_rate_large_sample():
    rate = scripted_success_rate(CFG, ScriptedPolicy(CFG), 10_000, seed=1)
    assert abs(rate - 0.46) <= 0.05


def test_near_optimal_policy_beats_scripted():
    near = scripted_success_rate(CFG, near_optimal_policy(CFG), 1_000)
    scripted = scripted_success_rate(CFG, ScriptedPolicy(CFG), 1_000)
    assert near > scripted + 0.25
