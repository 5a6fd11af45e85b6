from typing import Callable

import numpy as np

from qtgrasp.cem.actions import ActionMode, HybridAction
from qtgrasp.schemas import EpisodeRecord, SimConfig, StepRecord
from qtgrasp.sim.env import SENTINEL, reset, step

Policy = Callable[[np.ndarray, np.random.Generator], HybridAction]


class ScriptedPolicy:
    """
    Lower onto a randomly chosen object (plus Gaussian aim noise), close, terminate.

    Stateless: the phase is read off the observation.
    """

    def __init__(self, cfg: SimConfig, aim_sigma: float | None = None):
        self.cfg = cfg
        self.aim_sigma = cfg.scripted_aim_sigma if aim_sigma is None else aim_sigma

    def __call__(self, obs: np.ndarray, rng: np.random.Generator) -> HybridAction:
        x, y, z = obs[0], obs[1], obs[2]
        if obs[4] > 0.5:
            return HybridAction(cont=np.zeros(4), mode=ActionMode.TERMINATE)
        if z > self.cfg.grasp_height:
            slots = obs[6:].reshape(-1, 3)
            live = slots[slots[:, 0] != SENTINEL]
            if len(live):
                target = live[int(rng.integers(len(live))), :2]
                aim = target + rng.normal(0.0, self.aim_sigma, size=2)
            else:
                aim = rng.uniform(-self.cfg.bin_extent, self.cfg.bin_extent, size=2)
            dxy = (aim - np.array([x, y])) / self.cfg.move_scale_xy
            return HybridAction(cont=np.array([dxy[0], dxy[1], -1.0, 0.0]), mode=ActionMode.MOVE)
        return HybridAction(cont=np.zeros(4), mode=ActionMode.CLOSE_GRIPPER)


def scripted_policy(
    obs: np.ndarray, rng: np.random.Generator, cfg: SimConfig | None = None
) -> HybridAction:
    """The exploration policy under `cfg` (default SimConfig)."""
    return ScriptedPolicy(cfg or SimConfig())(obs, rng)


def near_optimal_policy(cfg: SimConfig) -> ScriptedPolicy:
    return ScriptedPolicy(cfg, aim_sigma=cfg.near_optimal_aim_sigma)


def run_episode(
    cfg: SimConfig,
    seed: int,
    policy: Policy,
    rng: np.random.Generator,
    episode_id: int = 0,
    policy_id: str = "scripted",
) -> EpisodeRecord:
    """Plays one episode in a fresh bin; environment noise and the policy share `rng`."""
    state, obs = reset(cfg, seed)
    steps: list[StepRecord] = []
    success = False
    done = False
    while not done:
        action = policy(obs, rng)
        state, next_obs, reward, done, info = step(state, action, cfg, rng)
        steps.append(
            StepRecord(
                state=obs.tolist(),
                action=action.to_record(),
                reward=reward,
                next_state=next_obs.tolist(),
                terminal=done,
            )
        )
        success = success or info["success"]
        obs = next_obs
    return EpisodeRecord(
        episode_id=episode_id,
        seed=seed,
        policy_id=policy_id,
        transitions=steps,
        success=success,
    )
