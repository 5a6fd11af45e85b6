import logging

import numpy as np

from qtgrasp.agents import BaseAgent
from qtgrasp.approximator import ParamSnapshot
from qtgrasp.config import EVAL_SEED_KEY, MAX_SEED
from qtgrasp.schemas import EvalReport, SeedEval, SimConfig
from qtgrasp.sim import run_episode

logger = logging.getLogger(__name__)


def evaluate_policy(
    agent: BaseAgent, params: ParamSnapshot, sim: SimConfig, episodes: int, seed: int
) -> SeedEval:
    """
    Greedy (epsilon = 0) success rate over `episodes` fresh bins.

    The bins depend on `seed` only, so successive evaluations of one run are
    played on the same set of bins.
    """
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}.")
    rng = np.random.default_rng(np.random.SeedSequence([seed, EVAL_SEED_KEY]))

    def greedy(obs: np.ndarray, r: np.random.Generator):
        return agent.act(obs, params, r)

    successes = 0
    total_return = 0.0
    for episode_id in range(episodes):
        env_seed = int(rng.integers(MAX_SEED))
        record = run_episode(sim, env_seed, greedy, rng, episode_id=episode_id, policy_id="greedy")
        successes += int(record.success)
        total_return += record.episode_return
    return SeedEval(
        seed=seed,
        episodes=episodes,
        success_rate=successes / episodes,
        mean_return=total_return / episodes,
    )


def evaluate_checkpoint(
    agent: BaseAgent, params: ParamSnapshot, sim: SimConfig, episodes: int, seeds: list[int]
) -> EvalReport:
    """Per-seed greedy evaluation plus mean and standard deviation across seeds."""
    if not seeds:
        raise ValueError("At least one evaluation seed is required.")
    per_seed = [evaluate_policy(agent, params, sim, episodes, seed) for seed in seeds]
    rates = np.array([s.success_rate for s in per_seed])
    report = EvalReport(
        episodes=episodes,
        success_rate=float(rates.mean()),
        success_rate_std=float(rates.std()),
        mean_return=float(np.mean([s.mean_return for s in per_seed])),
        risk=str(agent.risk),
        per_seed=per_seed,
    )
    logger.info(
        f"Evaluated v{params.version} over {len(seeds)} seed(s) x {episodes} episodes: "
        f"success {report.success_rate:.3f} +/- {report.success_rate_std:.3f}"
    )
    return report
