import itertools
import logging
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from qtgrasp.agents import get_agent
from qtgrasp.approximator import load_snapshot
from qtgrasp.cem import HybridAction, random_action
from qtgrasp.config import EPISODES_FILE, MAX_SEED
from qtgrasp.dataset.store import EpisodeReader, EpisodeWriter
from qtgrasp.schemas import DatasetReport, ExperimentConfig
from qtgrasp.sim import Policy, ScriptedPolicy, near_optimal_policy, run_episode

logger = logging.getLogger(__name__)

POLICY_KINDS = ("scripted", "near-optimal", "snapshot", "replay", "mixture")
# greedy snapshot / epsilon-greedy snapshot / epsilon-greedy scripted
MIXTURE_WEIGHTS = (0.39, 0.22, 0.39)

Progress = Callable[[Iterable], Iterable]


def parse_policy_spec(config_string: str) -> tuple[str, Path | None]:
    """Splits 'kind' or 'kind:path'; kinds that load something require the path."""
    kind, _, arg = config_string.strip().partition(":")
    kind = kind.lower()
    if kind not in POLICY_KINDS:
        supported = ", ".join(f"'{k}'" for k in POLICY_KINDS)
        raise ValueError(f"Unsupported dataset policy: '{kind}'. Supported policies: {supported}.")
    if kind in ("snapshot", "replay", "mixture"):
        if not arg:
            raise ValueError(f"Dataset policy '{kind}' needs a path, e.g. '{kind}:runs/default/seed-0'.")
        return kind, Path(arg)
    if arg:
        raise ValueError(f"Dataset policy '{kind}' takes no argument.")
    return kind, None


def _epsilon(policy: Policy, epsilon: float) -> Policy:
    def wrapped(obs: np.ndarray, rng: np.random.Generator) -> HybridAction:
        if rng.random() < epsilon:
            return random_action(rng)
        return policy(obs, rng)

    return wrapped


def _replay(source: Path, episodes: int, out: Path, progress: Progress) -> EpisodeWriter:
    path = source / EPISODES_FILE if source.is_dir() else source
    with EpisodeReader(path) as reader, EpisodeWriter(out) as writer:
        for record in progress(itertools.islice(reader, episodes)):
            writer.write(record)
    return writer


def generate_dataset(
    policy: str,
    episodes: int,
    cfg: ExperimentConfig,
    out: Path,
    seed: int = 0,
    progress: Progress = iter,
) -> DatasetReport:
    """
    Writes `episodes` episodes collected by `policy` to `out` and reports the
    measured success rate. `replay:` copies up to `episodes` records of an
    existing episode file instead of collecting.
    """
    if episodes < 0:
        raise ValueError(f"episodes must be >= 0, got {episodes}.")
    kind, arg = parse_policy_spec(policy)
    logger.info(f"Generating {episodes} episodes with policy '{policy}' into {out}")

    if kind == "replay":
        writer = _replay(arg, episodes, out, progress)
    else:
        rng = np.random.default_rng(seed)
        choices: list[tuple[str, Policy]]
        if kind == "scripted":
            choices = [("scripted", ScriptedPolicy(cfg.sim))]
        elif kind == "near-optimal":
            choices = [("near-optimal", near_optimal_policy(cfg.sim))]
        else:
            agent = get_agent(cfg)
            params = load_snapshot(arg, agent.spec)

            def greedy(obs: np.ndarray, r: np.random.Generator) -> HybridAction:
                return agent.act(obs, params, r)

            choices = [("snapshot", greedy)]
            if kind == "mixture":
                epsilon = cfg.run.epsilon
                choices += [
                    ("snapshot-epsilon", _epsilon(greedy, epsilon)),
                    ("scripted-epsilon", _epsilon(ScriptedPolicy(cfg.sim), epsilon)),
                ]

        with EpisodeWriter(out) as writer:
            for episode_id in progress(range(episodes)):
                index = 0 if len(choices) == 1 else int(rng.choice(len(choices), p=MIXTURE_WEIGHTS))
                policy_id, act = choices[index]
                env_seed = int(rng.integers(MAX_SEED))
                writer.write(run_episode(cfg.sim, env_seed, act, rng, episode_id, policy_id))

    rate = writer.successes / writer.episodes if writer.episodes else 0.0
    logger.info(f"Dataset {out}: {writer.episodes} episodes, success rate {rate:.3f}")
    return DatasetReport(
        path=str(out),
        policy=policy,
        episodes=writer.episodes,
        transitions=writer.transitions,
        success_rate=rate,
    )
