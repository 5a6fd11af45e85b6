from pathlib import Path
from typing import Optional

from qtgrasp.agents import get_agent
from qtgrasp.approximator import load_snapshot
from qtgrasp.config import CONFIG_FILE, load_config
from qtgrasp.exceptions import ConfigError
from qtgrasp.pipeline import evaluate_checkpoint
from qtgrasp.risk import parse_risk
from qtgrasp.schemas import EvalReport, ExperimentConfig


def resolve_run_config(checkpoint: Path, config: Optional[Path]) -> ExperimentConfig:
    """An explicit config, else the config.toml of the run the checkpoint belongs to."""
    if config is not None:
        return load_config(config)
    for directory in (checkpoint.parent, checkpoint.parent.parent):
        candidate = directory / CONFIG_FILE
        if candidate.exists():
            return load_config(candidate)
    raise ConfigError(f"No {CONFIG_FILE} found next to '{checkpoint}'; pass --config.")


def evaluate(
    checkpoint: Path,
    episodes: int,
    seeds: list[int],
    risk: Optional[str] = None,
    config: Optional[Path] = None,
) -> EvalReport:
    """Greedy evaluation of a saved checkpoint, optionally under a different risk metric."""
    if episodes < 1:
        raise ValueError(f"--episodes must be >= 1, got {episodes}.")
    if not checkpoint.exists():
        raise FileNotFoundError(f"Checkpoint not found: '{checkpoint}'")
    cfg = resolve_run_config(checkpoint, config)
    agent = get_agent(cfg, risk=parse_risk(risk) if risk else None)
    params = load_snapshot(checkpoint, agent.spec)
    return evaluate_checkpoint(agent, params, cfg.sim, episodes, seeds)
