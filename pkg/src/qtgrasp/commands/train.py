import logging
from pathlib import Path
from typing import Optional

from qtgrasp.config import CONFIG_FILE, DEFAULT_RUN_LABEL, dump_config, load_config
from qtgrasp.pipeline import run_offline, run_online
from qtgrasp.recipes import get_recipe
from qtgrasp.schemas import ExperimentConfig, RunMode, RunSummary

logger = logging.getLogger(__name__)


def train(
    config: Optional[Path],
    out: Path,
    recipe: Optional[str] = None,
    seeds: Optional[list[int]] = None,
    dataset: Optional[Path] = None,
) -> list[RunSummary]:
    """
    Runs every (variant, seed) pair of an experiment.

    Each run gets its own directory `<out>/<label>/seed-<n>/` holding the
    resolved config, metrics CSV and checkpoints.

    Args:
        config: Experiment file; None uses the built-in defaults.
        out: Root directory for run directories.
        recipe: Optional recipe name expanding the config into variants.
        seeds: Overrides the config's seed list.
        dataset: Overrides `run.dataset_path` for offline variants.
    """
    base = load_config(config) if config is not None else ExperimentConfig()
    if seeds:
        base = base.model_copy(update={"seeds": list(seeds)})
    variants = get_recipe(recipe)(base) if recipe else [(DEFAULT_RUN_LABEL, base)]

    summaries = []
    for label, cfg in variants:
        for seed in cfg.seeds:
            run_dir = out / label / f"seed-{seed}"
            dump_config(cfg, run_dir / CONFIG_FILE)
            if cfg.run.mode == RunMode.ONLINE:
                summary = run_online(cfg, seed, run_dir)
            else:
                summary = run_offline(cfg, seed, run_dir, dataset)
            summaries.append(summary)
    logger.info(f"Completed {len(summaries)} run(s) under {out}")
    return summaries
