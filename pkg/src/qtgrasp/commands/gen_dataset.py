from pathlib import Path
from typing import Optional

from qtgrasp.commands.evaluate import resolve_run_config
from qtgrasp.config import load_config
from qtgrasp.dataset import generate_dataset, parse_policy_spec
from qtgrasp.dataset.generate import Progress
from qtgrasp.schemas import DatasetReport, ExperimentConfig


def gen_dataset(
    policy: str,
    episodes: int,
    out: Path,
    config: Optional[Path] = None,
    seed: int = 0,
    progress: Progress = iter,
) -> DatasetReport:
    """
    Collects a dataset. Snapshot-based policies read the network config from
    the checkpoint's run directory unless `config` is given.
    """
    kind, arg = parse_policy_spec(policy)
    if kind in ("snapshot", "mixture"):
        cfg = resolve_run_config(arg, config)
    elif config is not None:
        cfg = load_config(config)
    else:
        cfg = ExperimentConfig()
    return generate_dataset(policy, episodes, cfg, out, seed=seed, progress=progress)
