# config.py

import logging
import tomllib
from pathlib import Path

import tomli_w
from pydantic import ValidationError

from qtgrasp.exceptions import ConfigError
from qtgrasp.schemas import ExperimentConfig

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.toml"
METRICS_FILE = "metrics.csv"
EPISODES_FILE = "episodes.jsonl"
CHECKPOINT_DIR = "checkpoints"
FINAL_CHECKPOINT = "final.ckpt"
NETWORK_FILE = "network.json"
DEFAULT_OUT_DIR = Path("runs")
DEFAULT_RUN_LABEL = "default"

EVAL_SEED_KEY = 0x5EED
MAX_SEED = 2**63


def _key_path(loc: tuple) -> str:
    return ".".join(str(part) for part in loc)


def load_config(path: Path) -> ExperimentConfig:
    """
    Reads an experiment file. Missing keys take their defaults; unknown keys
    and invalid values raise ConfigError listing every failing key path.
    """
    if not path.exists() or not path.is_file():
        raise ConfigError(f"Config file not found: '{path}'")
    try:
        with path.open("rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Config file '{path}' is not valid TOML: {e}") from e

    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        paths = [_key_path(err["loc"]) for err in e.errors()]
        details = "; ".join(f"{_key_path(err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"Invalid config '{path}': {details}", key_paths=paths) from e

    logger.info(f"Loaded config from {path} (agent {cfg.run.agent.value}, seeds {cfg.seeds})")
    return cfg


def dumps_config(cfg: ExperimentConfig) -> str:
    """Every field written explicitly, so the output doubles as a reference file."""
    return tomli_w.dumps(cfg.model_dump(mode="json"))


def dump_config(cfg: ExperimentConfig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_config(cfg), encoding="utf-8")
    return path
