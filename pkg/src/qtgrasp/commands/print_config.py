from typing import Optional

from qtgrasp.config import dumps_config
from qtgrasp.recipes import get_recipe
from qtgrasp.schemas import ExperimentConfig


def print_config(recipe: Optional[str] = None) -> str:
    """
    The reference config with every default spelled out. With a recipe, one
    commented block per variant.
    """
    base = ExperimentConfig()
    if recipe is None:
        return dumps_config(base)
    blocks = [f"# --- {label} ---\n{dumps_config(cfg)}" for label, cfg in get_recipe(recipe)(base)]
    return "\n".join(blocks)
