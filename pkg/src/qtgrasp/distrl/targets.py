import numpy as np

from qtgrasp.schemas import LossConfig


def bellman_target(
    r,
    terminal,
    v: np.ndarray,
    cfg: LossConfig = LossConfig(),
    *,
    q_min: float = -0.2,
    q_max: float = 1.0,
) -> np.ndarray:
    """
    r * 1 + gamma * v, or r * 1 for terminal steps, clamped to [q_min, q_max].

    `v` is (K,) for a single transition or (B, K) with `r` and `terminal` of
    shape (B,).
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] < 1:
        raise ValueError("bellman_target needs a non-empty value vector.")
    r = np.asarray(r, dtype=np.float64)[..., None]
    live = 1.0 - np.asarray(terminal, dtype=np.float64)[..., None]
    return np.clip(r + cfg.gamma * live * v, q_min, q_max)
