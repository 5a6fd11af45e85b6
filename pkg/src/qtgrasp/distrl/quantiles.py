import numpy as np


def quantile_midpoints(n: int) -> np.ndarray:
    """tau_i = (2i - 1) / (2n) for i = 1..n."""
    if n < 1:
        raise ValueError(f"number of quantiles must be >= 1, got {n}.")
    return (np.arange(n, dtype=np.float64) + 0.5) / n


def sample_taus(n: int | tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """i.i.d. U[0, 1] probabilities; `n` may be a shape for batched draws."""
    shape = (n,) if isinstance(n, int) else tuple(n)
    if any(d < 1 for d in shape):
        raise ValueError(f"tau sample shape must be positive, got {shape}.")
    return rng.random(shape)
