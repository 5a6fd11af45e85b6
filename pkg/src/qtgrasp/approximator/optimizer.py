import logging
from dataclasses import dataclass

import numpy as np

from qtgrasp.approximator.snapshot import GradVector, ParamSnapshot
from qtgrasp.exceptions import NonFiniteGradientError, ShapeMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AdamState:
    """Adam moments; owned by the trainer."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: ParamSnapshot, **hyper) -> "AdamState":
        size = len(params)
        return cls(m=np.zeros(size), v=np.zeros(size), **hyper)


def adam_step(
    params: ParamSnapshot, grad: GradVector, state: AdamState, lr: float
) -> tuple[ParamSnapshot, AdamState]:
    """
    One bias-corrected Adam update. Returns a new snapshot with version + 1.

    A gradient with NaN or infinite entries is rejected before anything changes.
    """
    g = np.asarray(grad.values, dtype=np.float64)
    if g.shape != params.values.shape or state.m.shape != g.shape:
        raise ShapeMismatchError(
            f"gradient of length {g.size} does not match parameters of length {len(params)}."
        )
    if not np.all(np.isfinite(g)):
        bad = int(np.count_nonzero(~np.isfinite(g)))
        logger.error(f"Rejecting Adam step at v{params.version}: {bad} non-finite gradient entries")
        raise NonFiniteGradientError(f"gradient has {bad} non-finite entries; step rejected.")

    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    values = params.values - lr * m_hat / (np.sqrt(v_hat) + state.eps)

    new_state = AdamState(m=m, v=v, t=t, beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    return params.with_values(values, version=params.version + 1), new_state
