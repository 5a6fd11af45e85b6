import logging

import numpy as np

from qtgrasp.approximator import GradVector, ParamSnapshot, backward, forward
from qtgrasp.distrl import scalar_ce_loss_on_values
from qtgrasp.risk import NEUTRAL

from .base import BaseAgent

logger = logging.getLogger(__name__)


class QtOptAgent(BaseAgent):
    """Scalar sigmoid head trained with cross-entropy against scalar Bellman targets."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if self.risk != NEUTRAL:
            logger.warning(f"Risk '{self.risk}' has no effect on a scalar head; acting risk-neutrally.")

    @property
    def label_width(self) -> int:
        return 1

    def prediction_taus(self, batch: int, rng: np.random.Generator) -> None:
        return None

    def target_taus(self, batch: int, rng: np.random.Generator) -> None:
        return None

    def loss_and_grad(
        self,
        params: ParamSnapshot,
        states: np.ndarray,
        actions: np.ndarray,
        targets: np.ndarray,
        taus: np.ndarray | None,
    ) -> tuple[float, GradVector, float]:
        y = forward(params, states, actions, spec=self.spec)
        loss, upstream = scalar_ce_loss_on_values(y, targets, self.spec.q_min, self.spec.q_max)
        grad = backward(params, states, actions, None, upstream, spec=self.spec)
        return loss, grad, float(np.mean(y))
