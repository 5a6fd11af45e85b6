import numpy as np

from qtgrasp.approximator import GradVector, ParamSnapshot, backward, forward
from qtgrasp.distrl import qr_loss, quantile_midpoints

from .base import BaseAgent


class Q2ROptAgent(BaseAgent):
    """Fixed-quantile head: N values at the midpoint probabilities."""

    @property
    def label_width(self) -> int:
        return self.spec.num_quantiles

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
        q = forward(params, states, actions, spec=self.spec)
        loss, upstream = qr_loss(q, targets, quantile_midpoints(self.spec.num_quantiles), self.loss)
        grad = backward(params, states, actions, None, upstream, spec=self.spec)
        return loss, grad, float(np.mean(q))
