import numpy as np

from qtgrasp.approximator import GradVector, ParamSnapshot, backward, forward
from qtgrasp.distrl import qr_loss, sample_taus

from .base import BaseAgent


class Q2FOptAgent(BaseAgent):
    """
    Implicit-quantile head. Prediction and target sides draw independent
    U[0, 1] taus per transition (`iqn_taus` and `iqn_target_taus` of them);
    only the policy distorts its taus.
    """

    @property
    def label_width(self) -> int:
        return self.run.iqn_target_taus

    def prediction_taus(self, batch: int, rng: np.random.Generator) -> np.ndarray:
        return sample_taus((batch, self.run.iqn_taus), rng)

    def target_taus(self, batch: int, rng: np.random.Generator) -> np.ndarray:
        return sample_taus((batch, self.run.iqn_target_taus), rng)

    def loss_and_grad(
        self,
        params: ParamSnapshot,
        states: np.ndarray,
        actions: np.ndarray,
        targets: np.ndarray,
        taus: np.ndarray | None,
    ) -> tuple[float, GradVector, float]:
        if taus is None:
            raise ValueError("Q2F-Opt training needs the prediction taus stored with each label.")
        q = forward(params, states, actions, taus, spec=self.spec)
        loss, upstream = qr_loss(q, targets, taus, self.loss)
        grad = backward(params, states, actions, taus, upstream, spec=self.spec)
        return loss, grad, float(np.mean(q))
