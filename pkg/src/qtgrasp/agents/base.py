import logging
from abc import ABC, abstractmethod

import numpy as np

from qtgrasp.approximator import GradVector, ParamSnapshot, forward, init_params
from qtgrasp.cem import HybridAction, epsilon_greedy, policy_act, policy_act_batch
from qtgrasp.distrl import bellman_target
from qtgrasp.risk import MEAN, RiskMetricSpec, ScoreFn
from qtgrasp.schemas import CEMConfig, LossConfig, NetworkSpec, RunConfig

logger = logging.getLogger(__name__)


class BaseAgent(ABC):
    """
    Abstract base class for the three agent kinds.

    An agent binds a network head to its policy (risk metric and score
    function), its Bellman target and its training loss. It holds no
    parameters itself; every method takes the snapshot to use.
    """

    def __init__(
        self,
        spec: NetworkSpec,
        run: RunConfig,
        loss: LossConfig,
        cem: CEMConfig,
        risk: RiskMetricSpec | None = None,
    ):
        """
        Args:
            spec: Network architecture; its head must match the agent kind.
            run: Run settings (tau counts, default risk, score weights).
            loss: Huber threshold, discount and clipped-min switch.
            cem: Action optimizer settings.
            risk: Overrides `run.risk` when given.
        """
        self.spec = spec
        self.run = run
        self.loss = loss
        self.cem = cem
        self.risk = run.risk if risk is None else risk
        self.psi = ScoreFn.weighted(run.score_weights) if run.score_weights else MEAN
        logger.info(
            f"Initialized agent {self.__class__.__name__} (head {spec.head.value}, risk {self.risk})"
        )

    @property
    @abstractmethod
    def label_width(self) -> int:
        """Length of the target vector attached to every transition."""

    @abstractmethod
    def prediction_taus(self, batch: int, rng: np.random.Generator) -> np.ndarray | None:
        """taus for the prediction side of the loss, stored with the label; None if unused."""

    @abstractmethod
    def target_taus(self, batch: int, rng: np.random.Generator) -> np.ndarray | None:
        """taus at which target networks are evaluated; None if unused."""

    @abstractmethod
    def loss_and_grad(
        self,
        params: ParamSnapshot,
        states: np.ndarray,
        actions: np.ndarray,
        targets: np.ndarray,
        taus: np.ndarray | None,
    ) -> tuple[float, GradVector, float]:
        """Batch loss, its parameter gradient, and the mean predicted value."""

    def init_params(self, seed: int) -> ParamSnapshot:
        return init_params(self.spec, seed)

    def act(
        self,
        obs: np.ndarray,
        params: ParamSnapshot,
        rng: np.random.Generator,
        epsilon: float = 0.0,
    ) -> HybridAction:
        greedy = policy_act(
            obs, params, self.spec, self.risk, self.psi, self.cem, rng, self.run.policy_taus
        )
        return epsilon_greedy(greedy, epsilon, rng) if epsilon > 0.0 else greedy

    def select_actions(
        self, states: np.ndarray, params: ParamSnapshot, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]:
        """Greedy actions for a batch of states; used for a' in the Bellman target."""
        return policy_act_batch(
            states, params, self.spec, self.risk, self.psi, self.cem, rng, self.run.policy_taus
        )

    def evaluate(
        self,
        params: ParamSnapshot,
        states: np.ndarray,
        actions: np.ndarray,
        taus: np.ndarray | None,
    ) -> np.ndarray:
        """Head outputs (B, label_width) for encoded actions."""
        return forward(params, states, actions, taus, spec=self.spec)

    def bellman_targets(
        self,
        rewards: np.ndarray,
        terminals: np.ndarray,
        next_states: np.ndarray,
        next_actions: np.ndarray,
        evaluators: list[ParamSnapshot],
        rng: np.random.Generator,
    ) -> np.ndarray:
        """
        Target vectors r + gamma * v for a batch.

        `v` comes from the first evaluator, or the element-wise minimum over
        all evaluators (sharing one tau' draw) when `clipped_min` is set.
        """
        taus = self.target_taus(len(rewards), rng)
        nets = evaluators if self.loss.clipped_min else evaluators[:1]
        values = [self.evaluate(p, next_states, next_actions, taus) for p in nets]
        v = np.minimum.reduce(values) if len(values) > 1 else values[0]
        return bellman_target(
            rewards, terminals, v, self.loss, q_min=self.spec.q_min, q_max=self.spec.q_max
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(risk={self.risk!s}, psi={self.psi.kind.value})"
