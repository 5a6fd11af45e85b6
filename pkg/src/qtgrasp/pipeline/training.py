import logging
from dataclasses import dataclass

import numpy as np

from qtgrasp.agents import BaseAgent
from qtgrasp.approximator import AdamState, ParamSnapshot, adam_step
from qtgrasp.pipeline.replay import LabeledTransition, ReplayBuffer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainMetrics:
    step: int
    loss: float
    mean_q: float
    staleness: float


def train_step(
    buffer: ReplayBuffer[LabeledTransition],
    params: ParamSnapshot,
    opt_state: AdamState,
    agent: BaseAgent,
    batch_size: int,
    lr: float,
    rng: np.random.Generator,
) -> tuple[ParamSnapshot, AdamState, TrainMetrics] | None:
    """
    One Adam step on a uniformly sampled batch of labelled transitions.

    Returns None (and changes nothing) while the buffer holds fewer than
    `batch_size` items.
    """
    if len(buffer) < batch_size:
        return None
    batch = buffer.sample(batch_size, rng)
    states = np.stack([lt.state for lt in batch])
    actions = np.stack([lt.action for lt in batch])
    targets = np.stack([lt.target for lt in batch])
    taus = None if batch[0].tau is None else np.stack([lt.tau for lt in batch])

    loss, grad, mean_q = agent.loss_and_grad(params, states, actions, targets, taus)
    new_params, new_state = adam_step(params, grad, opt_state, lr)
    staleness = params.version - float(np.mean([lt.label_version for lt in batch]))
    metrics = TrainMetrics(step=new_params.version, loss=loss, mean_q=mean_q, staleness=staleness)
    logger.debug(f"Train step {metrics.step}: loss {loss:.6f}, mean q {mean_q:.4f}")
    return new_params, new_state, metrics
