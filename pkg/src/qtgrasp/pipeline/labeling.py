import logging
from typing import Sequence

import numpy as np

from qtgrasp.agents import BaseAgent
from qtgrasp.cem import CONT_DIM, encode_actions
from qtgrasp.pipeline.replay import LabeledTransition, TransitionBatch
from qtgrasp.pipeline.targets import TargetNets
from qtgrasp.schemas import Transition

logger = logging.getLogger(__name__)


def bellman_label(
    transitions: Sequence[Transition],
    targets: TargetNets,
    agent: BaseAgent,
    rng: np.random.Generator,
) -> list[LabeledTransition]:
    """
    Attaches distributional targets to a batch of transitions.

    a' is chosen by CEM under theta_bar_2 (with the agent's risk metric) and
    evaluated by theta_bar_1; terminal rows skip the action search since
    their target is r alone.
    """
    if not transitions:
        return []
    batch = TransitionBatch.from_transitions(transitions)
    size = len(transitions)

    next_actions = encode_actions(np.zeros((size, CONT_DIM)), np.zeros(size, dtype=np.intp))
    live = ~batch.terminals
    if np.any(live):
        cont, modes = agent.select_actions(batch.next_states[live], targets.theta_bar_2, rng)
        next_actions[live] = encode_actions(cont, modes)

    labels = agent.bellman_targets(
        batch.rewards,
        batch.terminals,
        batch.next_states,
        next_actions,
        [targets.theta_bar_1, targets.theta_bar_2],
        rng,
    )
    taus = agent.prediction_taus(size, rng)
    logger.debug(f"Labelled {size} transitions ({int(live.sum())} non-terminal) at v{targets.version}")
    return [
        LabeledTransition(
            transition=t,
            state=batch.states[i],
            action=batch.actions[i],
            target=labels[i],
            tau=None if taus is None else taus[i],
            label_version=targets.version,
        )
        for i, t in enumerate(transitions)
    ]
