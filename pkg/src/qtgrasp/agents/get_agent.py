import logging

from qtgrasp.cem import ACTION_DIM
from qtgrasp.risk import RiskMetricSpec
from qtgrasp.schemas import AgentKind, ExperimentConfig

from .base import BaseAgent

logger = logging.getLogger(__name__)


def get_agent(cfg: ExperimentConfig, risk: RiskMetricSpec | None = None) -> BaseAgent:
    """Builds the agent named by `cfg.run.agent` with its network spec."""
    kind = cfg.run.agent
    logger.info(f"Attempting to create agent for kind: '{kind}'")
    try:
        kind = AgentKind(kind)
    except ValueError:
        supported = ", ".join(f"'{k.value}'" for k in AgentKind)
        raise ValueError(f"Unsupported agent kind: '{kind}'. Supported kinds: {supported}.") from None

    spec = cfg.network.to_spec(cfg.sim.observation_dim, ACTION_DIM, kind)
    args = (spec, cfg.run, cfg.loss, cfg.cem)
    if kind == AgentKind.QT_OPT:
        from .qt_opt import QtOptAgent

        return QtOptAgent(*args, risk=risk)
    elif kind == AgentKind.Q2R_OPT:
        from .q2r_opt import Q2ROptAgent

        return Q2ROptAgent(*args, risk=risk)
    else:
        from .q2f_opt import Q2FOptAgent

        return Q2FOptAgent(*args, risk=risk)
