from dataclasses import dataclass

from qtgrasp.approximator import ParamSnapshot
from qtgrasp.exceptions import ShapeMismatchError


@dataclass(frozen=True)
class TargetNets:
    """
    The two delayed copies used for Bellman targets: theta_bar_1 evaluates
    (exponential moving average), theta_bar_2 selects actions (periodic copy).
    """

    theta_bar_1: ParamSnapshot
    theta_bar_2: ParamSnapshot
    ema_decay: float = 0.999
    lag_period: int = 500

    @classmethod
    def from_params(cls, params: ParamSnapshot, ema_decay: float, lag_period: int) -> "TargetNets":
        return cls(theta_bar_1=params, theta_bar_2=params, ema_decay=ema_decay, lag_period=lag_period)

    @property
    def version(self) -> int:
        """Live parameter version these targets were last updated from."""
        return self.theta_bar_1.version


def update_targets(targets: TargetNets, params: ParamSnapshot) -> TargetNets:
    """
    theta_bar_1 <- decay * theta_bar_1 + (1 - decay) * theta every call;
    theta_bar_2 <- theta whenever the live version is a multiple of lag_period.
    """
    if len(params) != len(targets.theta_bar_1) or params.spec_hash != targets.theta_bar_1.spec_hash:
        raise ShapeMismatchError("Target network layout does not match the live parameters.")
    decay = targets.ema_decay
    if decay == 0.0:
        ema = params.values
    else:
        ema = decay * targets.theta_bar_1.values + (1.0 - decay) * params.values
    theta_bar_1 = targets.theta_bar_1.with_values(ema, version=params.version)
    theta_bar_2 = params if params.version % targets.lag_period == 0 else targets.theta_bar_2
    return TargetNets(
        theta_bar_1=theta_bar_1,
        theta_bar_2=theta_bar_2,
        ema_decay=decay,
        lag_period=targets.lag_period,
    )
