from .losses import huber_quantile_loss as huber_quantile_loss
from .losses import qr_loss as qr_loss
from .losses import scalar_ce_loss as scalar_ce_loss
from .losses import scalar_ce_loss_on_values as scalar_ce_loss_on_values
from .losses import td_errors as td_errors
from .quantiles import quantile_midpoints as quantile_midpoints
from .quantiles import sample_taus as sample_taus
from .targets import bellman_target as bellman_target
