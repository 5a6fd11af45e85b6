from .evaluation import evaluate_checkpoint as evaluate_checkpoint
from .evaluation import evaluate_policy as evaluate_policy
from .labeling import bellman_label as bellman_label
from .metrics import METRICS_COLUMNS as METRICS_COLUMNS
from .metrics import MetricsRow as MetricsRow
from .metrics import MetricsWriter as MetricsWriter
from .metrics import read_metrics as read_metrics
from .replay import LabeledTransition as LabeledTransition
from .replay import ReplayBuffer as ReplayBuffer
from .replay import TransitionBatch as TransitionBatch
from .runner import run_offline as run_offline
from .runner import run_online as run_online
from .store import ParamStore as ParamStore
from .targets import TargetNets as TargetNets
from .targets import update_targets as update_targets
from .training import TrainMetrics as TrainMetrics
from .training import train_step as train_step
