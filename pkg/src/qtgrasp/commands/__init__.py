from .evaluate import evaluate as evaluate
from .gen_dataset import gen_dataset as gen_dataset
from .plot_export import plot_export as plot_export
from .print_config import print_config as print_config
from .train import train as train
