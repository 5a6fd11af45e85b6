from .layers import CosineEmbedding as CosineEmbedding
from .layers import layer_normalize as layer_normalize
from .network import ParamLayout as ParamLayout
from .network import backward as backward
from .network import forward as forward
from .network import get_layout as get_layout
from .network import init_params as init_params
from .optimizer import AdamState as AdamState
from .optimizer import adam_step as adam_step
from .snapshot import GradVector as GradVector
from .snapshot import ParamSnapshot as ParamSnapshot
from .snapshot import load_snapshot as load_snapshot
from .snapshot import save_snapshot as save_snapshot
from .snapshot import snapshot_from_bytes as snapshot_from_bytes
from .snapshot import snapshot_to_bytes as snapshot_to_bytes
