from .actions import ACTION_DIM as ACTION_DIM
from .actions import CONT_DIM as CONT_DIM
from .actions import NUM_MODES as NUM_MODES
from .actions import ActionMode as ActionMode
from .actions import HybridAction as HybridAction
from .actions import encode_actions as encode_actions
from .actions import random_action as random_action
from .optimizer import boundary_candidates as boundary_candidates
from .optimizer import cem_optimize as cem_optimize
from .optimizer import cem_optimize_batch as cem_optimize_batch
from .policy import epsilon_greedy as epsilon_greedy
from .policy import make_batch_score as make_batch_score
from .policy import policy_act as policy_act
from .policy import policy_act_batch as policy_act_batch
from .policy import q_values as q_values
from .policy import resolve_score_fn as resolve_score_fn
