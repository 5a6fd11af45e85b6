from .env import BinObject as BinObject
from .env import WorldState as WorldState
from .env import observe as observe
from .env import reset as reset
from .env import step as step
from .scripted import Policy as Policy
from .scripted import ScriptedPolicy as ScriptedPolicy
from .scripted import near_optimal_policy as near_optimal_policy
from .scripted import run_episode as run_episode
from .scripted import scripted_policy as scripted_policy
