from .generate import generate_dataset as generate_dataset
from .generate import parse_policy_spec as parse_policy_spec
from .store import EpisodeReader as EpisodeReader
from .store import EpisodeWriter as EpisodeWriter
from .store import read_episodes as read_episodes
