import threading

from qtgrasp.approximator import ParamSnapshot
from qtgrasp.pipeline.targets import TargetNets


class ParamStore:
    """
    Holds the latest published live parameters and target networks, and
    hands out environment episode ids against the episode budget.

    Snapshots are immutable, so readers share them without copying.
    """

    def __init__(self, params: ParamSnapshot, targets: TargetNets, max_env_episodes: int | None = None):
        self._lock = threading.Lock()
        self._params = params
        self._targets = targets
        self._max_env_episodes = max_env_episodes
        self._env_episodes = 0
        self._exhausted = False

    def get(self) -> tuple[ParamSnapshot, TargetNets]:
        with self._lock:
            return self._params, self._targets

    @property
    def params(self) -> ParamSnapshot:
        with self._lock:
            return self._params

    @property
    def global_step(self) -> int:
        with self._lock:
            return self._params.version

    @property
    def env_episodes(self) -> int:
        with self._lock:
            return self._env_episodes

    @property
    def episodes_exhausted(self) -> bool:
        with self._lock:
            return self._exhausted

    def publish(self, params: ParamSnapshot, targets: TargetNets):
        with self._lock:
            if params.version < self._params.version:
                raise ValueError(
                    f"Refusing to publish v{params.version} over newer v{self._params.version}."
                )
            self._params = params
            self._targets = targets

    def claim_episode(self) -> int | None:
        """Next episode id, or None once the episode budget is used up."""
        with self._lock:
            budget = self._max_env_episodes
            if budget is not None and self._env_episodes >= budget:
                self._exhausted = True
                return None
            episode_id = self._env_episodes
            self._env_episodes += 1
            return episode_id
