"""
Pipeline roles. Each role does one unit of work per `tick()`; the runner
either calls ticks round-robin (sequential mode) or loops each role in its
own thread.

    actors / dataset feeder -> transition queue -> sim buffer
        -> Bellman updater -> label queue -> train buffer -> trainer
"""

import logging
import queue
import threading
from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np

from qtgrasp.agents import BaseAgent
from qtgrasp.approximator import AdamState
from qtgrasp.config import MAX_SEED
from qtgrasp.dataset.store import EpisodeReader, EpisodeWriter
from qtgrasp.pipeline.labeling import bellman_label
from qtgrasp.pipeline.replay import LabeledTransition, ReplayBuffer
from qtgrasp.pipeline.store import ParamStore
from qtgrasp.pipeline.targets import update_targets
from qtgrasp.pipeline.training import TrainMetrics, train_step
from qtgrasp.schemas import ExperimentConfig, Transition
from qtgrasp.sim import ScriptedPolicy, run_episode

logger = logging.getLogger(__name__)

QUEUE_POLL_SECONDS = 0.05


def put_until_stopped(q: queue.Queue, item, stop: threading.Event) -> bool:
    """Blocking put that gives up once `stop` is set. Returns whether the item went in."""
    while not stop.is_set():
        try:
            q.put(item, timeout=QUEUE_POLL_SECONDS)
            return True
        except queue.Full:
            continue
    return False


def drain(q: queue.Queue) -> list:
    items = []
    while True:
        try:
            items.append(q.get_nowait())
        except queue.Empty:
            return items


class Role(ABC):
    def __init__(self, name: str, stop: threading.Event):
        self.name = name
        self.stop = stop

    @abstractmethod
    def tick(self) -> bool:
        """Does one unit of work; False when there was nothing to do."""

    def run(self):
        """Thread body: tick until stopped."""
        logger.info(f"Role {self.name} started")
        while not self.stop.is_set():
            if not self.tick():
                self.stop.wait(QUEUE_POLL_SECONDS / 10)
        logger.info(f"Role {self.name} stopped")


class Actor(Role):
    """
    Collects one episode per tick: the scripted policy until the trainer
    reaches `scripted_steps`, epsilon-greedy on the latest snapshot after.
    """

    def __init__(
        self,
        name: str,
        stop: threading.Event,
        agent: BaseAgent,
        cfg: ExperimentConfig,
        store: ParamStore,
        out_queue: queue.Queue,
        rng: np.random.Generator,
        episode_log: EpisodeWriter | None = None,
    ):
        super().__init__(name, stop)
        self.agent = agent
        self.cfg = cfg
        self.store = store
        self.out_queue = out_queue
        self.rng = rng
        self.episode_log = episode_log
        self.scripted = ScriptedPolicy(cfg.sim)

    def tick(self) -> bool:
        episode_id = self.store.claim_episode()
        if episode_id is None:
            return False
        params = self.store.params
        if params.version < self.cfg.run.scripted_steps:
            policy, policy_id = self.scripted, "scripted"
        else:
            epsilon = self.cfg.run.epsilon

            def policy(obs, rng):
                return self.agent.act(obs, params, rng, epsilon)

            policy_id = f"epsilon-greedy-v{params.version}"

        env_seed = int(self.rng.integers(MAX_SEED))
        record = run_episode(self.cfg.sim, env_seed, policy, self.rng, episode_id, policy_id)
        if self.episode_log is not None:
            self.episode_log.write(record)
        for transition in record.iter_transitions():
            if not put_until_stopped(self.out_queue, transition, self.stop):
                break
        return True


class DatasetFeeder(Role):
    """Streams a dataset's transitions one episode per tick, starting over when it runs out."""

    def __init__(self, name: str, stop: threading.Event, path: Path, out_queue: queue.Queue):
        super().__init__(name, stop)
        self.path = path
        self.out_queue = out_queue
        self.epoch = 0
        self._reader = EpisodeReader(path)
        self._records = iter(self._reader)

    def tick(self) -> bool:
        record = next(self._records, None)
        if record is None:
            if self.epoch == 0 and not self._reader.episodes_read:
                raise ValueError(f"Dataset '{self.path}' contains no episodes.")
            self.epoch += 1
            logger.info(f"Dataset {self.path.name}: starting pass {self.epoch + 1}")
            self._records = iter(self._reader)
            record = next(self._records)
        for transition in record.iter_transitions():
            if not put_until_stopped(self.out_queue, transition, self.stop):
                break
        return True

    def close(self):
        self._reader.close()


class BellmanUpdater(Role):
    """Moves incoming transitions into the sim buffer and labels a uniform sample of it per tick."""

    def __init__(
        self,
        name: str,
        stop: threading.Event,
        agent: BaseAgent,
        store: ParamStore,
        in_queue: queue.Queue,
        sim_buffer: ReplayBuffer[Transition],
        out_queue: queue.Queue,
        label_batch: int,
        rng: np.random.Generator,
    ):
        super().__init__(name, stop)
        self.agent = agent
        self.store = store
        self.in_queue = in_queue
        self.sim_buffer = sim_buffer
        self.out_queue = out_queue
        self.label_batch = label_batch
        self.rng = rng

    def tick(self) -> bool:
        self.sim_buffer.extend(drain(self.in_queue))
        if len(self.sim_buffer) == 0:
            return False
        _, targets = self.store.get()
        batch = self.sim_buffer.sample(self.label_batch, self.rng)
        labels = bellman_label(batch, targets, self.agent, self.rng)
        return put_until_stopped(self.out_queue, labels, self.stop)


class Trainer(Role):
    """Owns the optimizer state; the only role that publishes parameters."""

    def __init__(
        self,
        name: str,
        stop: threading.Event,
        agent: BaseAgent,
        cfg: ExperimentConfig,
        store: ParamStore,
        in_queue: queue.Queue,
        train_buffer: ReplayBuffer[LabeledTransition],
        rng: np.random.Generator,
    ):
        super().__init__(name, stop)
        self.agent = agent
        self.run_cfg = cfg.run
        self.store = store
        self.in_queue = in_queue
        self.train_buffer = train_buffer
        self.rng = rng
        self.opt_state = AdamState.zeros_like(store.params)
        self.dropped = 0
        self._lock = threading.Lock()
        self._pending: list[TrainMetrics] = []

    def _accept(self, labels: list[LabeledTransition], version: int):
        fresh = [lt for lt in labels if version - lt.label_version <= self.run_cfg.max_label_staleness]
        stale = len(labels) - len(fresh)
        if stale:
            self.dropped += stale
            logger.warning(
                f"Dropped {stale} labels older than {self.run_cfg.max_label_staleness} steps "
                f"(live v{version}, {self.dropped} total)"
            )
        self.train_buffer.extend(fresh)

    def tick(self) -> bool:
        params, targets = self.store.get()
        for labels in drain(self.in_queue):
            self._accept(labels, params.version)

        trained = False
        for _ in range(self.run_cfg.train_steps_per_tick):
            if params.version >= self.run_cfg.train_steps:
                break
            result = train_step(
                self.train_buffer,
                params,
                self.opt_state,
                self.agent,
                self.run_cfg.batch_size,
                self.run_cfg.lr,
                self.rng,
            )
            if result is None:
                break
            params, self.opt_state, metrics = result
            targets = update_targets(targets, params)
            self.store.publish(params, targets)
            with self._lock:
                self._pending.append(metrics)
            trained = True
        return trained

    def pop_metrics(self) -> tuple[float, float, float]:
        """Mean loss, Q and label staleness since the previous call; nan when no step ran."""
        with self._lock:
            pending, self._pending = self._pending, []
        if not pending:
            return float("nan"), float("nan"), float("nan")
        return (
            float(np.mean([m.loss for m in pending])),
            float(np.mean([m.mean_q for m in pending])),
            float(np.mean([m.staleness for m in pending])),
        )
