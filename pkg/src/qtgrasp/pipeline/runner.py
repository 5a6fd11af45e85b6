import logging
import queue
import threading
import time
from pathlib import Path

import numpy as np

from qtgrasp.agents import BaseAgent, get_agent
from qtgrasp.approximator import save_snapshot
from qtgrasp.config import (
    CHECKPOINT_DIR,
    EPISODES_FILE,
    FINAL_CHECKPOINT,
    METRICS_FILE,
    NETWORK_FILE,
)
from qtgrasp.dataset.store import EpisodeWriter
from qtgrasp.exceptions import RoleCrashedError
from qtgrasp.pipeline.evaluation import evaluate_policy
from qtgrasp.pipeline.metrics import MetricsRow, MetricsWriter, format_buffer_sizes
from qtgrasp.pipeline.replay import LabeledTransition, ReplayBuffer
from qtgrasp.pipeline.roles import Actor, BellmanUpdater, DatasetFeeder, Role, Trainer
from qtgrasp.pipeline.store import ParamStore
from qtgrasp.pipeline.targets import TargetNets
from qtgrasp.schemas import ExperimentConfig, RunMode, RunSummary, Transition

logger = logging.getLogger(__name__)


class _Run:
    """Wiring and scheduling shared by online and offline runs."""

    def __init__(self, cfg: ExperimentConfig, seed: int, run_dir: Path, mode: RunMode):
        self.cfg = cfg
        self.seed = seed
        self.run_dir = run_dir
        self.mode = mode
        run = cfg.run

        streams = np.random.SeedSequence(seed).spawn(3 + run.num_actors + run.num_updaters)
        self._rngs = [np.random.default_rng(s) for s in streams]
        self.agent: BaseAgent = get_agent(cfg)
        params = self.agent.init_params(int(streams[0].generate_state(1)[0]))
        targets = TargetNets.from_params(params, run.ema_decay, run.lag_period)
        budget = run.max_env_episodes if mode == RunMode.ONLINE else None
        self.store = ParamStore(params, targets, max_env_episodes=budget)

        # sequential scheduling drains every queue each tick, so bounds only matter for threads
        maxsize = 0 if run.sequential else run.queue_capacity
        self.transitions: queue.Queue = queue.Queue(maxsize)
        self.labels: queue.Queue = queue.Queue(maxsize)
        self.sim_buffer: ReplayBuffer[Transition] = ReplayBuffer(run.sim_buffer_capacity, "sim buffer")
        self.train_buffer: ReplayBuffer[LabeledTransition] = ReplayBuffer(
            run.train_buffer_capacity, "train buffer"
        )
        self.stop = threading.Event()
        self.episode_log: EpisodeWriter | None = None
        self.feeder: DatasetFeeder | None = None

    def build_roles(self, dataset: Path | None) -> list[Role]:
        run = self.cfg.run
        rngs = iter(self._rngs[1:])
        roles: list[Role] = []
        if self.mode == RunMode.ONLINE:
            self.episode_log = EpisodeWriter(self.run_dir / EPISODES_FILE)
            for i in range(run.num_actors):
                roles.append(
                    Actor(
                        f"actor-{i}",
                        self.stop,
                        self.agent,
                        self.cfg,
                        self.store,
                        self.transitions,
                        next(rngs),
                        self.episode_log,
                    )
                )
        else:
            self.feeder = DatasetFeeder("dataset-feeder", self.stop, dataset, self.transitions)
            roles.append(self.feeder)
            for _ in range(run.num_actors):
                next(rngs)
        for i in range(run.num_updaters):
            roles.append(
                BellmanUpdater(
                    f"updater-{i}",
                    self.stop,
                    self.agent,
                    self.store,
                    self.transitions,
                    self.sim_buffer,
                    self.labels,
                    run.label_batch,
                    next(rngs),
                )
            )
        self.trainer = Trainer(
            "trainer", self.stop, self.agent, self.cfg, self.store, self.labels, self.train_buffer, next(rngs)
        )
        roles.append(self.trainer)
        return roles

    def finished(self) -> bool:
        if self.store.global_step >= self.cfg.run.train_steps:
            return True
        return self.mode == RunMode.ONLINE and self.store.episodes_exhausted

    def metrics_row(self, wall_time: float) -> MetricsRow:
        params = self.store.params
        report = evaluate_policy(
            self.agent, params, self.cfg.sim, self.cfg.run.eval_episodes, self.seed
        )
        loss, mean_q, staleness = self.trainer.pop_metrics()
        return MetricsRow(
            wall_time=wall_time,
            global_step=params.version,
            env_episodes=self.store.env_episodes,
            success_rate_eval=report.success_rate,
            loss=loss,
            mean_q=mean_q,
            label_staleness=staleness,
            labels_dropped=self.trainer.dropped,
            buffer_sizes=format_buffer_sizes(sim=len(self.sim_buffer), train=len(self.train_buffer)),
        )

    def run_sequential(self, roles: list[Role], writer: MetricsWriter) -> float:
        every = self.cfg.run.eval_every
        next_eval = every
        tick = 0
        while not self.finished():
            tick += 1
            progressed = False
            for role in roles:
                try:
                    progressed = role.tick() or progressed
                except Exception as e:
                    logger.error(f"Role {role.name} crashed at tick {tick}: {e}")
                    raise RoleCrashedError(role.name, str(e)) from e
            while self.store.global_step >= next_eval:
                writer.write(self.metrics_row(float(tick)))
                next_eval += every
            if not progressed:
                logger.warning(f"No role made progress at tick {tick}; stopping")
                break
        return float(tick)

    def run_threaded(self, roles: list[Role], writer: MetricsWriter) -> float:
        errors: list[tuple[str, Exception]] = []

        def guarded(role: Role):
            try:
                role.run()
            except Exception as e:
                logger.error(f"Role {role.name} crashed: {e}")
                errors.append((role.name, e))
                self.stop.set()

        threads = [threading.Thread(target=guarded, args=(r,), name=r.name, daemon=True) for r in roles]
        start = time.monotonic()
        for thread in threads:
            thread.start()

        every = self.cfg.run.eval_every
        next_eval = every
        try:
            while not self.stop.is_set():
                self.stop.wait(0.05)
                if self.store.global_step >= next_eval:
                    writer.write(self.metrics_row(time.monotonic() - start))
                    next_eval = (self.store.global_step // every + 1) * every
                if self.finished():
                    self.stop.set()
        finally:
            self.stop.set()
            for thread in threads:
                thread.join()

        if errors:
            name, error = errors[0]
            raise RoleCrashedError(name, str(error)) from error
        return time.monotonic() - start

    def execute(self, dataset: Path | None = None) -> RunSummary:
        run = self.cfg.run
        logger.info(
            f"Starting {self.mode.value} run (seed {self.seed}, agent {run.agent.value}, "
            f"{'sequential' if run.sequential else 'threaded'}) in {self.run_dir}"
        )
        self.run_dir.mkdir(parents=True, exist_ok=True)
        roles = self.build_roles(dataset)
        try:
            with MetricsWriter(self.run_dir / METRICS_FILE) as writer:
                if run.sequential:
                    wall_time = self.run_sequential(roles, writer)
                else:
                    wall_time = self.run_threaded(roles, writer)
                final = self.metrics_row(wall_time)
                writer.write(final)
        finally:
            if self.episode_log is not None:
                self.episode_log.close()
            if self.feeder is not None:
                self.feeder.close()

        checkpoints = self.run_dir / CHECKPOINT_DIR
        save_snapshot(checkpoints / FINAL_CHECKPOINT, self.store.params)
        (checkpoints / NETWORK_FILE).write_text(self.agent.spec.model_dump_json(indent=2), encoding="utf-8")
        logger.info(
            f"Finished run in {self.run_dir}: step {final.global_step}, "
            f"{final.env_episodes} episodes, success {final.success_rate_eval:.3f}"
        )
        return RunSummary(
            run_dir=str(self.run_dir),
            seed=self.seed,
            global_step=final.global_step,
            env_episodes=final.env_episodes,
            final_success_rate=final.success_rate_eval,
        )


def run_online(cfg: ExperimentConfig, seed: int, run_dir: Path) -> RunSummary:
    """
    Actors collect episodes (scripted, then epsilon-greedy), updaters label,
    the trainer learns; stops at the trainer-step or episode budget.
    """
    return _Run(cfg, seed, run_dir, RunMode.ONLINE).execute()


def run_offline(cfg: ExperimentConfig, seed: int, run_dir: Path, dataset: Path | None = None) -> RunSummary:
    """Same pipeline fed from a dataset file instead of actors; evaluation uses fresh bins."""
    path = dataset or (Path(cfg.run.dataset_path) if cfg.run.dataset_path else None)
    if path is None:
        raise ValueError("Offline runs need a dataset (run.dataset_path or --dataset).")
    if not path.exists():
        raise FileNotFoundError(f"Dataset not found: '{path}'")
    return _Run(cfg, seed, run_dir, RunMode.OFFLINE).execute(path)
