import hashlib
import math
from enum import StrEnum
from typing import List, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)

from qtgrasp.risk import NEUTRAL, RiskMetricSpec, parse_risk


class HeadKind(StrEnum):
    SCALAR_SIGMOID = "scalar_sigmoid"
    QR_FIXED = "qr_fixed"
    IQN = "iqn"


class Normalization(StrEnum):
    LAYER_NORM = "layer_norm"
    NONE = "none"


class AgentKind(StrEnum):
    QT_OPT = "qt_opt"
    Q2R_OPT = "q2r_opt"
    Q2F_OPT = "q2f_opt"


class RunMode(StrEnum):
    ONLINE = "online"
    OFFLINE = "offline"


AGENT_HEADS = {
    AgentKind.QT_OPT: HeadKind.SCALAR_SIGMOID,
    AgentKind.Q2R_OPT: HeadKind.QR_FIXED,
    AgentKind.Q2F_OPT: HeadKind.IQN,
}


# --- Network ---


class NetworkSpec(BaseModel):
    """
    Architecture of a state-action value network: trunk over (state, action),
    optional IQN merge, head layers, and an output squashed into [q_min, q_max].
    """

    state_dim: int = Field(..., ge=1)
    action_dim: int = Field(..., ge=1, description="Continuous dims plus one-hot mode dims.")
    hidden_layers: List[int] = Field(..., min_length=1, description="Trunk widths.")
    head_layers: List[int] = Field(default_factory=list, description="Widths after the merge point.")
    normalization: Normalization = Normalization.LAYER_NORM
    head: HeadKind
    num_quantiles: int = Field(100, ge=1, description="N for the fixed-quantile head.")
    n_basis: int = Field(64, ge=1, description="Cosine basis functions for the IQN embedding.")
    embed_dim: int = Field(64, ge=1, description="IQN embedding width.")
    q_min: float = -0.2
    q_max: float = 1.0

    model_config = ConfigDict(frozen=True, extra="forbid")

    @field_validator("hidden_layers", "head_layers")
    @classmethod
    def _positive_widths(cls, widths: List[int]) -> List[int]:
        if any(w < 1 for w in widths):
            raise ValueError("all layer widths must be >= 1.")
        return widths

    @model_validator(mode="after")
    def _check_ranges(self):
        if not self.q_min < self.q_max:
            raise ValueError(f"q_min ({self.q_min}) must be below q_max ({self.q_max}).")
        if self.head == HeadKind.IQN and self.embed_dim != self.hidden_layers[-1]:
            raise ValueError(
                f"embed_dim ({self.embed_dim}) must equal the last trunk width "
                f"({self.hidden_layers[-1]})."
            )
        return self

    @property
    def output_dim(self) -> int:
        return self.num_quantiles if self.head == HeadKind.QR_FIXED else 1

    def spec_hash(self) -> bytes:
        """SHA-256 of the canonical JSON dump; identifies compatible snapshots."""
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).digest()


class NetworkConfig(BaseModel):
    """The `[network]` section: everything in a NetworkSpec except the sizes fixed by the task."""

    hidden_layers: List[int] = Field(default_factory=lambda: [64, 64])
    head_layers: List[int] = Field(default_factory=lambda: [64])
    normalization: Normalization = Normalization.LAYER_NORM
    num_quantiles: int = Field(100, ge=1)
    n_basis: int = Field(64, ge=1)
    q_min: float = -0.2
    q_max: float = 1.0

    model_config = ConfigDict(extra="forbid")

    def to_spec(self, state_dim: int, action_dim: int, agent: AgentKind) -> NetworkSpec:
        return NetworkSpec(
            state_dim=state_dim,
            action_dim=action_dim,
            hidden_layers=self.hidden_layers,
            head_layers=self.head_layers,
            normalization=self.normalization,
            head=AGENT_HEADS[agent],
            num_quantiles=self.num_quantiles,
            n_basis=self.n_basis,
            embed_dim=self.hidden_layers[-1],
            q_min=self.q_min,
            q_max=self.q_max,
        )


# --- Algorithm settings ---


class LossConfig(BaseModel):
    kappa: float = Field(0.002, gt=0.0, description="Huber threshold between quadratic and linear regime.")
    gamma: float = Field(0.9, gt=0.0, lt=1.0, description="Discount factor.")
    clipped_min: bool = Field(
        False, description="Also take the element-wise minimum over both target networks."
    )

    model_config = ConfigDict(extra="forbid")


class CEMConfig(BaseModel):
    iterations: int = Field(2, ge=1)
    samples: int = Field(64, ge=1)
    elite_fraction: float = Field(0.1, gt=0.0, le=1.0)
    init_sigma: float = Field(0.5, gt=0.0)
    sigma_floor: float = Field(1e-3, gt=0.0)
    boundary_polish: bool = Field(
        True, description="Finally score the best action with each continuous dim snapped to -1, kept or +1."
    )

    model_config = ConfigDict(extra="forbid")

    @property
    def elite_count(self) -> int:
        return min(self.samples, max(1, round(self.elite_fraction * self.samples)))


class SimConfig(BaseModel):
    """Planar bin-grasping MDP. Lengths are in bin half-extents."""

    num_objects: Tuple[int, int] = (8, 12)
    max_objects: int = Field(12, ge=1, description="Observation slots.")
    bin_extent: float = Field(1.0, gt=0.0, description="Bin spans [-bin_extent, bin_extent] in x and y.")
    object_radius: Tuple[float, float] = (0.06, 0.10)
    grasp_radius: float = Field(0.08, gt=0.0)
    grasp_height: float = Field(0.05, ge=0.0, description="Highest z at which closing can grasp.")
    grasp_noise: float = Field(0.1, ge=0.0, le=1.0)
    slip_prob: float = Field(0.05, ge=0.0, le=1.0)
    max_steps: int = Field(20, ge=1)
    obs_noise_sigma: float = Field(0.01, ge=0.0)
    step_penalty: float = -0.01
    success_reward: float = 1.0
    move_scale_xy: float = Field(1.0, gt=0.0)
    move_scale_z: float = Field(1.0, gt=0.0)
    rotate_scale: float = Field(math.pi / 4, gt=0.0)
    scripted_aim_sigma: float = Field(0.11, ge=0.0, description="Tuned for ~46% scripted success.")
    near_optimal_aim_sigma: float = Field(0.045, ge=0.0, description="Tuned for ~89% success.")

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_ranges(self):
        low, high = self.num_objects
        if not 1 <= low <= high <= self.max_objects:
            raise ValueError(
                f"num_objects {self.num_objects} must satisfy 1 <= low <= high <= max_objects."
            )
        r_low, r_high = self.object_radius
        if not 0.0 < r_low <= r_high < self.bin_extent:
            raise ValueError(f"object_radius {self.object_radius} is not a valid range.")
        return self

    @property
    def observation_dim(self) -> int:
        return 6 + 3 * self.max_objects


class RunConfig(BaseModel):
    """The `[run]` section: roles, budgets and optimizer settings of one training run."""

    mode: RunMode = RunMode.ONLINE
    agent: AgentKind = AgentKind.Q2F_OPT
    risk: RiskMetricSpec = Field(NEUTRAL, description="Policy risk metric, e.g. 'wang(-0.75)'.")
    score_weights: List[float] = Field(
        default_factory=list, description="Weighted psi for Q2R-Opt; empty means MEAN."
    )
    batch_size: int = Field(256, ge=1)
    lr: float = Field(1e-4, gt=0.0)
    scripted_steps: int = Field(5000, ge=0, description="Trainer steps before switching to epsilon-greedy.")
    epsilon: float = Field(0.2, ge=0.0, le=1.0)
    sequential: bool = Field(True, description="Deterministic round-robin scheduling of all roles.")
    num_actors: int = Field(1, ge=1)
    num_updaters: int = Field(1, ge=1)
    sim_buffer_capacity: int = Field(100_000, ge=1)
    train_buffer_capacity: int = Field(100_000, ge=1)
    queue_capacity: int = Field(64, ge=1)
    label_batch: int = Field(32, ge=1, description="Transitions labelled per updater call.")
    train_steps_per_tick: int = Field(1, ge=1)
    ema_decay: float = Field(0.999, ge=0.0, le=1.0)
    lag_period: int = Field(500, ge=1)
    max_label_staleness: int = Field(50, ge=0)
    train_steps: int = Field(20_000, ge=0, description="Trainer step budget.")
    max_env_episodes: int = Field(20_000, ge=0, description="Environment episode budget (online).")
    eval_every: int = Field(1000, ge=1, description="Trainer steps between evaluations.")
    eval_episodes: int = Field(100, ge=1)
    iqn_taus: int = Field(32, ge=1, description="tau samples on the prediction side.")
    iqn_target_taus: int = Field(32, ge=1, description="tau' samples on the target side.")
    policy_taus: int = Field(8, ge=1, description="tau samples per CEM candidate.")
    dataset_path: str = Field("", description="Episode file for offline runs.")

    model_config = ConfigDict(extra="forbid")

    @field_validator("risk", mode="before")
    @classmethod
    def _parse_risk(cls, value):
        if isinstance(value, str):
            return parse_risk(value)
        return value

    @field_serializer("risk")
    def _dump_risk(self, risk: RiskMetricSpec) -> str:
        return str(risk)


class ExperimentConfig(BaseModel):
    """Top-level experiment file."""

    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    run: RunConfig = Field(default_factory=RunConfig)
    sim: SimConfig = Field(default_factory=SimConfig)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    cem: CEMConfig = Field(default_factory=CEMConfig)

    model_config = ConfigDict(extra="forbid")


# --- Records ---


class ActionRecord(BaseModel):
    cont: List[float] = Field(..., min_length=4, max_length=4)
    mode: int = Field(..., ge=0, le=3)


class StepRecord(BaseModel):
    """One serialized (s, a, r, s', terminal) step."""

    state: List[float]
    action: ActionRecord
    reward: float
    next_state: List[float]
    terminal: bool


class Transition(StepRecord):
    """A step together with its provenance; the unit of replay."""

    policy_id: str
    episode_id: int
    step_index: int


class EpisodeRecord(BaseModel):
    """An ordered episode; one line of a dataset file."""

    episode_id: int
    seed: int
    policy_id: str
    transitions: List[StepRecord]
    success: bool

    @model_validator(mode="after")
    def _single_terminal(self):
        terminals = [i for i, t in enumerate(self.transitions) if t.terminal]
        if terminals and terminals != [len(self.transitions) - 1]:
            raise ValueError("an episode has at most one terminal transition, at the end.")
        return self

    def iter_transitions(self):
        for index, step in enumerate(self.transitions):
            yield Transition(
                **step.model_dump(),
                policy_id=self.policy_id,
                episode_id=self.episode_id,
                step_index=index,
            )

    @property
    def episode_return(self) -> float:
        return sum(t.reward for t in self.transitions)


# --- Reports ---


class SeedEval(BaseModel):
    seed: int
    episodes: int = Field(..., ge=1)
    success_rate: float = Field(..., ge=0.0, le=1.0)
    mean_return: float


class EvalReport(BaseModel):
    """Greedy evaluation of a checkpoint."""

    episodes: int = Field(..., ge=1, description="Episodes per seed.")
    success_rate: float = Field(..., ge=0.0, le=1.0, description="Mean over seeds.")
    success_rate_std: float = Field(0.0, ge=0.0, description="Standard deviation across seeds.")
    mean_return: float
    risk: str
    per_seed: List[SeedEval]


class DatasetReport(BaseModel):
    path: str
    policy: str
    episodes: int
    transitions: int
    success_rate: float


class RunSummary(BaseModel):
    run_dir: str
    seed: int
    global_step: int
    env_episodes: int
    final_success_rate: float
