"""
Risk-scored greedy policy: argmax_a psi(q(s, a, beta(tau))) found by CEM.
"""

import numpy as np

from qtgrasp.approximator import ParamSnapshot, forward
from qtgrasp.cem.actions import ACTION_DIM, HybridAction, encode_actions, random_action
from qtgrasp.cem.optimizer import BatchScoreFn, cem_optimize_batch
from qtgrasp.distrl import sample_taus
from qtgrasp.risk import MEAN, NEUTRAL, RiskMetricSpec, ScoreFn, distort_vector, distortion_weights, score
from qtgrasp.schemas import CEMConfig, HeadKind, NetworkSpec


def resolve_score_fn(spec: NetworkSpec, risk: RiskMetricSpec, psi: ScoreFn = MEAN) -> ScoreFn:
    """
    The reducer actually applied to head outputs.

    A fixed-quantile head cannot resample tau, so a deterministic distortion is
    folded into psi as quantile weights. A scalar head has no distribution to
    distort and always reduces with MEAN.
    """
    if spec.head == HeadKind.SCALAR_SIGMOID:
        return MEAN
    if spec.head == HeadKind.QR_FIXED and risk != NEUTRAL:
        if psi != MEAN:
            raise ValueError(
                f"Cannot combine risk '{risk}' with explicit score weights on a fixed-quantile head."
            )
        weights = distortion_weights(risk, spec.num_quantiles)
        if np.all(weights == 1.0):
            return MEAN
        return ScoreFn.weighted(weights)
    return psi


def q_values(
    params: ParamSnapshot,
    spec: NetworkSpec,
    states: np.ndarray,
    actions: np.ndarray,
    risk: RiskMetricSpec,
    num_taus: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Head outputs for encoded (state, action) rows, shape (R, out).

    The implicit-quantile head gets fresh per-row taus distorted by `risk`.
    """
    if spec.head != HeadKind.IQN:
        return forward(params, states, actions, spec=spec)
    taus = distort_vector(risk, sample_taus((states.shape[0], num_taus), rng), rng)
    return forward(params, states, actions, taus, spec=spec)


def make_batch_score(
    params: ParamSnapshot,
    spec: NetworkSpec,
    states: np.ndarray,
    risk: RiskMetricSpec,
    psi: ScoreFn,
    rng: np.random.Generator,
    num_taus: int,
) -> BatchScoreFn:
    """Score closure over CEM candidates for a (B, state_dim) batch of states."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    reducer = resolve_score_fn(spec, risk, psi)

    def batch_score(cont: np.ndarray, modes: np.ndarray) -> np.ndarray:
        batch, samples = modes.shape
        actions = encode_actions(cont, modes).reshape(batch * samples, ACTION_DIM)
        rows = np.repeat(states, samples, axis=0)
        q = q_values(params, spec, rows, actions, risk, num_taus, rng)
        return np.asarray(score(q, reducer)).reshape(batch, samples)

    return batch_score


def policy_act_batch(
    states: np.ndarray,
    params: ParamSnapshot,
    spec: NetworkSpec,
    risk: RiskMetricSpec,
    psi: ScoreFn,
    cfg: CEMConfig,
    rng: np.random.Generator,
    num_taus: int = 8,
) -> tuple[np.ndarray, np.ndarray]:
    """Greedy actions for a batch of states; returns (cont (B, 4), modes (B,))."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    closure = make_batch_score(params, spec, states, risk, psi, rng, num_taus)
    cont, modes, _ = cem_optimize_batch(closure, states.shape[0], cfg, rng)
    return cont, modes


def policy_act(
    state: np.ndarray,
    params: ParamSnapshot,
    spec: NetworkSpec,
    risk: RiskMetricSpec,
    psi: ScoreFn,
    cfg: CEMConfig,
    rng: np.random.Generator,
    num_taus: int = 8,
) -> HybridAction:
    cont, modes = policy_act_batch(state, params, spec, risk, psi, cfg, rng, num_taus)
    return HybridAction(cont=cont[0], mode=int(modes[0]))


def epsilon_greedy(greedy: HybridAction, epsilon: float, rng: np.random.Generator) -> HybridAction:
    """With probability epsilon a uniform random action, otherwise `greedy`."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}.")
    if rng.random() < epsilon:
        return random_action(rng)
    return greedy
