import itertools
import logging
from typing import Callable

import numpy as np

from qtgrasp.cem.actions import CONT_DIM, NUM_MODES, ActionMode, HybridAction
from qtgrasp.exceptions import ShapeMismatchError
from qtgrasp.schemas import CEMConfig

logger = logging.getLogger(__name__)

# (cont (B, S, 4), modes (B, S)) -> scores (B, S)
BatchScoreFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
# (cont (S, 4), modes (S,)) -> scores (S,)
ScoreClosure = Callable[[np.ndarray, np.ndarray], np.ndarray]

# (81, 4): per dim 0 keeps the value, -1/+1 snap it to that bound
_SNAPS = np.array(list(itertools.product((0, -1, 1), repeat=CONT_DIM)))


def _checked_scores(score: BatchScoreFn, cont: np.ndarray, modes: np.ndarray) -> np.ndarray:
    scores = np.asarray(score(cont, modes), dtype=np.float64)
    if scores.shape != modes.shape:
        raise ShapeMismatchError(f"score returned shape {scores.shape}, expected {modes.shape}.")
    return scores


def boundary_candidates(best_cont: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Every mode combined with every snapping of `best_cont` (B, 4) to the box
    bounds, including the unsnapped point. Returns (cont (B, 324, 4), modes (B, 324)).
    """
    batch = best_cont.shape[0]
    snapped = np.where(_SNAPS == 0, best_cont[:, None, :], _SNAPS.astype(np.float64))
    cont = np.tile(snapped, (1, NUM_MODES, 1))
    modes = np.repeat(np.arange(NUM_MODES), len(_SNAPS))
    return cont, np.broadcast_to(modes, (batch, modes.size)).copy()


def cem_optimize_batch(
    score: BatchScoreFn, batch: int, cfg: CEMConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Runs `batch` independent CEM searches that share one score call per iteration.

    Continuous dims use a clamped diagonal Gaussian refit to the clamped
    elites, the mode a categorical refit to elite frequencies with add-one
    smoothing. Until the last iteration sigma stays above a floor shrinking
    linearly from `init_sigma`, so the search does not settle before it has
    seen the edges of the box. With `boundary_polish`, one more score call
    tries the best action snapped to the bounds. The returned action of each
    search is the best-scoring candidate ever scored.

    Returns (cont (B, 4), modes (B,), scores (B,)).
    """
    samples, elites = cfg.samples, cfg.elite_count
    mean = np.zeros((batch, CONT_DIM))
    sigma = np.full((batch, CONT_DIM), cfg.init_sigma)
    mode_probs = np.full((batch, NUM_MODES), 1.0 / NUM_MODES)

    best_cont = np.zeros((batch, CONT_DIM))
    best_mode = np.zeros(batch, dtype=np.intp)
    best_score = np.full(batch, -np.inf)
    rows = np.arange(batch)

    def keep_best(cont: np.ndarray, modes: np.ndarray, scores: np.ndarray) -> np.ndarray:
        order = np.argsort(-scores, axis=1, kind="stable")
        top = order[:, 0]
        improved = scores[rows, top] > best_score
        best_score[improved] = scores[rows, top][improved]
        best_cont[improved] = cont[rows, top][improved]
        best_mode[improved] = modes[rows, top][improved]
        return order

    for iteration in range(cfg.iterations):
        noise = rng.standard_normal((batch, samples, CONT_DIM))
        cont = np.clip(mean[:, None, :] + sigma[:, None, :] * noise, -1.0, 1.0)
        cumulative = np.cumsum(mode_probs, axis=-1)
        draws = rng.random((batch, samples))
        modes = np.minimum((draws[..., None] >= cumulative[:, None, :]).sum(axis=-1), NUM_MODES - 1)

        order = keep_best(cont, modes, _checked_scores(score, cont, modes))[:, :elites]

        elite_cont = np.take_along_axis(cont, order[..., None], axis=1)
        elite_modes = np.take_along_axis(modes, order, axis=1)
        explore_floor = cfg.init_sigma * (1.0 - (iteration + 1) / cfg.iterations)
        mean = elite_cont.mean(axis=1)
        sigma = np.maximum(elite_cont.std(axis=1), max(cfg.sigma_floor, explore_floor))
        counts = (elite_modes[..., None] == np.arange(NUM_MODES)).sum(axis=1)
        mode_probs = (counts + 1.0) / (elites + NUM_MODES)
        logger.debug(
            f"CEM iteration {iteration + 1}/{cfg.iterations}: "
            f"best mean score {float(np.mean(best_score)):.4f}"
        )

    if cfg.boundary_polish:
        cont, modes = boundary_candidates(best_cont)
        keep_best(cont, modes, _checked_scores(score, cont, modes))

    return best_cont, best_mode, best_score


def cem_optimize(score: ScoreClosure, cfg: CEMConfig, rng: np.random.Generator) -> HybridAction:
    """argmax_a score(a) for a single problem; `score` is evaluated on whole sample batches."""

    def batched(cont: np.ndarray, modes: np.ndarray) -> np.ndarray:
        return np.asarray(score(cont[0], modes[0]))[None, :]

    cont, modes, _ = cem_optimize_batch(batched, 1, cfg, rng)
    return HybridAction(cont=cont[0], mode=ActionMode(int(modes[0])))
