from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from qtgrasp.exceptions import ShapeMismatchError


class ScoreKind(StrEnum):
    MEAN = "mean"
    WEIGHTED = "weighted"


class ScoreFn(BaseModel):
    """
    Reducer psi that turns a quantile vector into a decision scalar.

    WEIGHTED weights are rescaled to sum to len(q) at call time, so all-ones
    weights reproduce MEAN.
    """

    kind: ScoreKind = ScoreKind.MEAN
    weights: tuple[float, ...] = Field(default=(), description="Per-quantile weights.")

    model_config = ConfigDict(frozen=True)

    @field_validator("weights")
    @classmethod
    def _non_negative(cls, weights: tuple[float, ...]) -> tuple[float, ...]:
        if any(w < 0.0 for w in weights):
            raise ValueError("score weights must be non-negative.")
        return weights

    @classmethod
    def weighted(cls, weights) -> "ScoreFn":
        return cls(kind=ScoreKind.WEIGHTED, weights=tuple(float(w) for w in weights))


MEAN = ScoreFn()


def score(q: np.ndarray, psi: ScoreFn = MEAN) -> np.ndarray | float:
    """
    psi(q) over the last axis: MEAN is the arithmetic mean, WEIGHTED is
    (1/N) * sum_i w_i q_i. Batched input returns an array of scores.
    """
    q = np.asarray(q, dtype=np.float64)
    n = q.shape[-1]
    if psi.kind == ScoreKind.MEAN:
        out = q.mean(axis=-1)
    else:
        weights = np.asarray(psi.weights, dtype=np.float64)
        if weights.shape != (n,):
            raise ShapeMismatchError(
                f"score weights have length {weights.size}, quantile vector has {n}."
            )
        total = weights.sum()
        if total > 0.0:
            weights = weights * (n / total)
        out = q @ weights / n
    return float(out) if np.ndim(out) == 0 else out
