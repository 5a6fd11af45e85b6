import math
import re
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import ndtr, ndtri


class RiskKind(StrEnum):
    NEUTRAL = "neutral"
    CPW = "cpw"
    WANG = "wang"
    CVAR = "cvar"
    NORM = "norm"
    POW = "pow"


DETERMINISTIC_KINDS = frozenset(
    {RiskKind.NEUTRAL, RiskKind.CPW, RiskKind.WANG, RiskKind.CVAR, RiskKind.POW}
)

_RISK_PATTERN = re.compile(r"^\s*([a-z]+)\s*(?:\(\s*([^)]*?)\s*\))?\s*$")


class RiskMetricSpec(BaseModel):
    """A distortion beta(tau; eta) applied to quantile probabilities before scoring."""

    kind: RiskKind = Field(RiskKind.NEUTRAL, description="Distortion family.")
    eta: float = Field(0.0, description="Family parameter; ignored for NEUTRAL.")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_eta(self):
        if not math.isfinite(self.eta):
            raise ValueError(f"eta must be finite, got {self.eta}")
        if self.kind == RiskKind.CVAR and not 0.0 < self.eta <= 1.0:
            raise ValueError(f"cvar requires 0 < eta <= 1, got {self.eta}")
        if self.kind == RiskKind.NORM and (self.eta < 1 or self.eta != int(self.eta)):
            raise ValueError(f"norm requires an integer eta >= 1, got {self.eta}")
        if self.kind == RiskKind.CPW and self.eta <= 0.0:
            raise ValueError(f"cpw requires eta > 0, got {self.eta}")
        return self

    @property
    def is_deterministic(self) -> bool:
        return self.kind in DETERMINISTIC_KINDS

    def __str__(self) -> str:
        if self.kind == RiskKind.NEUTRAL:
            return "neutral"
        if self.kind == RiskKind.NORM:
            return f"norm({int(self.eta)})"
        return f"{self.kind.value}({self.eta!r})"


NEUTRAL = RiskMetricSpec()


def parse_risk(config_string: str) -> RiskMetricSpec:
    """
    Parses the config form of a risk metric, e.g. ``"wang(-0.75)"``, ``"cvar(0.25)"``
    or ``"neutral"``.
    """
    match = _RISK_PATTERN.match(config_string.strip().lower())
    if not match:
        raise ValueError(
            f"Invalid risk format: '{config_string}'. "
            "Expected format: 'kind(eta)' (e.g., 'wang(-0.75)') or 'neutral'."
        )
    name, raw_eta = match.groups()
    try:
        kind = RiskKind(name)
    except ValueError:
        supported = ", ".join(k.value for k in RiskKind)
        raise ValueError(
            f"Unsupported risk kind: '{name}'. Supported kinds: {supported}."
        ) from None

    if kind == RiskKind.NEUTRAL:
        if raw_eta:
            raise ValueError("'neutral' takes no parameter.")
        return NEUTRAL
    if not raw_eta:
        raise ValueError(f"Risk kind '{name}' requires a parameter, e.g. '{name}(0.5)'.")
    try:
        eta = float(raw_eta)
    except ValueError:
        raise ValueError(f"Invalid risk parameter: '{raw_eta}'.") from None
    return RiskMetricSpec(kind=kind, eta=eta)


def _wang(tau: np.ndarray, eta: float) -> np.ndarray:
    out = np.empty_like(tau)
    interior = (tau > 0.0) & (tau < 1.0)
    out[interior] = ndtr(ndtri(tau[interior]) + eta)
    # continuity limits at the endpoints
    out[tau <= 0.0] = 0.0
    out[tau >= 1.0] = 1.0
    return out


def _cpw(tau: np.ndarray, eta: float) -> np.ndarray:
    num = np.power(tau, eta)
    den = np.power(num + np.power(1.0 - tau, eta), 1.0 / eta)
    return num / den


def _pow(tau: np.ndarray, eta: float) -> np.ndarray:
    exponent = 1.0 / (1.0 + abs(eta))
    if eta >= 0.0:
        return np.power(tau, exponent)
    return 1.0 - np.power(1.0 - tau, exponent)


def distort_vector(
    spec: RiskMetricSpec, taus: np.ndarray, rng: np.random.Generator | None = None
) -> np.ndarray:
    """
    Applies beta(tau; eta) element-wise. Accepts any array shape.

    NORM replaces every entry by the mean of eta fresh U[0, 1] draws from `rng`,
    independently of the entry's value.
    """
    taus = np.asarray(taus, dtype=np.float64)
    if taus.size and (np.any(taus < 0.0) or np.any(taus > 1.0)):
        raise ValueError("tau values must lie in [0, 1].")

    match spec.kind:
        case RiskKind.NEUTRAL:
            out = taus.copy()
        case RiskKind.CVAR:
            out = spec.eta * taus
        case RiskKind.WANG:
            out = _wang(taus, spec.eta)
        case RiskKind.CPW:
            out = _cpw(taus, spec.eta)
        case RiskKind.POW:
            out = _pow(taus, spec.eta)
        case RiskKind.NORM:
            if rng is None:
                raise ValueError("norm distortion needs an rng.")
            draws = rng.random(taus.shape + (int(spec.eta),))
            out = draws.mean(axis=-1)
    return np.clip(out, 0.0, 1.0)


def distort(
    spec: RiskMetricSpec, tau: float, rng: np.random.Generator | None = None
) -> float:
    """Scalar form of `distort_vector`."""
    return float(distort_vector(spec, np.array([tau]), rng)[0])


_INVERSE_GRID = np.linspace(0.0, 1.0, 1 << 14)


def distortion_weights(spec: RiskMetricSpec, n: int) -> np.ndarray:
    """
    Scoring weights for `n` fixed midpoint quantiles.

    A quantile head at midpoints describes a step quantile function with n
    equal-mass bins. Sampling that function at beta(tau), tau ~ U[0, 1], lands
    in bin i with probability beta^-1(i/n) - beta^-1((i-1)/n), so
    w_i = n * that probability turns the weighted score into the distorted
    expectation. beta^-1 is taken numerically from a dense grid.
    """
    if not spec.is_deterministic:
        raise ValueError(f"'{spec}' is stochastic and has no fixed quantile weights.")
    if n < 1:
        raise ValueError("n must be >= 1.")
    beta = np.maximum.accumulate(distort_vector(spec, _INVERSE_GRID))
    if np.array_equal(beta, _INVERSE_GRID):
        return np.ones(n)
    edges = np.linspace(0.0, 1.0, n + 1)
    inverse = np.interp(edges, beta, _INVERSE_GRID, left=0.0, right=1.0)
    inverse[0], inverse[-1] = 0.0, 1.0
    return n * np.diff(inverse)
