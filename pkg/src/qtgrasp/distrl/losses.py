import numpy as np

from qtgrasp.exceptions import ShapeMismatchError
from qtgrasp.schemas import LossConfig

CE_CLIP = 1e-7


def td_errors(q_hat: np.ndarray, q: np.ndarray) -> np.ndarray:
    """
    Pairwise TD errors delta[..., j, i] = q_hat[..., j] - q[..., i].

    The leading axes (if any) are batch axes and must match.
    """
    q_hat = np.asarray(q_hat, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if q_hat.shape[-1] == 0 or q.shape[-1] == 0:
        raise ShapeMismatchError("td_errors needs non-empty vectors.")
    return q_hat[..., :, None] - q[..., None, :]


def huber(delta: np.ndarray, kappa: float) -> np.ndarray:
    abs_delta = np.abs(delta)
    return np.where(abs_delta <= kappa, 0.5 * delta * delta, kappa * (abs_delta - 0.5 * kappa))


def huber_quantile_loss(delta, tau, kappa: float):
    """rho_tau^kappa(delta) = |tau - 1{delta < 0}| * L_kappa(delta), element-wise."""
    delta = np.asarray(delta, dtype=np.float64)
    weight = np.abs(np.asarray(tau, dtype=np.float64) - (delta < 0.0))
    out = weight * huber(delta, kappa)
    return float(out) if np.ndim(out) == 0 else out


def _huber_quantile_grad(delta: np.ndarray, tau: np.ndarray, kappa: float) -> np.ndarray:
    """d rho / d delta; zero at delta = 0."""
    weight = np.abs(tau - (delta < 0.0))
    return weight * np.clip(delta, -kappa, kappa)


def qr_loss(
    q: np.ndarray, q_hat: np.ndarray, taus: np.ndarray, cfg: LossConfig = LossConfig()
) -> tuple[float, np.ndarray]:
    """
    sum_i mean_j rho_{tau_i}^kappa(q_hat_j - q_i) and its gradient with respect to q.

    Batched inputs (`q` of shape (B, N), `q_hat` (B, M), `taus` (N,) or (B, N))
    return the mean loss over the batch, with the gradient scaled to match.
    """
    q = np.asarray(q, dtype=np.float64)
    q_hat = np.asarray(q_hat, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    if taus.shape[-1] != q.shape[-1]:
        raise ShapeMismatchError(f"{taus.shape[-1]} taus for {q.shape[-1]} predicted quantiles.")
    if q.ndim != q_hat.ndim or q.shape[:-1] != q_hat.shape[:-1]:
        raise ShapeMismatchError(
            f"prediction batch {q.shape[:-1]} does not match target batch {q_hat.shape[:-1]}."
        )

    delta = td_errors(q_hat, q)  # (..., M, N)
    tau_row = taus[..., None, :]
    per_row = huber_quantile_loss(delta, tau_row, cfg.kappa)
    per_row = np.sum(np.mean(per_row, axis=-2), axis=-1)
    grad = -np.mean(_huber_quantile_grad(delta, tau_row, cfg.kappa), axis=-2)

    if q.ndim == 1:
        return float(per_row), grad
    batch = int(np.prod(q.shape[:-1]))
    return float(np.mean(per_row)), grad / batch


def scalar_ce_loss(q_pred, target):
    """Binary cross-entropy -t log p - (1 - t) log(1 - p), element-wise."""
    p = np.clip(np.asarray(q_pred, dtype=np.float64), CE_CLIP, 1.0 - CE_CLIP)
    t = np.asarray(target, dtype=np.float64)
    out = -t * np.log(p) - (1.0 - t) * np.log1p(-p)
    return float(out) if np.ndim(out) == 0 else out


def scalar_ce_loss_on_values(
    y: np.ndarray, target: np.ndarray, q_min: float, q_max: float
) -> tuple[float, np.ndarray]:
    """
    Cross-entropy between network outputs and targets, both in return units.

    Both sides are mapped from [q_min, q_max] to [0, 1]. Returns the batch-mean
    loss and its gradient with respect to `y`.
    """
    y = np.asarray(y, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if y.shape != target.shape:
        raise ShapeMismatchError(f"prediction shape {y.shape} differs from target {target.shape}.")
    span = q_max - q_min
    p = np.clip((y - q_min) / span, CE_CLIP, 1.0 - CE_CLIP)
    t = np.clip((target - q_min) / span, 0.0, 1.0)
    losses = scalar_ce_loss(p, t)
    grad = (p - t) / (p * (1.0 - p)) / span / y.size
    return float(np.mean(losses)), grad
