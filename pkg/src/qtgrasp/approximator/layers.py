from dataclasses import dataclass

import numpy as np

LAYER_NORM_EPS = 1e-5


def layer_normalize(
    x: np.ndarray, gain: np.ndarray | float = 1.0, bias: np.ndarray | float = 0.0
) -> np.ndarray:
    """Normalizes the last axis to zero mean and unit variance, then applies gain and bias."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 2:
        raise ValueError("layer normalization needs at least 2 features.")
    out, _ = layer_norm_forward(x, gain, bias)
    return out


def layer_norm_forward(x: np.ndarray, gain, bias):
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    var = np.mean(centered * centered, axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    x_hat = centered * inv_std
    return x_hat * gain + bias, (x_hat, inv_std)


def layer_norm_backward(dout: np.ndarray, gain, cache):
    """Returns (dx, dgain, dbias); parameter gradients are summed over all leading axes."""
    x_hat, inv_std = cache
    lead = tuple(range(dout.ndim - 1))
    dgain = np.sum(dout * x_hat, axis=lead)
    dbias = np.sum(dout, axis=lead)
    dx_hat = dout * gain
    dx = inv_std * (
        dx_hat
        - dx_hat.mean(axis=-1, keepdims=True)
        - x_hat * np.mean(dx_hat * x_hat, axis=-1, keepdims=True)
    )
    return dx, dgain, dbias


def cosine_features(taus: np.ndarray, n_basis: int) -> np.ndarray:
    """cos(pi * i * tau) for i = 0 .. n_basis-1, appended as a new last axis."""
    indices = np.arange(n_basis, dtype=np.float64)
    return np.cos(np.pi * np.asarray(taus, dtype=np.float64)[..., None] * indices)


@dataclass(frozen=True)
class CosineEmbedding:
    """
    phi_j(tau) = ReLU(sum_i cos(pi * i * tau) * w_ij + b_j).

    `weight` is (n_basis, embed_dim) and `bias` is (embed_dim,); both are views
    into a parameter vector.
    """

    weight: np.ndarray
    bias: np.ndarray

    @property
    def n_basis(self) -> int:
        return self.weight.shape[0]

    def pre_activation(self, taus: np.ndarray) -> np.ndarray:
        return cosine_features(taus, self.n_basis) @ self.weight + self.bias

    def __call__(self, taus: np.ndarray) -> np.ndarray:
        return np.maximum(self.pre_activation(taus), 0.0)
