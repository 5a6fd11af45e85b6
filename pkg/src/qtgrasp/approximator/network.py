"""
State-action value networks with hand-written reverse mode.

All three heads share one shape:

    concat(state, action) -> trunk (Linear, [LayerNorm], ReLU)*
                          -> [IQN: Hadamard product with phi(tau)]
                          -> head (Linear, [LayerNorm], ReLU)*
                          -> Linear -> q_min + (q_max - q_min) * sigmoid

The scalar head emits 1 value, the fixed-quantile head N values, and the
implicit-quantile head one value per requested tau.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from qtgrasp.approximator.layers import (
    CosineEmbedding,
    cosine_features,
    layer_norm_backward,
    layer_norm_forward,
)
from qtgrasp.approximator.snapshot import GradVector, ParamSnapshot
from qtgrasp.exceptions import ShapeMismatchError, TauRangeError
from qtgrasp.schemas import HeadKind, NetworkSpec, Normalization


@dataclass(frozen=True)
class _Slot:
    offset: int
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


class ParamLayout:
    """Named positions of every parameter block inside the flat vector."""

    def __init__(self, spec: NetworkSpec):
        self.spec = spec
        self.slots: dict[str, _Slot] = {}
        self.size = 0
        layer_norm = spec.normalization == Normalization.LAYER_NORM

        width = spec.state_dim + spec.action_dim
        for i, out in enumerate(spec.hidden_layers):
            self._add_dense(f"trunk.{i}", width, out, layer_norm)
            width = out
        if spec.head == HeadKind.IQN:
            self._add("embedding.weight", (spec.n_basis, spec.embed_dim))
            self._add("embedding.bias", (spec.embed_dim,))
        for i, out in enumerate(spec.head_layers):
            self._add_dense(f"head.{i}", width, out, layer_norm)
            width = out
        self._add("output.weight", (width, spec.output_dim))
        self._add("output.bias", (spec.output_dim,))

    def _add(self, name: str, shape: tuple[int, ...]):
        slot = _Slot(self.size, shape)
        self.slots[name] = slot
        self.size += slot.size

    def _add_dense(self, prefix: str, fan_in: int, fan_out: int, layer_norm: bool):
        self._add(f"{prefix}.weight", (fan_in, fan_out))
        self._add(f"{prefix}.bias", (fan_out,))
        if layer_norm:
            self._add(f"{prefix}.ln_gain", (fan_out,))
            self._add(f"{prefix}.ln_bias", (fan_out,))

    def unpack(self, values: np.ndarray) -> dict[str, np.ndarray]:
        """Reshaped views into `values` (no copies)."""
        if values.size != self.size:
            raise ShapeMismatchError(
                f"Parameter vector has {values.size} entries, layout expects {self.size}."
            )
        return {
            name: values[s.offset : s.offset + s.size].reshape(s.shape)
            for name, s in self.slots.items()
        }


_LAYOUTS: dict[str, ParamLayout] = {}


def get_layout(spec: NetworkSpec) -> ParamLayout:
    key = spec.model_dump_json()
    layout = _LAYOUTS.get(key)
    if layout is None:
        layout = _LAYOUTS[key] = ParamLayout(spec)
    return layout


def init_params(spec: NetworkSpec, seed: int) -> ParamSnapshot:
    """
    Weights ~ U(-sqrt(6 / (fan_in + fan_out)), +sqrt(...)), layer-norm gains 1,
    every bias and layer-norm offset 0. Deterministic for (spec, seed).
    """
    layout = get_layout(spec)
    rng = np.random.default_rng(seed)
    values = np.zeros(layout.size)
    views = layout.unpack(values)
    for name, slot in layout.slots.items():
        if name.endswith(".weight"):
            fan_in, fan_out = slot.shape
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            views[name][...] = rng.uniform(-limit, limit, size=slot.shape)
        elif name.endswith(".ln_gain"):
            views[name][...] = 1.0
    return ParamSnapshot(version=0, values=values, spec_hash=spec.spec_hash())


# --- forward / backward ---


def _prepare(spec: NetworkSpec, state, action, taus):
    state = np.asarray(state, dtype=np.float64)
    action = np.asarray(action, dtype=np.float64)
    single = state.ndim == 1
    state = np.atleast_2d(state)
    action = np.atleast_2d(action)
    if state.shape[-1] != spec.state_dim:
        raise ShapeMismatchError(f"state has {state.shape[-1]} dims, spec expects {spec.state_dim}.")
    if action.shape[-1] != spec.action_dim:
        raise ShapeMismatchError(
            f"action has {action.shape[-1]} dims, spec expects {spec.action_dim}."
        )
    if state.shape[0] != action.shape[0]:
        raise ShapeMismatchError(
            f"state batch ({state.shape[0]}) and action batch ({action.shape[0]}) differ."
        )
    batch = state.shape[0]

    if spec.head == HeadKind.IQN:
        if taus is None:
            raise ValueError("The implicit-quantile head needs taus.")
        taus = np.asarray(taus, dtype=np.float64)
        if taus.ndim == 1:
            taus = np.broadcast_to(taus, (batch, taus.size))
        if taus.ndim != 2 or taus.shape[0] != batch or taus.shape[1] == 0:
            raise ShapeMismatchError(f"taus of shape {taus.shape} do not fit batch {batch}.")
        if np.any(taus < 0.0) or np.any(taus > 1.0):
            raise TauRangeError("tau values must lie in [0, 1].")
    elif taus is not None:
        raise ValueError(f"The {spec.head.value} head takes no taus.")

    return np.concatenate([state, action], axis=-1), taus, single


def _dense_forward(views, prefix, x, layer_norm, cache):
    z = x @ views[f"{prefix}.weight"] + views[f"{prefix}.bias"]
    ln_cache = None
    if layer_norm:
        z, ln_cache = layer_norm_forward(z, views[f"{prefix}.ln_gain"], views[f"{prefix}.ln_bias"])
    out = np.maximum(z, 0.0)
    cache.append((prefix, x, z, ln_cache))
    return out


def _dense_backward(views, grads, entry, dout):
    prefix, x, z, ln_cache = entry
    dz = dout * (z > 0.0)
    if ln_cache is not None:
        dz, dgain, dbias = layer_norm_backward(dz, views[f"{prefix}.ln_gain"], ln_cache)
        grads[f"{prefix}.ln_gain"] += dgain
        grads[f"{prefix}.ln_bias"] += dbias
    grads[f"{prefix}.weight"] += x.reshape(-1, x.shape[-1]).T @ dz.reshape(-1, dz.shape[-1])
    grads[f"{prefix}.bias"] += dz.reshape(-1, dz.shape[-1]).sum(axis=0)
    return dz @ views[f"{prefix}.weight"].T


def _forward(spec: NetworkSpec, views, x, taus):
    layer_norm = spec.normalization == Normalization.LAYER_NORM
    cache = {"trunk": [], "head": []}

    h = x
    for i in range(len(spec.hidden_layers)):
        h = _dense_forward(views, f"trunk.{i}", h, layer_norm, cache["trunk"])

    if spec.head == HeadKind.IQN:
        embedding = CosineEmbedding(views["embedding.weight"], views["embedding.bias"])
        pre = embedding.pre_activation(taus)  # (B, K, D)
        phi = np.maximum(pre, 0.0)
        cache["merge"] = (h, pre, phi, taus)
        h = h[:, None, :] * phi

    for i in range(len(spec.head_layers)):
        h = _dense_forward(views, f"head.{i}", h, layer_norm, cache["head"])

    logits = h @ views["output.weight"] + views["output.bias"]
    squashed = expit(logits)
    cache["output"] = (h, squashed)
    y = spec.q_min + (spec.q_max - spec.q_min) * squashed
    if spec.head == HeadKind.IQN:
        y = y[..., 0]
    return y, cache


def forward(
    params: ParamSnapshot,
    state: np.ndarray,
    action: np.ndarray,
    taus: np.ndarray | None = None,
    *,
    spec: NetworkSpec,
) -> np.ndarray:
    """
    Quantile vector(s) for (state, action).

    Single vectors give a 1-D result; `(B, .)` batches give `(B, out)`. For the
    implicit-quantile head `taus` is `(K,)` (shared) or `(B, K)` (per row).
    """
    x, taus, single = _prepare(spec, state, action, taus)
    views = get_layout(spec).unpack(params.values)
    y, _ = _forward(spec, views, x, taus)
    return y[0] if single else y


def backward(
    params: ParamSnapshot,
    state: np.ndarray,
    action: np.ndarray,
    taus: np.ndarray | None,
    upstream: np.ndarray,
    *,
    spec: NetworkSpec,
) -> GradVector:
    """Exact gradient of sum(upstream * forward(...)) with respect to the parameters."""
    x, taus, single = _prepare(spec, state, action, taus)
    layout = get_layout(spec)
    views = layout.unpack(params.values)
    y, cache = _forward(spec, views, x, taus)

    upstream = np.asarray(upstream, dtype=np.float64)
    if single:
        upstream = upstream[None, ...]
    if upstream.shape != y.shape:
        raise ShapeMismatchError(
            f"upstream gradient has shape {upstream.shape}, output has {y.shape}."
        )

    grad_values = np.zeros(layout.size)
    grads = layout.unpack(grad_values)

    h, squashed = cache["output"]
    if spec.head == HeadKind.IQN:
        upstream = upstream[..., None]
    dlogits = upstream * (spec.q_max - spec.q_min) * squashed * (1.0 - squashed)
    flat_h = h.reshape(-1, h.shape[-1])
    flat_dl = dlogits.reshape(-1, dlogits.shape[-1])
    grads["output.weight"] += flat_h.T @ flat_dl
    grads["output.bias"] += flat_dl.sum(axis=0)
    dh = dlogits @ views["output.weight"].T

    for entry in reversed(cache["head"]):
        dh = _dense_backward(views, grads, entry, dh)

    if spec.head == HeadKind.IQN:
        features, pre, phi, merge_taus = cache["merge"]
        dfeatures = np.sum(dh * phi, axis=1)
        dpre = dh * features[:, None, :] * (pre > 0.0)
        basis = cosine_features(merge_taus, spec.n_basis)
        grads["embedding.weight"] += basis.reshape(-1, spec.n_basis).T @ dpre.reshape(
            -1, spec.embed_dim
        )
        grads["embedding.bias"] += dpre.reshape(-1, spec.embed_dim).sum(axis=0)
        dh = dfeatures

    for entry in reversed(cache["trunk"]):
        dh = _dense_backward(views, grads, entry, dh)

    return GradVector(values=grad_values)
