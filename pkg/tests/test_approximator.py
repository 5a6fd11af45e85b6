import numpy as np
import pytest

from qtgrasp.approximator import (
    AdamState,
    CosineEmbedding,
    GradVector,
    ParamSnapshot,
    adam_step,
    backward,
    forward,
    get_layout,
    init_params,
    layer_normalize,
    load_snapshot,
    save_snapshot,
    snapshot_from_bytes,
    snapshot_to_bytes,
)
from qtgrasp.approximator.layers import cosine_features, layer_norm_backward, layer_norm_forward
from qtgrasp.exceptions import NonFiniteGradientError, ShapeMismatchError, SpecMismatchError, TauRangeError
from qtgrasp.schemas import HeadKind, NetworkSpec, Normalization

STATE_DIM = 5
ACTION_DIM = 8


def make_spec(head: HeadKind, normalization=Normalization.LAYER_NORM, hidden=(6, 5), head_layers=(4,), **kw):
    return NetworkSpec(
        state_dim=STATE_DIM,
        action_dim=ACTION_DIM,
        hidden_layers=list(hidden),
        head_layers=list(head_layers),
        normalization=normalization,
        head=head,
        num_quantiles=kw.get("num_quantiles", 3),
        n_basis=kw.get("n_basis", 4),
        embed_dim=hidden[-1],
    )


def random_inputs(spec: NetworkSpec, rng, batch=3, num_taus=2):
    state = rng.normal(size=(batch, spec.state_dim))
    action = rng.normal(size=(batch, spec.action_dim))
    taus = rng.random((batch, num_taus)) if spec.head == HeadKind.IQN else None
    return state, action, taus


# --- init_params ---


def test_init_params_is_deterministic_per_seed():
    spec = make_spec(HeadKind.QR_FIXED)
    a, b, c = init_params(spec, 7), init_params(spec, 7), init_params(spec, 8)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.version == 0


@pytest.mark.parametrize("head", list(HeadKind))
def test_init_params_zero_biases_and_unit_gains(head):
    spec = make_spec(head)
    layout = get_layout(spec)
    views = layout.unpack(init_params(spec, 3).values)
    for name, block in views.items():
        if name.endswith(".bias") or name.endswith(".ln_bias"):
            assert np.all(block == 0.0), name
        if name.endswith(".ln_gain"):
            assert np.all(block == 1.0), name
    assert layout.size == len(init_params(spec, 3))


def test_snapshot_is_read_only():
    params = init_params(make_spec(HeadKind.SCALAR_SIGMOID), 0)
    with pytest.raises(ValueError):
        params.values[0] = 1.0


# --- forward ---


def test_scalar_head_output_within_value_range():
    spec = make_spec(HeadKind.SCALAR_SIGMOID)
    params = init_params(spec, 1)
    rng = np.random.default_rng(0)
    state, action, _ = random_inputs(spec, rng, batch=50)
    y = forward(params, state * 100, action, spec=spec)
    assert y.shape == (50, 1)
    assert np.all(y >= spec.q_min) and np.all(y <= spec.q_max)
    single = forward(params, state[0], action[0], spec=spec)
    assert single.shape == (1,)


def test_qr_head_emits_num_quantiles():
    spec = make_spec(HeadKind.QR_FIXED, num_quantiles=7)
    params = init_params(spec, 1)
    state, action, _ = random_inputs(spec, np.random.default_rng(0))
    assert forward(params, state, action, spec=spec).shape == (3, 7)


def test_iqn_identical_taus_give_identical_outputs():
    spec = make_spec(HeadKind.IQN)
    params = init_params(spec, 2)
    state, action, _ = random_inputs(spec, np.random.default_rng(0), batch=1)
    y = forward(params, state[0], action[0], np.array([0.3, 0.3]), spec=spec)
    assert y.shape == (2,)
    assert y[0] == y[1]


@pytest.mark.parametrize("normalization", list(Normalization))
def test_iqn_output_follows_its_tau(normalization):
    spec = make_spec(HeadKind.IQN, normalization=normalization)
    params = init_params(spec, 5)
    rng = np.random.default_rng(1)
    state, action, _ = random_inputs(spec, rng, batch=4)
    taus = np.sort(np.repeat(rng.random(3), 2))
    y = forward(params, state, action, taus, spec=spec)
    assert np.allclose(y[:, 0::2], y[:, 1::2], rtol=0.0, atol=1e-12)

    perm = rng.permutation(len(taus))
    shuffled = forward(params, state, action, taus[perm], spec=spec)
    assert np.allclose(shuffled, y[:, perm], rtol=0.0, atol=1e-12)


@pytest.mark.parametrize("head", list(HeadKind))
def test_forward_is_pure(head):
    spec = make_spec(head)
    params = init_params(spec, 4)
    state, action, taus = random_inputs(spec, np.random.default_rng(2))
    before = (params.values.copy(), state.copy(), action.copy(), None if taus is None else taus.copy())
    first = forward(params, state, action, taus, spec=spec)
    second = forward(params, state, action, taus, spec=spec)
    assert np.array_equal(first, second)
    assert np.array_equal(params.values, before[0])
    assert np.array_equal(state, before[1]) and np.array_equal(action, before[2])
    if taus is not None:
        assert np.array_equal(taus, before[3])


def test_cosine_embedding_at_tau_zero_sums_weights():
    weight = np.array([[0.5, -1.0], [0.25, 2.0]])
    bias = np.array([0.1, -0.2])
    features = cosine_features(np.array([0.0]), 2)
    assert np.array_equal(features, [[1.0, 1.0]])
    embedding = CosineEmbedding(weight, bias)
    assert embedding.pre_activation(np.array([0.0])) == pytest.approx(np.array([[0.85, 0.8]]))
    assert embedding(np.array([0.0])) == pytest.approx(np.array([[0.85, 0.8]]))


def test_forward_rejects_bad_inputs():
    spec = make_spec(HeadKind.IQN)
    params = init_params(spec, 0)
    state, action, _ = random_inputs(spec, np.random.default_rng(0), batch=2)
    with pytest.raises(TauRangeError):
        forward(params, state, action, np.array([0.5, 1.5]), spec=spec)
    with pytest.raises(ShapeMismatchError):
        forward(params, state[:, :3], action, np.array([0.5]), spec=spec)
    with pytest.raises(ValueError):
        forward(params, state, action, spec=spec)


# --- backward ---


def test_zero_upstream_gives_zero_gradient():
    spec = make_spec(HeadKind.QR_FIXED)
    params = init_params(spec, 0)
    state, action, _ = random_inputs(spec, np.random.default_rng(0))
    grad = backward(params, state, action, None, np.zeros((3, 3)), spec=spec)
    assert isinstance(grad, GradVector)
    assert np.all(grad.values == 0.0)


def _finite_difference(spec, params, state, action, taus, upstream, eps=1e-6):
    numeric = np.zeros(len(params))
    base = params.values.copy()
    for i in range(base.size):
        plus, minus = base.copy(), base.copy()
        plus[i] += eps
        minus[i] -= eps
        f_plus = np.sum(upstream * forward(params.with_values(plus), state, action, taus, spec=spec))
        f_minus = np.sum(upstream * forward(params.with_values(minus), state, action, taus, spec=spec))
        numeric[i] = (f_plus - f_minus) / (2 * eps)
    return numeric


def with_random_biases(spec, params, rng, scale=0.1):
    """Zero biases can put ReLU inputs exactly on the kink, where central differences see half a slope."""
    values = params.values.copy()
    for name, block in get_layout(spec).unpack(values).items():
        if name.endswith("bias"):
            block += rng.normal(scale=scale, size=block.shape)
    return params.with_values(values)


@pytest.mark.parametrize("head", list(HeadKind))
def test_backward_matches_finite_differences(head):
    rng = np.random.default_rng(int(list(HeadKind).index(head)))
    for trial in range(34):
        normalization = Normalization.LAYER_NORM if trial % 2 == 0 else Normalization.NONE
        spec = make_spec(head, normalization=normalization)
        params = with_random_biases(spec, init_params(spec, trial), rng)
        state, action, taus = random_inputs(spec, rng)
        y = forward(params, state, action, taus, spec=spec)
        upstream = rng.normal(size=y.shape)

        analytic = backward(params, state, action, taus, upstream, spec=spec).values
        numeric = _finite_difference(spec, params, state, action, taus, upstream)
        rel = np.linalg.norm(analytic - numeric) / max(
            np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12
        )
        assert rel < 1e-4, f"{head.value} trial {trial}: relative error {rel:.2e}"


def test_layer_norm_input_gradient_has_zero_mean():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(4, 6))
    _, cache = layer_norm_forward(x, 1.0, 0.0)
    dx, _, _ = layer_norm_backward(rng.normal(size=(4, 6)), 1.0, cache)
    assert np.allclose(dx.mean(axis=-1), 0.0, atol=1e-12)


# --- layer_normalize ---


def test_layer_normalize_examples():
    assert np.allclose(layer_normalize(np.array([1.0, 1.0, 1.0]), gain=3.0, bias=0.0), 0.0)
    assert layer_normalize(np.array([0.0, 2.0])) == pytest.approx([-1.0, 1.0], abs=1e-4)
    with pytest.raises(ValueError):
        layer_normalize(np.array([1.0]))


def test_layer_normalize_ignores_shift_and_scale_of_its_input():
    x = np.random.default_rng(6).normal(size=(4, 8))
    assert layer_normalize(x + 5.0) == pytest.approx(layer_normalize(x), abs=1e-9)
    assert layer_normalize(3.0 * x) == pytest.approx(layer_normalize(x), abs=1e-4)
    assert layer_normalize(x, gain=2.5, bias=-1.0) == pytest.approx(2.5 * layer_normalize(x) - 1.0, abs=1e-12)


# --- adam_step ---


def _scalar_snapshot(value=0.0):
    return ParamSnapshot(version=0, values=np.array([value]), spec_hash=b"\0" * 32)


def test_adam_zero_gradient_only_bumps_version():
    params = _scalar_snapshot(0.5)
    new, state = adam_step(params, GradVector(np.zeros(1)), AdamState.zeros_like(params), lr=0.1)
    assert new.values[0] == 0.5
    assert new.version == 1
    assert state.t == 1


def test_adam_first_step_magnitude_is_lr():
    params = _scalar_snapshot()
    state = AdamState.zeros_like(params)
    new, state = adam_step(params, GradVector(np.ones(1)), state, lr=1e-3)
    assert new.values[0] == pytest.approx(-1e-3, rel=1e-6)
    again, _ = adam_step(new, GradVector(np.ones(1)), state, lr=1e-3)
    assert again.values[0] == pytest.approx(-2e-3, rel=1e-6)


def test_adam_rejects_non_finite_gradient():
    params = _scalar_snapshot(0.25)
    with pytest.raises(NonFiniteGradientError):
        adam_step(params, GradVector(np.array([np.nan])), AdamState.zeros_like(params), lr=0.1)
    assert params.values[0] == 0.25


# --- snapshots ---


def test_snapshot_file_round_trip_and_spec_check(tmp_path):
    spec = make_spec(HeadKind.IQN)
    params = init_params(spec, 5)
    path = save_snapshot(tmp_path / "ckpt" / "final.ckpt", params)
    loaded = load_snapshot(path, spec)
    assert np.array_equal(loaded.values, params.values)
    assert loaded.spec_hash == spec.spec_hash()

    other = make_spec(HeadKind.QR_FIXED)
    with pytest.raises(SpecMismatchError):
        load_snapshot(path, other)


def test_truncated_snapshot_is_rejected():
    params = init_params(make_spec(HeadKind.SCALAR_SIGMOID), 0)
    data = snapshot_to_bytes(params)
    with pytest.raises(ShapeMismatchError):
        snapshot_from_bytes(data[:-8])
    with pytest.raises(ValueError):
        snapshot_from_bytes(b"XXXX" + data[4:])
