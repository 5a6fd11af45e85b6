import numpy as np
import pytest

from qtgrasp.distrl import (
    bellman_target,
    huber_quantile_loss,
    qr_loss,
    quantile_midpoints,
    sample_taus,
    scalar_ce_loss,
    scalar_ce_loss_on_values,
    td_errors,
)
from qtgrasp.exceptions import ShapeMismatchError
from qtgrasp.schemas import LossConfig


def test_quantile_midpoints():
    assert quantile_midpoints(1) == pytest.approx([0.5])
    assert quantile_midpoints(2) == pytest.approx([0.25, 0.75])
    assert quantile_midpoints(4) == pytest.approx([0.125, 0.375, 0.625, 0.875])
    with pytest.raises(ValueError):
        quantile_midpoints(0)


def test_sample_taus_seeded_and_uniform():
    a = sample_taus(16, np.random.default_rng(3))
    b = sample_taus(16, np.random.default_rng(3))
    assert np.array_equal(a, b)
    draws = sample_taus(100_000, np.random.default_rng(0))
    assert abs(draws.mean() - 0.5) < 0.01
    assert np.all((draws >= 0.0) & (draws <= 1.0))
    assert sample_taus((4, 3), np.random.default_rng(0)).shape == (4, 3)


def test_bellman_target_examples():
    assert bellman_target(1.0, True, np.array([0.3, 0.1, 0.9])) == pytest.approx([1.0, 1.0, 1.0])
    out = bellman_target(-0.01, False, np.array([0.5, 0.7]), LossConfig(gamma=0.9))
    assert out == pytest.approx([0.44, 0.62])
    assert bellman_target(0.0, False, np.zeros(4)) == pytest.approx(np.zeros(4))


def test_bellman_target_is_batched_and_clamped():
    v = np.array([[0.9, 1.0], [0.2, 0.4]])
    out = bellman_target(np.array([1.0, -0.01]), np.array([False, True]), v)
    assert out.shape == (2, 2)
    assert out[0] == pytest.approx([1.0, 1.0])
    assert out[1] == pytest.approx([-0.01, -0.01])


def test_td_errors():
    assert td_errors(np.array([1.0]), np.array([0.4, 0.6])) == pytest.approx(np.array([[0.6, 0.4]]))
    q = np.array([0.1, 0.5, 0.9])
    assert np.all(np.diag(td_errors(q, q)) == 0.0)


def test_huber_quantile_loss_unit_values():
    assert huber_quantile_loss(0.0, 0.3, 0.002) == 0.0
    assert abs(huber_quantile_loss(0.001, 0.5, 0.002) - 2.5e-7) < 1e-12
    assert abs(huber_quantile_loss(-0.01, 0.9, 0.002) - 1.8e-6) < 1e-12


@pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
def test_huber_quantile_loss_is_positive_away_from_zero(tau):
    deltas = np.linspace(-0.05, 0.05, 1000)
    assert np.all(huber_quantile_loss(deltas, tau, 0.002) > 0.0)
    assert huber_quantile_loss(0.0, tau, 0.002) == 0.0


@pytest.mark.parametrize("tau", [0.2, 0.7])
@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_huber_quantile_loss_is_smooth_at_kappa(tau, sign):
    kappa, h = 0.002, 1e-9
    edge = sign * kappa
    left, at, right = (huber_quantile_loss(d, tau, kappa) for d in (edge - h, edge, edge + h))
    assert abs(right - left) < 1e-11
    weight = tau if sign > 0 else 1.0 - tau
    assert (at - left) / h == pytest.approx(sign * weight * kappa, rel=1e-4)
    assert (right - at) / h == pytest.approx(sign * weight * kappa, rel=1e-4)


@pytest.mark.parametrize("tau", [0.1, 0.3, 0.9])
def test_huber_quantile_loss_asymmetry_in_linear_regime(tau):
    deltas = np.array([0.003, 0.01, 0.5])
    ratio = huber_quantile_loss(deltas, tau, 0.002) / huber_quantile_loss(-deltas, tau, 0.002)
    assert ratio == pytest.approx(np.full(3, tau / (1.0 - tau)))


def test_qr_loss_two_target_example():
    loss, grad = qr_loss(np.array([0.5]), np.array([0.501, 0.49]), np.array([0.5]), LossConfig(kappa=0.002))
    # 0.5 * 0.5 * 0.001**2 and 0.5 * 0.002 * (0.01 - 0.001), averaged over the two targets
    assert loss == pytest.approx((2.5e-7 + 9e-6) / 2, abs=1e-12)
    assert grad == pytest.approx([2.5e-4], abs=1e-12)


@pytest.mark.parametrize("gamma", [0.5, 0.9])
def test_bellman_target_has_slope_gamma(gamma):
    rng = np.random.default_rng(2)
    v1, v2 = rng.uniform(0.0, 0.5, size=(2, 6))
    cfg = LossConfig(gamma=gamma)
    diff = bellman_target(0.05, False, v1, cfg) - bellman_target(0.05, False, v2, cfg)
    assert diff == pytest.approx(gamma * (v1 - v2), abs=1e-12)


def test_td_errors_swap_roles_antisymmetrically():
    rng = np.random.default_rng(5)
    q_hat, q = rng.random(3), rng.random(5)
    assert np.array_equal(td_errors(q, q_hat), -td_errors(q_hat, q).T)
    batch_hat, batch = rng.random((4, 3)), rng.random((4, 5))
    assert np.array_equal(td_errors(batch, batch_hat), -np.swapaxes(td_errors(batch_hat, batch), -1, -2))


def test_qr_loss_zero_at_constant_match():
    q = np.full(5, 0.4)
    loss, grad = qr_loss(q, q.copy(), quantile_midpoints(5))
    assert loss == 0.0
    assert np.all(grad == 0.0)


def test_qr_loss_rejects_mismatched_taus():
    with pytest.raises(ShapeMismatchError):
        qr_loss(np.zeros(3), np.zeros(3), quantile_midpoints(4))


def test_qr_loss_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    cfg = LossConfig(kappa=0.5)
    q = rng.normal(size=(3, 4))
    q_hat = rng.normal(size=(3, 6))
    taus = rng.random((3, 4))
    _, grad = qr_loss(q, q_hat, taus, cfg)
    eps = 1e-6
    numeric = np.zeros_like(q)
    for idx in np.ndindex(q.shape):
        plus, minus = q.copy(), q.copy()
        plus[idx] += eps
        minus[idx] -= eps
        numeric[idx] = (qr_loss(plus, q_hat, taus, cfg)[0] - qr_loss(minus, q_hat, taus, cfg)[0]) / (2 * eps)
    assert grad == pytest.approx(numeric, abs=1e-6)


def test_free_quantiles_recover_two_point_distribution():
    """Descending the quantile loss on samples of Z recovers its quantile function."""
    rng = np.random.default_rng(0)
    samples = (rng.random(10_000) < 0.3).astype(np.float64)
    taus = quantile_midpoints(20)
    cfg = LossConfig()
    q = np.full(20, 0.5)
    for t in range(1500):
        _, grad = qr_loss(q, samples, taus, cfg)
        q -= (0.5 / (1.0 + t / 50.0)) * grad / cfg.kappa
    analytic = np.where(taus <= 0.7, 0.0, 1.0)
    assert np.mean(np.abs(q - analytic)) < 0.05


def test_scalar_ce_loss_examples():
    assert scalar_ce_loss(0.5, 0.5) == pytest.approx(np.log(2.0))
    ps = np.linspace(0.05, 0.95, 19)
    losses = scalar_ce_loss(ps, 0.3)
    assert ps[np.argmin(losses)] == pytest.approx(0.3)
    assert scalar_ce_loss(1.0 - 1e-9, 1.0) < 1e-6


def test_scalar_ce_loss_on_values_gradient():
    y = np.array([[0.1], [0.7], [-0.1]])
    target = np.array([[0.3], [0.2], [0.9]])
    _, grad = scalar_ce_loss_on_values(y, target, -0.2, 1.0)
    eps = 1e-7
    for i in range(3):
        plus, minus = y.copy(), y.copy()
        plus[i] += eps
        minus[i] -= eps
        numeric = (
            scalar_ce_loss_on_values(plus, target, -0.2, 1.0)[0]
            - scalar_ce_loss_on_values(minus, target, -0.2, 1.0)[0]
        ) / (2 * eps)
        assert grad[i, 0] == pytest.approx(numeric, rel=1e-5)
