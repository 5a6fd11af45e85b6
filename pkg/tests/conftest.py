import os
from pathlib import Path

import pytest

from qtgrasp.schemas import (
    AgentKind,
    CEMConfig,
    ExperimentConfig,
    NetworkConfig,
    RunConfig,
    SimConfig,
)


def make_tiny_config(agent: AgentKind = AgentKind.Q2F_OPT, **run_overrides) -> ExperimentConfig:
    """A configuration small enough for a full pipeline run in a second or two."""
    run = dict(
        agent=agent,
        batch_size=8,
        lr=1e-3,
        scripted_steps=10,
        train_steps=20,
        max_env_episodes=200,
        eval_every=10,
        eval_episodes=2,
        label_batch=8,
        lag_period=5,
        ema_decay=0.9,
        iqn_taus=4,
        iqn_target_taus=4,
        policy_taus=2,
        sim_buffer_capacity=500,
        train_buffer_capacity=500,
    )
    run.update(run_overrides)
    return ExperimentConfig(
        seeds=[0],
        run=RunConfig(**run),
        sim=SimConfig(num_objects=(2, 4), max_objects=4, max_steps=6),
        network=NetworkConfig(hidden_layers=[8], head_layers=[8], num_quantiles=5, n_basis=4),
        cem=CEMConfig(iterations=1, samples=8),
    )


@pytest.fixture
def tiny_config():
    return make_tiny_config


@pytest.fixture
def isolated_dir(tmp_path):
    """Runs the test inside a fresh working directory."""
    original_cwd = Path.cwd()
    os.chdir(tmp_path)
    try:
        yield tmp_path
    finally:
        os.chdir(original_cwd)
