"""
Named experiment recipes. Each expands a base config into labelled variants
that `train` runs side by side under `<out>/<label>/`.
"""

from typing import Callable

from qtgrasp.risk import RiskKind, RiskMetricSpec
from qtgrasp.schemas import AgentKind, ExperimentConfig, RunMode

Recipe = Callable[[ExperimentConfig], list[tuple[str, ExperimentConfig]]]

RISK_SWEEP = (
    RiskMetricSpec(kind=RiskKind.CPW, eta=0.71),
    RiskMetricSpec(kind=RiskKind.WANG, eta=0.75),
    RiskMetricSpec(kind=RiskKind.WANG, eta=-0.75),
    RiskMetricSpec(kind=RiskKind.CVAR, eta=0.25),
    RiskMetricSpec(kind=RiskKind.CVAR, eta=0.4),
    RiskMetricSpec(kind=RiskKind.NORM, eta=3),
    RiskMetricSpec(kind=RiskKind.POW, eta=-2.0),
)

BATCH_DATASETS = {
    "batch-scripted": "scripted.jsonl",
    "batch-near-optimal": "near-optimal.jsonl",
    "batch-replay": "replay.jsonl",
}


def _with_run(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return cfg.model_copy(update={"run": cfg.run.model_copy(update=changes)})


def risk_label(risk: RiskMetricSpec) -> str:
    return str(risk).replace("(", "-").replace(")", "")


def online_comparison(base: ExperimentConfig) -> list[tuple[str, ExperimentConfig]]:
    """The three agents, risk-neutral, online."""
    return [
        (kind.value, _with_run(base, agent=kind, mode=RunMode.ONLINE))
        for kind in (AgentKind.QT_OPT, AgentKind.Q2R_OPT, AgentKind.Q2F_OPT)
    ]


def risk_sweep(base: ExperimentConfig) -> list[tuple[str, ExperimentConfig]]:
    """Q2F-Opt under every distortion of the sweep."""
    return [
        (f"q2f_opt-{risk_label(risk)}", _with_run(base, agent=AgentKind.Q2F_OPT, risk=risk))
        for risk in RISK_SWEEP
    ]


def _batch(name: str) -> Recipe:
    def recipe(base: ExperimentConfig) -> list[tuple[str, ExperimentConfig]]:
        dataset = base.run.dataset_path or BATCH_DATASETS[name]
        return [
            (f"{name}-{kind.value}", _with_run(base, agent=kind, mode=RunMode.OFFLINE, dataset_path=dataset))
            for kind in (AgentKind.QT_OPT, AgentKind.Q2R_OPT, AgentKind.Q2F_OPT)
        ]

    recipe.__doc__ = f"All three agents trained offline on the {name.removeprefix('batch-')} dataset."
    return recipe


RECIPES: dict[str, Recipe] = {
    "online-comparison": online_comparison,
    "risk-sweep": risk_sweep,
    **{name: _batch(name) for name in BATCH_DATASETS},
}


def get_recipe(name: str) -> Recipe:
    try:
        return RECIPES[name]
    except KeyError:
        supported = ", ".join(f"'{n}'" for n in RECIPES)
        raise ValueError(f"Unknown recipe: '{name}'. Supported recipes: {supported}.") from None
