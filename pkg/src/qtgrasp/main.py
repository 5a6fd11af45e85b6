import logging
import sys
from pathlib import Path
from typing import Optional

from cyclopts import App
from rich.console import Console
from rich.logging import RichHandler
from rich.pretty import pprint
from rich.progress import track

from qtgrasp.commands import evaluate as _evaluate
from qtgrasp.commands import gen_dataset as _gen_dataset
from qtgrasp.commands import plot_export as _plot_export
from qtgrasp.commands import print_config as _print_config
from qtgrasp.commands import train as _train
from qtgrasp.config import DEFAULT_OUT_DIR
from qtgrasp.exceptions import ConfigError

app = App(help_flags=["--help", "-h"])
console = Console()


def _configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True)],
    )


def _pretty_print_pydantic(model):
    """Helper to dump a Pydantic model to a dict and pretty-print it."""
    pprint(model.model_dump(mode="json"), expand_all=True)


def _fail(message: str):
    console.print(f"[bold red]Error: {message}[/bold red]")
    sys.exit(1)


def _fail_config(error: ConfigError):
    if error.key_paths:
        _fail(f"{error} (keys: {', '.join(error.key_paths)})")
    _fail(str(error))


# --- CLI Commands ---


@app.command
def train(
    *,
    config: Optional[Path] = None,
    recipe: Optional[str] = None,
    seed: Optional[list[int]] = None,
    out: Path = DEFAULT_OUT_DIR,
    dataset: Optional[Path] = None,
    verbose: bool = False,
):
    """Train one or more agents and write run directories.

    Parameters
    ----------
    config
        Experiment TOML file. Defaults are used when omitted.
    recipe
        Expand the config into a named set of variants (e.g. 'risk-sweep').
    seed
        Seeds to run; overrides the config's seed list.
    out
        Root directory for run directories.
    dataset
        Episode file for offline runs; overrides run.dataset_path.
    verbose
        Log per-batch detail.
    """
    _configure_logging(verbose)
    console.print(f"-> Training into [bold cyan]{out}[/bold cyan]")
    try:
        summaries = _train(config, out, recipe=recipe, seeds=seed, dataset=dataset)
    except ConfigError as e:
        _fail_config(e)
    except (ValueError, RuntimeError, FileNotFoundError) as e:
        _fail(str(e))

    console.print(f"\n[green]Success![/green] Finished {len(summaries)} run(s).")
    for summary in summaries:
        _pretty_print_pydantic(summary)
    return summaries


@app.command(name="eval")
def eval_(
    checkpoint: Path,
    *,
    episodes: int = 100,
    risk: Optional[str] = None,
    seed: Optional[list[int]] = None,
    config: Optional[Path] = None,
    verbose: bool = False,
):
    """Evaluate a checkpoint with the greedy policy on fresh bins.

    Parameters
    ----------
    checkpoint
        Path to a .ckpt file written by 'train'.
    episodes
        Episodes per seed.
    risk
        Risk metric override, e.g. 'cvar(0.25)' or 'wang(-0.75)'.
    seed
        Evaluation seeds (default 0).
    config
        Experiment file; defaults to the config.toml of the checkpoint's run.
    verbose
        Log per-batch detail.
    """
    _configure_logging(verbose)
    console.print(f"-> Evaluating [bold cyan]{checkpoint}[/bold cyan] ({episodes} episodes per seed)")
    try:
        report = _evaluate(checkpoint, episodes, seed or [0], risk=risk, config=config)
    except ConfigError as e:
        _fail_config(e)
    except (ValueError, RuntimeError, FileNotFoundError) as e:
        _fail(str(e))

    _pretty_print_pydantic(report)
    return report


@app.command
def gen_dataset(
    policy: str,
    *,
    episodes: int,
    out: Path,
    config: Optional[Path] = None,
    seed: int = 0,
    verbose: bool = False,
):
    """Collect an episode dataset for offline training.

    Parameters
    ----------
    policy
        One of 'scripted', 'near-optimal', 'snapshot:<ckpt>', 'mixture:<ckpt>', 'replay:<run dir>'.
    episodes
        Number of episodes to write (or to copy, for 'replay').
    out
        Output .jsonl file.
    config
        Experiment file for the simulator and network settings.
    seed
        Seed for bins and policy noise.
    verbose
        Log per-batch detail.
    """
    _configure_logging(verbose)
    console.print(f"-> Generating [bold yellow]{episodes}[/bold yellow] episodes with '{policy}'")

    def progress(items):
        return track(items, description="Collecting episodes...", console=console)

    try:
        report = _gen_dataset(policy, episodes, out, config=config, seed=seed, progress=progress)
    except ConfigError as e:
        _fail_config(e)
    except (ValueError, RuntimeError, FileNotFoundError) as e:
        _fail(str(e))

    console.print(f"\n[green]Success![/green] Dataset written to {out}.")
    _pretty_print_pydantic(report)
    return report


@app.command
def plot_export(run_dirs: list[Path], *, out: Path):
    """Merge the metrics of several runs into one tidy CSV.

    Parameters
    ----------
    run_dirs
        Run directories containing metrics.csv.
    out
        Output CSV path.
    """
    try:
        rows = _plot_export(run_dirs, out)
    except (ValueError, FileNotFoundError) as e:
        _fail(str(e))
    console.print(f"[green]Wrote {rows} rows from {len(run_dirs)} run(s) to {out}.[/green]")
    return rows


@app.command
def print_config(*, recipe: Optional[str] = None):
    """Print the reference config with every default.

    Parameters
    ----------
    recipe
        Print each variant of a recipe instead.
    """
    try:
        text = _print_config(recipe)
    except ValueError as e:
        _fail(str(e))
    console.print(text, markup=False, highlight=False, soft_wrap=True)
    return text


if __name__ == "__main__":
    app()
