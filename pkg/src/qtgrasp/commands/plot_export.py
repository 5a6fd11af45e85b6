import csv
from pathlib import Path

from qtgrasp.config import METRICS_FILE
from qtgrasp.pipeline import read_metrics

EXPORT_COLUMNS = ("run", "step", "episodes", "success_rate")


def run_label(run_dir: Path) -> str:
    """'<label>/seed-<n>' for standard run directories, else the directory name."""
    if run_dir.name.startswith("seed-") and run_dir.parent.name:
        return f"{run_dir.parent.name}/{run_dir.name}"
    return run_dir.name


def plot_export(run_dirs: list[Path], out: Path) -> int:
    """
    Merges the metrics of several runs into one long-format CSV, one row per
    evaluation. Rows are copied as logged, without resampling. Returns the
    number of rows written.
    """
    if not run_dirs:
        raise ValueError("plot-export needs at least one run directory.")
    rows = []
    for run_dir in run_dirs:
        path = run_dir / METRICS_FILE
        if not path.exists():
            raise FileNotFoundError(f"No {METRICS_FILE} in run directory '{run_dir}'")
        label = run_label(run_dir)
        rows += [(label, r.global_step, r.env_episodes, r.success_rate_eval) for r in read_metrics(path)]

    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(EXPORT_COLUMNS)
        writer.writerows(rows)
    return len(rows)
