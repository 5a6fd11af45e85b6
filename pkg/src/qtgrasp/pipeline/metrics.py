import csv
import logging
from pathlib import Path

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

METRICS_COLUMNS = (
    "wall_time",
    "global_step",
    "env_episodes",
    "success_rate_eval",
    "loss",
    "mean_q",
    "label_staleness",
    "labels_dropped",
    "buffer_sizes",
)


class MetricsRow(BaseModel):
    wall_time: float = Field(..., description="Seconds since start, or the scheduler tick in sequential mode.")
    global_step: int
    env_episodes: int
    success_rate_eval: float
    loss: float = Field(..., description="Mean training loss since the previous row; nan if none.")
    mean_q: float
    label_staleness: float = Field(
        ..., description="Mean lag in trainer steps between labelling and training since the previous row; nan if none."
    )
    labels_dropped: int = Field(..., ge=0, description="Labels dropped as too stale so far.")
    buffer_sizes: str = Field(..., description="e.g. 'sim=1200;train=4096'.")


def format_buffer_sizes(**sizes: int) -> str:
    return ";".join(f"{name}={size}" for name, size in sizes.items())


class MetricsWriter:
    """CSV metrics log, flushed after every row. Use as a context manager."""

    def __init__(self, path: Path):
        self.path = path
        self.rows = 0
        path.parent.mkdir(parents=True, exist_ok=True)
        self._file = path.open("w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(METRICS_COLUMNS)

    def write(self, row: MetricsRow):
        values = row.model_dump()
        self._writer.writerow([values[c] for c in METRICS_COLUMNS])
        self._file.flush()
        self.rows += 1
        logger.info(
            f"step {row.global_step} | episodes {row.env_episodes} | "
            f"success {row.success_rate_eval:.3f} | loss {row.loss:.5f} | "
            f"staleness {row.label_staleness:.1f} | {row.buffer_sizes}"
        )

    def close(self):
        if not self._file.closed:
            self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def read_metrics(path: Path) -> list[MetricsRow]:
    if not path.exists():
        raise FileNotFoundError(f"Metrics file not found: '{path}'")
    with path.open("r", encoding="utf-8", newline="") as f:
        return [MetricsRow.model_validate(row) for row in csv.DictReader(f)]
