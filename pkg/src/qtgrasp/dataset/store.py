import logging
import threading
from pathlib import Path
from typing import Iterator

from pydantic import ValidationError

from qtgrasp.exceptions import DatasetFormatError
from qtgrasp.schemas import EpisodeRecord

logger = logging.getLogger(__name__)


class EpisodeWriter:
    """
    Appends EpisodeRecords to a newline-delimited JSON file.

    Safe to share between threads. It is recommended to use this class as a
    context manager.
    """

    def __init__(self, path: Path, append: bool = False):
        """
        Args:
            path: Target file; parent directories are created.
            append: Keep existing records instead of truncating the file.
        """
        self.path = path
        self.episodes = 0
        self.transitions = 0
        self.successes = 0
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self.path.open("a" if append else "w", encoding="utf-8", newline="\n")

    def write(self, record: EpisodeRecord):
        line = record.model_dump_json() + "\n"
        with self._lock:
            self._file.write(line)
            self.episodes += 1
            self.transitions += len(record.transitions)
            self.successes += int(record.success)

    def close(self):
        if not self._file.closed:
            self._file.close()
            logger.info(f"Wrote {self.episodes} episodes ({self.transitions} transitions) to {self.path}")

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


class EpisodeReader:
    """Iterates the records of a dataset file; a malformed line raises DatasetFormatError."""

    def __init__(self, path: Path):
        if not path.exists() or not path.is_file():
            raise FileNotFoundError(f"Dataset not found: '{path}'")
        self.path = path
        self.episodes_read = 0
        self._file = path.open("rb")

    def __iter__(self) -> Iterator[EpisodeRecord]:
        self._file.seek(0)
        for line_number, raw in enumerate(self._file, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                logger.error(f"Undecodable bytes in {self.path} at line {line_number}")
                raise DatasetFormatError(f"not valid UTF-8 ({e.reason})", line_number) from e
            try:
                record = EpisodeRecord.model_validate_json(line)
            except ValidationError as e:
                first = e.errors()[0]
                location = ".".join(str(part) for part in first["loc"])
                message = f"{location}: {first['msg']}" if location else first["msg"]
                logger.error(f"Malformed record in {self.path} at line {line_number}")
                raise DatasetFormatError(message, line_number) from e
            self.episodes_read += 1
            yield record

    def close(self):
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def read_episodes(path: Path) -> list[EpisodeRecord]:
    with EpisodeReader(path) as reader:
        return list(reader)
