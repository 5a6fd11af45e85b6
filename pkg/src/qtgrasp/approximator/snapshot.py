import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from qtgrasp.exceptions import ShapeMismatchError, SpecMismatchError
from qtgrasp.schemas import NetworkSpec

logger = logging.getLogger(__name__)

MAGIC = b"QTPS"
_HEADER = struct.Struct("<4s32sQQ")


@dataclass(frozen=True, eq=False)
class ParamSnapshot:
    """
    An immutable, versioned flat parameter vector.

    The array is copied on construction and marked read-only, so a published
    snapshot can be shared between threads without coordination.
    """

    version: int
    values: np.ndarray
    spec_hash: bytes

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values: np.ndarray, version: int | None = None) -> "ParamSnapshot":
        return ParamSnapshot(
            version=self.version if version is None else version,
            values=values,
            spec_hash=self.spec_hash,
        )

    def check_spec(self, spec: NetworkSpec):
        if self.spec_hash != spec.spec_hash():
            raise SpecMismatchError(
                "Parameter snapshot was produced for a different network spec "
                f"(snapshot {self.spec_hash.hex()[:12]}, expected {spec.spec_hash().hex()[:12]})."
            )


@dataclass(frozen=True, eq=False)
class GradVector:
    """Gradient with the same length and layout as ParamSnapshot.values."""

    values: np.ndarray

    def __len__(self) -> int:
        return self.values.size


def snapshot_to_bytes(snapshot: ParamSnapshot) -> bytes:
    """Serializes a snapshot: header (magic, spec hash, version, length) + little-endian f64 payload."""
    header = _HEADER.pack(MAGIC, snapshot.spec_hash, snapshot.version, len(snapshot))
    return header + snapshot.values.astype("<f8").tobytes()


def snapshot_from_bytes(data: bytes, expected_hash: bytes | None = None) -> ParamSnapshot:
    """Deserializes a snapshot; checks the spec hash when `expected_hash` is given."""
    if len(data) < _HEADER.size:
        raise ValueError("Snapshot data is shorter than its header.")
    magic, spec_hash, version, length = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"Not a parameter snapshot (magic {magic!r}).")
    payload = data[_HEADER.size :]
    if len(payload) != 8 * length:
        raise ShapeMismatchError(
            f"Snapshot header declares {length} values but payload holds {len(payload) // 8}."
        )
    if expected_hash is not None and spec_hash != expected_hash:
        raise SpecMismatchError(
            f"Snapshot spec hash {spec_hash.hex()[:12]} does not match "
            f"expected {expected_hash.hex()[:12]}."
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return ParamSnapshot(version=version, values=values, spec_hash=spec_hash)


def save_snapshot(path: Path, snapshot: ParamSnapshot) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(snapshot_to_bytes(snapshot))
    logger.info(f"Wrote checkpoint v{snapshot.version} ({len(snapshot)} params) to {path}")
    return path


def load_snapshot(path: Path, spec: NetworkSpec | None = None) -> ParamSnapshot:
    expected = spec.spec_hash() if spec is not None else None
    return snapshot_from_bytes(path.read_bytes(), expected_hash=expected)
