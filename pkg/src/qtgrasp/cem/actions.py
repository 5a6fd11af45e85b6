from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from qtgrasp.schemas import ActionRecord

CONT_DIM = 4


class ActionMode(IntEnum):
    MOVE = 0
    CLOSE_GRIPPER = 1
    OPEN_GRIPPER = 2
    TERMINATE = 3


NUM_MODES = len(ActionMode)
ACTION_DIM = CONT_DIM + NUM_MODES


@dataclass(frozen=True, eq=False)
class HybridAction:
    """(dx, dy, dz, dphi) in [-1, 1] plus a discrete gripper/episode mode."""

    cont: np.ndarray
    mode: ActionMode = ActionMode.MOVE

    def __post_init__(self):
        cont = np.clip(np.asarray(self.cont, dtype=np.float64).reshape(-1), -1.0, 1.0)
        if cont.size != CONT_DIM:
            raise ValueError(f"cont must have {CONT_DIM} entries, got {cont.size}.")
        cont.flags.writeable = False
        object.__setattr__(self, "cont", cont)
        object.__setattr__(self, "mode", ActionMode(int(self.mode)))

    def encode(self) -> np.ndarray:
        return encode_actions(self.cont, np.asarray(self.mode))

    def to_record(self) -> ActionRecord:
        return ActionRecord(cont=[float(c) for c in self.cont], mode=int(self.mode))

    @classmethod
    def from_record(cls, record: ActionRecord) -> "HybridAction":
        return cls(cont=np.asarray(record.cont), mode=ActionMode(record.mode))

    def __eq__(self, other) -> bool:
        if not isinstance(other, HybridAction):
            return NotImplemented
        return self.mode == other.mode and np.array_equal(self.cont, other.cont)

    def __repr__(self) -> str:
        cont = ", ".join(f"{c:+.3f}" for c in self.cont)
        return f"HybridAction(cont=[{cont}], mode={self.mode.name})"


def encode_actions(cont: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """Network encoding: the 4 continuous values followed by a one-hot of the mode."""
    cont = np.asarray(cont, dtype=np.float64)
    one_hot = np.eye(NUM_MODES)[np.asarray(modes, dtype=np.intp)]
    return np.concatenate([cont, one_hot], axis=-1)


def random_action(rng: np.random.Generator) -> HybridAction:
    """cont ~ U[-1, 1]^4 and a uniformly drawn mode."""
    cont = rng.uniform(-1.0, 1.0, size=CONT_DIM)
    mode = ActionMode(int(rng.integers(NUM_MODES)))
    return HybridAction(cont=cont, mode=mode)
