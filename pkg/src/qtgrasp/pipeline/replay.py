import threading
from dataclasses import dataclass
from typing import Generic, Iterable, Sequence, TypeVar

import numpy as np

from qtgrasp.cem import HybridAction
from qtgrasp.schemas import Transition

T = TypeVar("T")


class ReplayBuffer(Generic[T]):
    """Lock-guarded ring buffer; the oldest item is overwritten once full."""

    def __init__(self, capacity: int, name: str = "buffer"):
        if capacity < 1:
            raise ValueError(f"{name} capacity must be >= 1, got {capacity}.")
        self.capacity = capacity
        self.name = name
        self.total_added = 0
        self._items: list[T] = []
        self._next = 0
        self._lock = threading.Lock()

    def add(self, item: T):
        with self._lock:
            if len(self._items) < self.capacity:
                self._items.append(item)
            else:
                self._items[self._next] = item
            self._next = (self._next + 1) % self.capacity
            self.total_added += 1

    def extend(self, items: Iterable[T]):
        for item in items:
            self.add(item)

    def sample(self, n: int, rng: np.random.Generator) -> list[T]:
        """`n` items drawn uniformly with replacement."""
        with self._lock:
            if not self._items:
                raise ValueError(f"Cannot sample from empty {self.name}.")
            idx = rng.integers(len(self._items), size=n)
            return [self._items[i] for i in idx]

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)


@dataclass(frozen=True, eq=False)
class TransitionBatch:
    """Column view of a list of transitions, actions already network-encoded."""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray

    @classmethod
    def from_transitions(cls, transitions: Sequence[Transition]) -> "TransitionBatch":
        return cls(
            states=np.array([t.state for t in transitions], dtype=np.float64),
            actions=np.stack([HybridAction.from_record(t.action).encode() for t in transitions]),
            rewards=np.array([t.reward for t in transitions], dtype=np.float64),
            next_states=np.array([t.next_state for t in transitions], dtype=np.float64),
            terminals=np.array([t.terminal for t in transitions], dtype=bool),
        )


@dataclass(frozen=True, eq=False)
class LabeledTransition:
    """A transition with its target vector, as consumed by the trainer."""

    transition: Transition
    state: np.ndarray
    action: np.ndarray
    target: np.ndarray
    tau: np.ndarray | None
    label_version: int
