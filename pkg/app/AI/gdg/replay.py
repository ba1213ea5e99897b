import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from app.core.exceptions import ContractViolationError, PreconditionError

logger = logging.getLogger(__name__)

GoalPredicate = Callable[[np.ndarray, np.ndarray], bool]


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: np.ndarray
    s_next: np.ndarray
    g: np.ndarray
    d: float
    reached: bool


@dataclass
class TransitionBatch:
    s: np.ndarray
    a: np.ndarray
    s_next: np.ndarray
    g: np.ndarray
    d: np.ndarray
    reached: np.ndarray

    def __len__(self) -> int:
        return len(self.d)

    @classmethod
    def from_transitions(cls, items: Sequence[Transition], dtype=np.float32) -> "TransitionBatch":
        if not items:
            raise PreconditionError("Cannot build an empty batch")
        return cls(
            s=np.array([t.s for t in items], dtype=dtype),
            a=np.array([t.a for t in items], dtype=dtype),
            s_next=np.array([t.s_next for t in items], dtype=dtype),
            g=np.array([t.g for t in items], dtype=dtype),
            d=np.array([t.d for t in items], dtype=dtype),
            reached=np.array([t.reached for t in items], dtype=bool),
        )


@dataclass
class EpisodeTrace:
    """Contiguous rollout: states s_0..s_T and actions a_0..a_{T-1}."""
    states: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.actions = np.asarray(self.actions, dtype=np.float64)
        if self.states.ndim != 2 or len(self.states) != len(self.actions) + 1:
            raise ContractViolationError(
                f"Trace needs T+1 states for T actions, got {len(self.states)} and {len(self.actions)}")

    @property
    def steps(self) -> int:
        return len(self.actions)


class ReplayBuffer:
    """Ring buffer over preallocated arrays with a seeded sampler."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int,
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        if capacity < 1:
            raise ContractViolationError("Replay capacity must be positive")
        self.capacity = int(capacity)
        self.state_dim = int(state_dim)
        self.action_dim = int(action_dim)
        self.rng = rng if rng is not None else np.random.default_rng()
        self._s = np.zeros((capacity, state_dim), dtype=dtype)
        self._a = np.zeros((capacity, action_dim), dtype=dtype)
        self._s_next = np.zeros((capacity, state_dim), dtype=dtype)
        self._g = np.zeros((capacity, state_dim), dtype=dtype)
        self._d = np.zeros(capacity, dtype=dtype)
        self._reached = np.zeros(capacity, dtype=bool)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, t: Transition) -> None:
        i = self._next
        self._s[i], self._a[i], self._s_next[i], self._g[i] = t.s, t.a, t.s_next, t.g
        self._d[i] = t.d
        self._reached[i] = t.reached
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def extend(self, items: Sequence[Transition]) -> int:
        for t in items:
            self.add(t)
        return len(items)

    def _gather(self, idx: np.ndarray) -> TransitionBatch:
        return TransitionBatch(s=self._s[idx], a=self._a[idx], s_next=self._s_next[idx], g=self._g[idx],
                               d=self._d[idx], reached=self._reached[idx])

    def sample(self, batch_size: int) -> TransitionBatch:
        if self._size < batch_size or batch_size < 1:
            raise PreconditionError(f"Buffer holds {self._size} items, batch of {batch_size} requested")
        return self._gather(self.rng.integers(0, self._size, size=batch_size))

    def sample_states(self, count: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        if self._size == 0 or count <= 0:
            return np.zeros((0, self._s.shape[1]), dtype=self._s.dtype)
        rng = rng if rng is not None else self.rng
        return self._s_next[rng.integers(0, self._size, size=count)].copy()

    def snapshot(self) -> TransitionBatch:
        """All stored items, oldest first."""
        if self._size < self.capacity:
            idx = np.arange(self._size)
        else:
            idx = (np.arange(self.capacity) + self._next) % self.capacity
        return self._gather(idx)


def episode_transitions(trace: EpisodeTrace, goal, goal_predicate: GoalPredicate) -> List[Transition]:
    """One d=1 transition per step, reached flag from the predicate."""
    goal = np.asarray(goal, dtype=np.float64)
    return [
        Transition(s=trace.states[t], a=trace.actions[t], s_next=trace.states[t + 1], g=goal, d=1.0,
                   reached=bool(goal_predicate(trace.states[t + 1], goal)))
        for t in range(trace.steps)
    ]


def anchor_transition(state, action_dim: int) -> Transition:
    state = np.asarray(state, dtype=np.float64)
    return Transition(s=state, a=np.zeros(action_dim), s_next=state, g=state, d=0.0, reached=True)


def store_episode(buffer: ReplayBuffer, trace: EpisodeTrace, goal, goal_predicate: GoalPredicate) -> int:
    items = episode_transitions(trace, goal, goal_predicate)
    items.append(anchor_transition(trace.states[-1], buffer.action_dim))
    return buffer.extend(items)
