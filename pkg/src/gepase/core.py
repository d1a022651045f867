"""Search bookkeeping shared by every planner: records, the edge and BE queues,
independence checks and path reconstruction.

Nothing here is synchronized. Callers serialize access through the global
search lock (see :mod:`gepase.executor`).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, Iterator, List, NamedTuple, Optional, Tuple

from sortedcontainers import SortedList

INF = math.inf

#: Action index reserved for the dummy edge of a state.
DUMMY = -1


class ActionClass(enum.Enum):
    CHEAP = "cheap"
    EXPENSIVE = "expensive"
    DUMMY = "dummy"


@dataclass(frozen=True)
class Action:
    index: int
    cls: ActionClass
    name: str = ""


DUMMY_ACTION = Action(DUMMY, ActionClass.DUMMY, "dummy")


class EdgeKey(NamedTuple):
    """A ``(state, action)`` pair. ``action == DUMMY`` stands for every
    outgoing edge of ``state`` that has not been enumerated yet."""

    state: int
    action: int

    @property
    def is_dummy(self) -> bool:
        return self.action == DUMMY


class Membership(enum.Enum):
    NONE = 0
    OPEN = 1
    BE = 2
    CLOSED = 3


@dataclass(slots=True)
class StateRecord:
    g: float = INF
    h: float = 0
    parent: Optional[EdgeKey] = None
    n_successors_generated: int = 0
    membership: Membership = Membership.NONE


@dataclass
class Path:
    states: List[int]
    edges: List[EdgeKey]
    cost: float

    def __len__(self) -> int:
        return len(self.states)


@dataclass
class PlannerConfig:
    """Knobs shared by all planners.

    ``w`` inflates the heuristic in queue priorities, ``epsilon`` relaxes the
    independence rule. The returned cost is within ``epsilon`` times optimal
    only when ``epsilon >= w``, so that is enforced here.
    """

    w: float = 1
    epsilon: float = 1
    num_threads: int = 1
    timeout: float = 60.0
    tie_break_seed: int = 0

    def __post_init__(self) -> None:
        if self.w < 1:
            raise ValueError(f"w must be >= 1, got {self.w}")
        if self.epsilon < 1:
            raise ValueError(f"epsilon must be >= 1, got {self.epsilon}")
        if self.epsilon < self.w:
            raise ValueError(f"epsilon ({self.epsilon}) must be >= w ({self.w})")
        if self.num_threads < 1:
            raise ValueError(f"num_threads must be >= 1, got {self.num_threads}")
        if not self.timeout > 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")
        # integral inflation factors stay ints so f-values remain exact
        if float(self.w).is_integer():
            self.w = int(self.w)
        if float(self.epsilon).is_integer():
            self.epsilon = int(self.epsilon)


class _PriorityIndex:
    """Sorted ``(f, seq, key)`` entries with O(log n) update/removal by key.

    Equal priorities come out in insertion order; an update counts as a fresh
    insertion.
    """

    def __init__(self) -> None:
        self._entries = SortedList()
        self._where: Dict[Hashable, Tuple[float, int, Hashable]] = {}
        self._seq = itertools.count()

    def __len__(self) -> int:
        return len(self._where)

    def __bool__(self) -> bool:
        return bool(self._where)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._where

    def push(self, key: Hashable, f: float) -> None:
        old = self._where.get(key)
        if old is not None:
            self._entries.remove(old)
        entry = (f, next(self._seq), key)
        self._entries.add(entry)
        self._where[key] = entry

    def remove(self, key: Hashable) -> None:
        self._entries.remove(self._where.pop(key))

    def priority(self, key: Hashable) -> float:
        return self._where[key][0]

    def front(self) -> Tuple[Hashable, float]:
        f, _, key = self._entries[0]
        return key, f

    def pop(self) -> Tuple[Hashable, float]:
        f, _, key = self._entries.pop(0)
        del self._where[key]
        return key, f

    def __iter__(self) -> Iterator[Tuple[Hashable, float]]:
        for f, _, key in self._entries:
            yield key, f

    def below(self, f: float) -> Iterator[Tuple[Hashable, float]]:
        """Entries with priority strictly less than ``f``, front to back."""
        # (f,) sorts before every (f, seq, key)
        for fe, _, key in self._entries.irange(maximum=(f,), inclusive=(True, False)):
            yield key, fe


class OpenQueue(_PriorityIndex):
    """OPEN: generated but unexpanded edges keyed on ``g(s) + w*h(s)``."""


class BeQueue(_PriorityIndex):
    """BE: states whose outgoing edges are being expanded."""


def open_insert_or_update(queue: OpenQueue, edge: EdgeKey, f: float) -> None:
    if not (f >= 0 and f != INF):
        raise ValueError(f"priority must be finite and nonnegative, got {f}")
    queue.push(edge, f)


PairwiseHeuristic = Callable[[int, int], float]


def independence_against_open(
    edge: EdgeKey,
    queue: OpenQueue,
    records: Dict[int, StateRecord],
    pairwise_h: PairwiseHeuristic,
    epsilon: float,
) -> bool:
    """True when no edge ahead of ``edge`` in OPEN can lower ``g(edge.state)``."""
    s = edge.state
    g = records[s].g
    for other, _ in queue.below(queue.priority(edge)):
        t = other.state
        if g - records[t].g > epsilon * pairwise_h(t, s):
            return False
    return True


def independence_against_be(
    edge: EdgeKey,
    edge_f: float,
    be: BeQueue,
    records: Dict[int, StateRecord],
    pairwise_h: PairwiseHeuristic,
    epsilon: float,
) -> bool:
    """Independence of ``edge`` from the states being expanded.

    Only BE states with priority below ``edge_f`` are checked; the others are
    covered by the triangle inequality on the pairwise heuristic when
    ``w <= epsilon``.
    """
    s = edge.state
    g = records[s].g
    for t, _ in be.below(edge_f):
        if g - records[t].g > epsilon * pairwise_h(t, s):
            return False
    return True


def be_promote_to_closed(
    state: int, be: BeQueue, records: Dict[int, StateRecord], n_actions: int
) -> None:
    rec = records[state]
    assert state in be, f"state {state} is not in BE"
    assert rec.n_successors_generated == n_actions, (
        f"state {state} has {rec.n_successors_generated}/{n_actions} successors generated"
    )
    be.remove(state)
    rec.membership = Membership.CLOSED


def backtrack(goal: int, records: Dict[int, StateRecord]) -> Path:
    rec = records[goal]
    assert rec.g != INF, f"goal {goal} was never reached"
    states = [goal]
    edges: List[EdgeKey] = []
    seen = {goal}
    while rec.parent is not None:
        edge = rec.parent
        assert edge.state not in seen, f"cycle in parent links at state {edge.state}"
        seen.add(edge.state)
        edges.append(edge)
        states.append(edge.state)
        rec = records[edge.state]
    states.reverse()
    edges.reverse()
    return Path(states=states, edges=edges, cost=records[goal].g)
