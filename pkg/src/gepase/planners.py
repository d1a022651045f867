"""Weighted A*, w-PA*SE, w-ePA*SE and w-GePA*SE over a pluggable domain.

The three parallel planners share one edge-based search. They differ only in
which actions are expanded inline when a state's dummy edge is expanded
(cheap) and which are pushed to OPEN as separate units of work (expensive):

* ``plan_gepase`` uses the domain's own cheap/expensive labels,
* ``plan_pase`` treats every action as cheap (state-level parallelism),
* ``plan_epase`` treats every action as expensive (edge-level parallelism).
"""

from __future__ import annotations

import enum
import heapq
import itertools
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Tuple

from .core import (
    DUMMY,
    INF,
    Action,
    ActionClass,
    BeQueue,
    EdgeKey,
    Membership,
    OpenQueue,
    Path,
    PlannerConfig,
    StateRecord,
    backtrack,
    be_promote_to_closed,
    independence_against_be,
    independence_against_open,
    open_insert_or_update,
)
from .executor import SearchSync, WorkerPool


class Domain(Protocol):
    def actions(self) -> Sequence[Action]: ...

    def generate_successor(self, edge: EdgeKey) -> Optional[Tuple[int, float]]: ...

    def heuristic(self, s: int) -> float: ...

    def pairwise_heuristic(self, s: int, t: int) -> float: ...

    def is_goal(self, s: int) -> bool: ...


class Status(enum.Enum):
    SOLVED = "solved"
    EXHAUSTED = "exhausted"
    TIMEOUT = "timeout"


@dataclass
class SearchStats:
    wall_time: float = 0.0
    edge_evaluations: int = 0
    state_expansions: int = 0
    threads_spawned: int = 0


@dataclass
class SearchResult:
    status: Status
    path: Optional[Path]
    cost: Optional[float]
    stats: SearchStats

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED


class SearchMonitor:
    """Instrumentation hooks. Every hook runs with the search lock held.

    The base class does nothing; tests subclass it to log traces or re-check
    invariants while a search runs.
    """

    def on_start(self, sync: Optional[SearchSync]) -> None:
        pass

    def on_evaluate(self, edge: EdgeKey, outcome: Optional[Tuple[int, float]]) -> None:
        pass

    def on_g_update(self, state: int, g: float) -> None:
        pass

    def on_be_pass(
        self, edge: EdgeKey, edge_f: float, be: BeQueue, records: Dict[int, StateRecord]
    ) -> None:
        """Called whenever the pruned BE independence check passes."""

    def on_select(self, edge: EdgeKey, open_: OpenQueue, be: BeQueue) -> None:
        pass

    def on_close(self, state: int) -> None:
        pass


_NULL_MONITOR = SearchMonitor()


class _EdgeSearch:
    def __init__(
        self,
        domain: Domain,
        start: int,
        config: PlannerConfig,
        cheap: Optional[Callable[[Action], bool]],
        monitor: Optional[SearchMonitor],
    ) -> None:
        self.domain = domain
        self.start = start
        self.config = config
        self.monitor = monitor or _NULL_MONITOR
        actions = list(domain.actions())
        if cheap is None:
            cheap = lambda a: a.cls is ActionClass.CHEAP  # noqa: E731
        self.cheap = [a.index for a in actions if cheap(a)]
        self.expensive = [a.index for a in actions if not cheap(a)]
        self.n_actions = len(actions)
        self.records: Dict[int, StateRecord] = {}
        self.open = OpenQueue()
        self.be = BeQueue()
        self.sync = SearchSync()
        self.stats = SearchStats()
        self.failure: Optional[BaseException] = None
        self.w = config.w
        self.eps = config.epsilon

    def _f(self, rec: StateRecord) -> float:
        return rec.g + self.w * rec.h

    # -- coordinator ------------------------------------------------------

    def run(self) -> SearchResult:
        t0 = time.perf_counter()
        deadline = t0 + self.config.timeout
        sync = self.sync
        rec = StateRecord(g=0, h=self.domain.heuristic(self.start), membership=Membership.OPEN)
        self.records[self.start] = rec
        self.monitor.on_g_update(self.start, 0)
        self.open.push(EdgeKey(self.start, DUMMY), self._f(rec))

        pool = WorkerPool(self.config.num_threads, self._expand, on_idle=sync.notify_change)
        status = Status.EXHAUSTED
        path: Optional[Path] = None
        sync.lock.acquire()
        self.monitor.on_start(sync)
        try:
            while self.failure is None:
                now = time.perf_counter()
                if now >= deadline:
                    status = Status.TIMEOUT
                    break
                if not self.open and not self.be:
                    status = Status.EXHAUSTED
                    break
                stamp = sync.stamp
                # pick an edge only once a worker can take it
                if not pool.has_idle():
                    sync.wait_for_change(stamp, deadline - now)
                    continue
                edge = self._select()
                if edge is None:
                    sync.wait_for_change(stamp, deadline - now)
                    continue
                if self.domain.is_goal(edge.state):
                    status = Status.SOLVED
                    path = backtrack(edge.state, self.records)
                    break
                if edge.is_dummy:
                    # in BE before the lock drops, so relaxations cannot
                    # reach a state whose expansion is already committed
                    rec = self.records[edge.state]
                    rec.membership = Membership.BE
                    self.be.push(edge.state, self._f(rec))
                    self.stats.state_expansions += 1
                sync.lock.release()
                try:
                    pool.assign(edge)
                finally:
                    sync.lock.acquire()
        finally:
            sync.terminate()
            sync.lock.release()
            pool.shutdown()
        self.stats.threads_spawned = pool.spawned
        self.stats.wall_time = time.perf_counter() - t0
        if self.failure is not None:
            raise self.failure
        if pool.failures:
            raise pool.failures[0]
        return SearchResult(
            status=status,
            path=path,
            cost=path.cost if path is not None else None,
            stats=self.stats,
        )

    def _select(self) -> Optional[EdgeKey]:
        """Remove and return the lowest-f OPEN edge that is independent of
        everything ahead of it in OPEN and of the lower-priority BE states."""
        verdict: Dict[int, bool] = {}
        h2 = self.domain.pairwise_heuristic
        for edge, f in self.open:
            # all OPEN edges of one state share its priority and g-value
            ok = verdict.get(edge.state)
            if ok is None:
                ok = independence_against_open(edge, self.open, self.records, h2, self.eps)
                if ok:
                    ok = independence_against_be(edge, f, self.be, self.records, h2, self.eps)
                    if ok:
                        self.monitor.on_be_pass(edge, f, self.be, self.records)
                verdict[edge.state] = ok
            if ok:
                self.monitor.on_select(edge, self.open, self.be)
                self.open.remove(edge)
                return edge
        return None

    # -- workers ----------------------------------------------------------

    def _expand(self, edge: EdgeKey) -> None:
        try:
            if edge.is_dummy:
                self._expand_state(edge.state)
            else:
                self._expand_edge(edge)
        except BaseException as exc:
            with self.sync.lock:
                if self.failure is None:
                    self.failure = exc
            self.sync.terminate()

    def _expand_state(self, s: int) -> None:
        sync = self.sync
        with sync.lock:
            rec = self.records[s]
            f = self._f(rec)
            for a in self.expensive:
                open_insert_or_update(self.open, EdgeKey(s, a), f)
            if self.n_actions == 0:
                be_promote_to_closed(s, self.be, self.records, 0)
                self.monitor.on_close(s)
            sync.signal()
        for a in self.cheap:
            if sync.terminated:
                return
            self._expand_edge(EdgeKey(s, a))

    def _expand_edge(self, edge: EdgeKey) -> None:
        domain = self.domain
        outcome = domain.generate_successor(edge)
        h_new = None
        if outcome is not None and outcome[0] not in self.records:
            h_new = domain.heuristic(outcome[0])
        with self.sync.lock:
            self.stats.edge_evaluations += 1
            self.monitor.on_evaluate(edge, outcome)
            src = self.records[edge.state]
            if outcome is not None:
                succ, cost = outcome
                rec = self.records.get(succ)
                if rec is None:
                    if h_new is None:
                        h_new = domain.heuristic(succ)
                    rec = self.records[succ] = StateRecord(h=h_new)
                g_new = src.g + cost
                if (
                    rec.membership is not Membership.CLOSED
                    and rec.membership is not Membership.BE
                    and rec.g > g_new
                ):
                    rec.g = g_new
                    rec.parent = edge
                    rec.membership = Membership.OPEN
                    self.monitor.on_g_update(succ, g_new)
                    open_insert_or_update(self.open, EdgeKey(succ, DUMMY), self._f(rec))
            src.n_successors_generated += 1
            if src.n_successors_generated == self.n_actions:
                be_promote_to_closed(edge.state, self.be, self.records, self.n_actions)
                self.monitor.on_close(edge.state)
            self.sync.signal()


def plan_gepase(
    domain: Domain,
    start: int,
    config: PlannerConfig,
    monitor: Optional[SearchMonitor] = None,
) -> SearchResult:
    """w-GePA*SE: cheap edges are evaluated inline with their state's
    expansion, expensive edges are dispatched to workers one by one."""
    return _EdgeSearch(domain, start, config, None, monitor).run()


def plan_epase(
    domain: Domain,
    start: int,
    config: PlannerConfig,
    monitor: Optional[SearchMonitor] = None,
) -> SearchResult:
    """w-ePA*SE: every real edge is its own unit of parallel work."""
    return _EdgeSearch(domain, start, config, lambda a: False, monitor).run()


def plan_pase(
    domain: Domain,
    start: int,
    config: PlannerConfig,
    monitor: Optional[SearchMonitor] = None,
) -> SearchResult:
    """w-PA*SE: a worker evaluates all edges of its state sequentially."""
    return _EdgeSearch(domain, start, config, lambda a: True, monitor).run()


def plan_wastar(
    domain: Domain,
    start: int,
    config: PlannerConfig,
    monitor: Optional[SearchMonitor] = None,
) -> SearchResult:
    """Single-threaded weighted A* with f = g + w*h.

    ``config.num_threads`` and ``config.epsilon`` are ignored. Ties on f are
    broken by push order, matching the parallel planners' queues.
    """
    monitor = monitor or _NULL_MONITOR
    t0 = time.perf_counter()
    deadline = t0 + config.timeout
    w = config.w
    actions = [a.index for a in domain.actions()]
    stats = SearchStats(threads_spawned=0)
    g: Dict[int, float] = {start: 0}
    h: Dict[int, float] = {start: domain.heuristic(start)}
    parent: Dict[int, Optional[EdgeKey]] = {start: None}
    latest: Dict[int, int] = {}
    closed = set()
    seq = itertools.count()
    heap: List[Tuple[float, int, int]] = []

    def push(s: int) -> None:
        n = next(seq)
        latest[s] = n
        heapq.heappush(heap, (g[s] + w * h[s], n, s))

    push(start)
    monitor.on_start(None)
    monitor.on_g_update(start, 0)
    status = Status.EXHAUSTED
    path = None
    while heap:
        if time.perf_counter() >= deadline:
            status = Status.TIMEOUT
            break
        _, n, s = heapq.heappop(heap)
        if latest.get(s) != n or s in closed:
            continue
        if domain.is_goal(s):
            status = Status.SOLVED
            path = _wastar_path(s, g, parent)
            break
        closed.add(s)
        stats.state_expansions += 1
        for a in actions:
            edge = EdgeKey(s, a)
            outcome = domain.generate_successor(edge)
            stats.edge_evaluations += 1
            monitor.on_evaluate(edge, outcome)
            if outcome is None:
                continue
            t, c = outcome
            if t in closed:
                continue
            if t not in h:
                h[t] = domain.heuristic(t)
            g_new = g[s] + c
            if g_new < g.get(t, INF):
                g[t] = g_new
                parent[t] = edge
                monitor.on_g_update(t, g_new)
                push(t)
        monitor.on_close(s)
    stats.wall_time = time.perf_counter() - t0
    return SearchResult(status, path, path.cost if path else None, stats)


def _wastar_path(goal: int, g: Dict[int, float], parent: Dict[int, Optional[EdgeKey]]) -> Path:
    states = [goal]
    edges = []
    e = parent[goal]
    while e is not None:
        edges.append(e)
        states.append(e.state)
        e = parent[e.state]
    states.reverse()
    edges.reverse()
    return Path(states, edges, g[goal])


PLANNERS: Dict[str, Callable[..., SearchResult]] = {
    "wastar": plan_wastar,
    "pase": plan_pase,
    "epase": plan_epase,
    "gepase": plan_gepase,
}
