"""Coordinator/worker plumbing for the parallel planners.

One global lock guards all search state. The coordinator blocks on a change
signal tied to OPEN/BE mutations; workers are spawned lazily and receive one
edge at a time.
"""

from __future__ import annotations

import logging
import threading
from collections import deque
from typing import Any, Callable, List, Optional

log = logging.getLogger(__name__)


class ShutdownError(RuntimeError):
    """Raised when work is assigned to a pool that has been shut down."""


class SearchLock:
    """Non-reentrant lock that remembers its owner.

    The owner lets tests assert that no thread evaluates an edge while
    holding the search lock.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._owner: Optional[int] = None

    def acquire(self, blocking: bool = True, timeout: float = -1) -> bool:
        ok = self._lock.acquire(blocking, timeout)
        if ok:
            self._owner = threading.get_ident()
        return ok

    def release(self) -> None:
        self._owner = None
        self._lock.release()

    def held_by_current_thread(self) -> bool:
        return self._owner == threading.get_ident()

    # threading.Condition uses this to validate wait()/notify()
    _is_owned = held_by_current_thread

    def __enter__(self) -> "SearchLock":
        self.acquire()
        return self

    def __exit__(self, *exc: Any) -> None:
        self.release()


class SearchSync:
    """The global lock plus a change counter and a terminate flag.

    ``stamp`` increases on every OPEN/BE change. A waiter passes the stamp it
    last observed, so a change signalled before it starts waiting is not lost.
    """

    def __init__(self) -> None:
        self.lock = SearchLock()
        self._cond = threading.Condition(self.lock)
        self._terminate = threading.Event()
        self.stamp = 0

    @property
    def terminated(self) -> bool:
        return self._terminate.is_set()

    def signal(self) -> None:
        """Record a change. Caller must hold the lock."""
        self.stamp += 1
        self._cond.notify_all()

    def notify_change(self) -> None:
        with self.lock:
            self.signal()

    def terminate(self) -> None:
        self._terminate.set()
        if self.lock.held_by_current_thread():
            self.signal()
        else:
            self.notify_change()

    def wait_for_change(self, since: int, timeout: Optional[float] = None) -> None:
        """Block until ``stamp`` moves past ``since``, termination, or timeout.

        The lock must be held; it is released while blocked. Spurious returns
        are allowed, so callers re-check their predicates.
        """
        if self.stamp != since or self.terminated:
            return
        self._cond.wait(timeout)


def wait_for_change(sync: SearchSync, since: int, timeout: Optional[float] = None) -> None:
    sync.wait_for_change(since, timeout)


class WorkerPool:
    """Up to ``capacity`` worker threads, each running ``expand(edge)`` for one
    assigned edge at a time.

    ``on_idle`` runs (without any pool lock held) each time a worker finishes,
    so a coordinator waiting for a free worker can be woken.
    """

    def __init__(
        self,
        capacity: int,
        expand: Callable[[Any], None],
        on_idle: Optional[Callable[[], None]] = None,
        name: str = "expand",
    ) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._expand = expand
        self._on_idle = on_idle
        self._name = name
        self._cv = threading.Condition()
        self._threads: List[threading.Thread] = []
        self._slots: List[Any] = []
        self._idle: deque = deque()
        self._terminate = False
        self._joined = False
        self.failures: List[BaseException] = []

    @property
    def spawned(self) -> int:
        return len(self._threads)

    @property
    def terminated(self) -> bool:
        return self._terminate

    def has_idle(self) -> bool:
        with self._cv:
            return bool(self._idle) or len(self._threads) < self.capacity

    def busy(self) -> int:
        with self._cv:
            return len(self._threads) - len(self._idle)

    def assign(self, edge: Any) -> None:
        if edge is None:
            raise ValueError("cannot assign None")
        with self._cv:
            while True:
                if self._terminate:
                    raise ShutdownError("worker pool is shut down")
                if self._idle:
                    i = self._idle.popleft()
                    break
                if len(self._threads) < self.capacity:
                    i = self._spawn()
                    break
                self._cv.wait()
            self._slots[i] = edge
            self._cv.notify_all()

    def _spawn(self) -> int:
        i = len(self._threads)
        self._slots.append(None)
        t = threading.Thread(target=self._run, args=(i,), name=f"{self._name}-{i}", daemon=True)
        self._threads.append(t)
        t.start()
        return i

    def _run(self, i: int) -> None:
        while True:
            with self._cv:
                while self._slots[i] is None and not self._terminate:
                    self._cv.wait()
                if self._terminate:
                    self._slots[i] = None
                    return
                edge = self._slots[i]
            try:
                self._expand(edge)
            except BaseException as exc:  # surfaced through .failures
                log.exception("worker %d failed on %r", i, edge)
                with self._cv:
                    self.failures.append(exc)
            with self._cv:
                self._slots[i] = None
                self._idle.append(i)
                self._cv.notify_all()
            if self._on_idle is not None:
                self._on_idle()

    def shutdown(self) -> None:
        with self._cv:
            if self._joined:
                return
            self._terminate = True
            self._joined = True
            self._cv.notify_all()
            threads = list(self._threads)
        for t in threads:
            if t is not threading.current_thread():
                t.join()
