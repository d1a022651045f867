"""Instrumentation shared by planner and acceptance tests."""

from __future__ import annotations

import threading
from collections import Counter, defaultdict
from dataclasses import replace

from gepase.core import ActionClass
from gepase.planners import SearchMonitor

from oracles import eq2_full


class Relabeled:
    """Domain wrapper that reports every action with one class."""

    def __init__(self, domain, cls: ActionClass):
        self.inner = domain
        self.cls = cls

    def actions(self):
        return [replace(a, cls=self.cls) for a in self.inner.actions()]

    def __getattr__(self, name):
        return getattr(self.inner, name)


class CountingDomain:
    """Counts generate_successor calls and checks the search lock is free."""

    def __init__(self, domain):
        self.inner = domain
        self.calls = 0
        self.lock_violations = 0
        self.sync = None
        self._mu = threading.Lock()

    def generate_successor(self, edge):
        if self.sync is not None and self.sync.lock.held_by_current_thread():
            self.lock_violations += 1
        with self._mu:
            self.calls += 1
        return self.inner.generate_successor(edge)

    def __getattr__(self, name):
        return getattr(self.inner, name)


class TraceMonitor(SearchMonitor):
    """Records evaluations, closures and g-updates. With ``eps`` set, every
    edge that passes the pruned BE check is re-checked against all of BE."""

    def __init__(self, domain=None, eps=None, check_dummy_exclusivity=False):
        self.domain = domain
        self.eps = eps
        self.evaluated = []
        self.closes = Counter()
        self.g_history = defaultdict(list)
        self.be_checks = 0
        self.be_violations = 0
        self.exclusivity_violations = 0
        self.check_dummy_exclusivity = check_dummy_exclusivity
        self.sync = None

    def on_start(self, sync):
        self.sync = sync
        if isinstance(self.domain, CountingDomain):
            self.domain.sync = sync

    def on_evaluate(self, edge, outcome):
        self.evaluated.append(edge)

    def on_g_update(self, state, g):
        self.g_history[state].append(g)

    def on_close(self, state):
        self.closes[state] += 1

    def on_be_pass(self, edge, edge_f, be, records):
        # an empty BE makes the check vacuous, so it is not counted as a sample
        if self.eps is None or not be:
            return
        self.be_checks += 1
        states = [s for s, _ in be]
        if not eq2_full(edge, states, records, self.domain.pairwise_heuristic, self.eps):
            self.be_violations += 1

    def on_select(self, edge, open_, be):
        if self.check_dummy_exclusivity:
            dummy, real = set(), set()
            for e, _ in open_:
                (dummy if e.is_dummy else real).add(e.state)
            if dummy & real:
                self.exclusivity_violations += 1

    @property
    def reclosed(self):
        return sum(1 for c in self.closes.values() if c > 1)

    def g_monotone(self):
        return all(all(b < a for a, b in zip(h, h[1:])) for h in self.g_history.values())
