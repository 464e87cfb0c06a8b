"""Strongly connected components, condensation, and minimal trap sets.

A trap set is a non-empty state set closed under the transition relation:
once a run enters it, it can never leave. The smallest trap set containing
a state q is the union of the components reachable from q's component in
the condensation; it is minimal exactly when that component is a bottom
SCC.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable

from .automata import StateGraph


@dataclass(frozen=True, slots=True)
class TrapSet:
    """Smallest trap set containing some queried state.

    ``components`` lists the SCCs whose union it is, sorted by index;
    ``minimal`` holds iff there is exactly one (a bottom SCC); ``trivial``
    holds iff the set contains an initial state.
    """

    states: frozenset[int]
    components: tuple[frozenset[int], ...]
    minimal: bool
    trivial: bool


class TrapIndex:
    """SCC decomposition of a state graph, ready for trap-set queries.

    Components are numbered by their smallest member state. The memo of
    per-component reachability is filled lazily and guarded by a lock so
    concurrent queries stay observably pure.
    """

    __slots__ = (
        "graph",
        "components",
        "state_to_comp",
        "comp_succ",
        "initial",
        "_reach",
        "_lock",
    )

    def __init__(
        self,
        graph: StateGraph,
        components: tuple[frozenset[int], ...],
        state_to_comp: tuple[int, ...],
        comp_succ: tuple[tuple[int, ...], ...],
        initial: frozenset[int],
    ) -> None:
        self.graph = graph
        self.components = components
        self.state_to_comp = state_to_comp
        self.comp_succ = comp_succ
        self.initial = initial
        self._reach: dict[int, frozenset[int]] = {}
        self._lock = threading.Lock()

    def reachable_comps(self, comp: int) -> frozenset[int]:
        """Component indices reachable from ``comp`` in the condensation, inclusive."""
        with self._lock:
            cached = self._reach.get(comp)
        if cached is not None:
            return cached
        seen = {comp}
        stack = [comp]
        while stack:
            current = stack.pop()
            for nxt in self.comp_succ[current]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        result = frozenset(seen)
        with self._lock:
            self._reach[comp] = result
        return result


def _scc_iterative(graph: StateGraph) -> list[list[int]]:
    # Tarjan with an explicit work stack; recursion would overflow on long chains.
    n = graph.num_states
    succ = graph.succ
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work: list[list[int]] = [[root, 0]]
        while work:
            frame = work[-1]
            q, child_pos = frame
            if child_pos == 0:
                index[q] = low[q] = counter
                counter += 1
                stack.append(q)
                on_stack[q] = True
            descended = False
            children = succ[q]
            while frame[1] < len(children):
                t = children[frame[1]]
                frame[1] += 1
                if index[t] == -1:
                    work.append([t, 0])
                    descended = True
                    break
                if on_stack[t]:
                    low[q] = min(low[q], index[t])
            if descended:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[q])
            if low[q] == index[q]:
                comp: list[int] = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == q:
                        break
                comps.append(comp)
    return comps


def build_index(graph: StateGraph, initial: Iterable[int] = ()) -> TrapIndex:
    """Decompose ``graph`` into SCCs and build the condensation.

    Runs in time linear in states plus edges. ``initial`` is only used to
    flag queried trap sets as trivial.
    """
    if graph.num_states == 0:
        raise ValueError("cannot index an empty graph")
    comps = sorted(_scc_iterative(graph), key=min)
    components = tuple(frozenset(c) for c in comps)
    state_to_comp = [0] * graph.num_states
    for ci, comp in enumerate(components):
        for q in comp:
            state_to_comp[q] = ci
    edges: list[set[int]] = [set() for _ in components]
    for q in range(graph.num_states):
        cq = state_to_comp[q]
        for t in graph.succ[q]:
            ct = state_to_comp[t]
            if cq != ct:
                edges[cq].add(ct)
    comp_succ = tuple(tuple(sorted(e)) for e in edges)
    return TrapIndex(graph, components, tuple(state_to_comp), comp_succ, frozenset(initial))


def min_trap_set_of(index: TrapIndex, state: int) -> TrapSet:
    """Smallest trap set containing ``state``."""
    if not 0 <= state < index.graph.num_states:
        raise ValueError(f"unknown state {state}")
    comp_ids = sorted(index.reachable_comps(index.state_to_comp[state]))
    components = tuple(index.components[c] for c in comp_ids)
    states = frozenset().union(*components)
    return TrapSet(
        states=states,
        components=components,
        minimal=len(components) == 1,
        trivial=bool(states & index.initial),
    )


def bsccs(index: TrapIndex) -> list[frozenset[int]]:
    """Components with no outgoing condensation edges, in index order."""
    return [
        index.components[c]
        for c in range(len(index.components))
        if not index.comp_succ[c]
    ]


def is_transient(graph: StateGraph, states: Iterable[int]) -> bool:
    """True iff the subgraph induced by ``states`` is acyclic.

    Self-loops count as cycles; the empty set is vacuously transient.
    Every run keeps leaving an acyclic region, so such a region can never
    hold the infinity set of a run.
    """
    members = set(states)
    if not members:
        return True
    indegree = {q: 0 for q in members}
    for q in members:
        for t in graph.succ[q]:
            if t in members:
                indegree[t] += 1
    queue = [q for q in members if indegree[q] == 0]
    seen = 0
    while queue:
        q = queue.pop()
        seen += 1
        for t in graph.succ[q]:
            if t in members:
                indegree[t] -= 1
                if indegree[t] == 0:
                    queue.append(t)
    return seen == len(members)
