"""Shared test utilities: brute-force oracles and random-instance generators.

The brute-force functions deliberately avoid the package's graph
machinery (other than the StateGraph container) so they can serve as
independent references.
"""

from __future__ import annotations

from random import Random

from hoarun.automata import (
    AccAnd,
    AccOr,
    AcceptanceCond,
    Automaton,
    Bot,
    Fin,
    Inf,
    StateGraph,
    Top,
    Transition,
)
from hoarun.labels import lor, minterm


# ---------------------------------------------------------------------------
# Brute-force trap-set oracles (2**n subset scans)


def brute_trap_sets(graph: StateGraph) -> list[frozenset[int]]:
    """All non-empty state sets closed under the edge relation."""
    n = graph.num_states
    traps = []
    for mask in range(1, 1 << n):
        members = {q for q in range(n) if mask >> q & 1}
        closed = all(t in members for q in members for t in graph.succ[q])
        if closed:
            traps.append(frozenset(members))
    return traps


def brute_minimal_traps(graph: StateGraph) -> set[frozenset[int]]:
    traps = brute_trap_sets(graph)
    return {
        t for t in traps if not any(other < t for other in traps)
    }


def brute_least_trap_containing(graph: StateGraph, state: int) -> frozenset[int]:
    """Subset-least trap set containing ``state``; asserts it is unique."""
    containing = [t for t in brute_trap_sets(graph) if state in t]
    least = min(containing, key=len)
    assert all(least <= t for t in containing)
    return least


# ---------------------------------------------------------------------------
# Independent SCC reference (Kosaraju, recursive-free)


def kosaraju_sccs(graph: StateGraph) -> set[frozenset[int]]:
    n = graph.num_states
    order: list[int] = []
    seen = [False] * n
    for root in range(n):
        if seen[root]:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        seen[root] = True
        while stack:
            node, pos = stack[-1]
            if pos < len(graph.succ[node]):
                stack[-1] = (node, pos + 1)
                child = graph.succ[node][pos]
                if not seen[child]:
                    seen[child] = True
                    stack.append((child, 0))
            else:
                order.append(node)
                stack.pop()
    pred: list[list[int]] = [[] for _ in range(n)]
    for q in range(n):
        for t in graph.succ[q]:
            pred[t].append(q)
    assigned = [False] * n
    comps: set[frozenset[int]] = set()
    for root in reversed(order):
        if assigned[root]:
            continue
        comp = [root]
        assigned[root] = True
        frontier = [root]
        while frontier:
            node = frontier.pop()
            for p in pred[node]:
                if not assigned[p]:
                    assigned[p] = True
                    comp.append(p)
                    frontier.append(p)
        comps.add(frozenset(comp))
    return comps


# ---------------------------------------------------------------------------
# Random instances


def random_graph(rng: Random, max_states: int = 10) -> StateGraph:
    n = rng.randint(1, max_states)
    density = rng.choice((0.08, 0.2, 0.35, 0.6))
    edges = [
        (q, t) for q in range(n) for t in range(n) if rng.random() < density
    ]
    return StateGraph.from_edges(n, edges)


def random_condition(rng: Random, set_count: int, depth: int) -> AcceptanceCond:
    if depth == 0 or rng.random() < 0.4:
        roll = rng.random()
        if roll < 0.05:
            return Top()
        if roll < 0.1:
            return Bot()
        index = rng.randrange(set_count)
        return Fin(index) if rng.random() < 0.5 else Inf(index)
    node = AccAnd if rng.random() < 0.5 else AccOr
    return node(
        (
            random_condition(rng, set_count, depth - 1),
            random_condition(rng, set_count, depth - 1),
        )
    )


def random_det_complete_automaton(
    rng: Random, max_states: int = 8, max_aps: int = 3, cond_depth: int = 3
) -> Automaton:
    """Deterministic complete automaton built from a random successor table.

    For every state the valuations mapping to the same successor are
    merged into one edge labeled by the disjunction of their minterms, so
    the outgoing labels partition the alphabet by construction.
    """
    n = rng.randint(1, max_states)
    ap_count = rng.randint(0, max_aps)
    aps = tuple(f"p{i}" for i in range(ap_count))
    transitions = []
    for state in range(n):
        by_target: dict[int, list[int]] = {}
        for v in range(1 << ap_count):
            by_target.setdefault(rng.randrange(n), []).append(v)
        for target, valuations in sorted(by_target.items()):
            label = lor(*(minterm(v, ap_count) for v in valuations))
            transitions.append(Transition(state, label, target))
    set_count = rng.randint(1, 3)
    acc_sets = []
    for _ in range(set_count):
        size = rng.randint(1, n)
        acc_sets.append(frozenset(rng.sample(range(n), size)))
    return Automaton(
        aps=aps,
        num_states=n,
        initial=frozenset({rng.randrange(n)}),
        transitions=tuple(transitions),
        acc_sets=tuple(acc_sets),
        condition=random_condition(rng, set_count, cond_depth),
    )


def reachable_from(graph: StateGraph, state: int) -> set[int]:
    seen = {state}
    frontier = [state]
    while frontier:
        node = frontier.pop()
        for t in graph.succ[node]:
            if t not in seen:
                seen.add(t)
                frontier.append(t)
    return seen


def all_valuations(ap_count: int):
    from hoarun.labels import Valuation

    for bits in range(1 << ap_count):
        yield Valuation(bits, ap_count)
