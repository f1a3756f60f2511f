"""
Deterministic parity automata for LTL Synth.

    determinize_nba               Safra-style construction, NBA -> DPA
    car_paritize                  color appearance record, per SCC, DELA -> DPA
    minimize_colors               fewest colors for the same transition structure
    merge_identical_successors    merge states with the same outgoing edges

All results use transition-based "parity max odd" acceptance. An edge's
priority is the maximum of its colors; an uncolored edge has priority -1,
which is odd and below every color, as the acceptance formula reads it.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from . import config as cfg
from .automaton import BUCHI, Acceptance, Automaton, AutomatonBuilder, Edge
from .errors import BudgetExceeded, PreconditionError
from .label import Label, minterms

log = logging.getLogger('ltl-synth')


def edge_priority(colors: FrozenSet[int]) -> int:
    return max(colors) if colors else -1


# ── Safra determinization ────────────────────────────────────────────────────

class SafraNode(NamedTuple):
    """One node of a Safra tree: its label and its children, oldest first."""
    states: FrozenSet[int]
    children: Tuple['SafraNode', ...]


@dataclass(frozen=True)
class SafraState:
    """Macro-state: every NBA state sits in its innermost brace.

    braces[b] is the parent of brace b (-1 for the root). Brace numbers
    follow age, so a smaller number is an older node.
    """
    nodes: Tuple[Tuple[int, int], ...]
    braces: Tuple[int, ...]
    player: Optional[bool] = None

    def forest(self) -> Tuple[SafraNode, ...]:
        direct = {b: set() for b in range(len(self.braces))}
        for s, b in self.nodes:
            direct[b].add(s)
        children = {b: [] for b in range(len(self.braces))}
        roots = []
        for b, parent in enumerate(self.braces):
            (children[parent] if parent >= 0 else roots).append(b)

        def build(b: int) -> SafraNode:
            kids = tuple(build(c) for c in children[b])
            states = frozenset(direct[b]).union(*(k.states for k in kids))
            return SafraNode(states, kids)

        return tuple(build(b) for b in roots)

    def __str__(self):
        def show(n: SafraNode) -> str:
            inner = ' '.join(show(c) for c in n.children)
            own = ','.join(str(s) for s in sorted(n.states))
            return '{' + own + (' ' + inner if inner else '') + '}'
        return ' '.join(show(n) for n in self.forest()) or '{}'


def _path(parents: Sequence[int], brace: int) -> Tuple[int, ...]:
    out = []
    while brace >= 0:
        out.append(brace)
        brace = parents[brace]
    return tuple(reversed(out))


def _better(p: Tuple[int, ...], q: Tuple[int, ...]) -> bool:
    """Whether brace path p beats q: older braces first, deeper on a tie."""
    for x, y in zip(p, q):
        if x != y:
            return x < y
    return len(p) > len(q)


def _safra_step(a: Automaton, state: SafraState, bits: int) -> Tuple[SafraState, Optional[int]]:
    """Successor macro-state on one letter and its most significant event (or None).

    Brace b dying is event 2b+1 and brace b turning green is 2b+2, so older
    braces dominate and a death outranks a green light on the same brace.
    """
    parents = list(state.braces)
    old = len(parents)
    assign = {}  # type: Dict[int, int]
    paths = {}  # type: Dict[int, Tuple[int, ...]]
    fresh = {}  # type: Dict[int, int]
    for s, b in state.nodes:
        for e in a.edges[s]:
            if not e.label.evaluate_bits(bits):
                continue
            brace = b
            if e.colors:
                if b not in fresh:
                    parents.append(b)
                    fresh[b] = len(parents) - 1
                brace = fresh[b]
            path = _path(parents, brace)
            if e.dst not in assign or _better(path, paths[e.dst]):
                assign[e.dst] = brace
                paths[e.dst] = path

    nb = len(parents)
    direct = [0] * nb
    for brace in assign.values():
        direct[brace] += 1
    occupied = [False] * nb
    for b in range(nb):
        if direct[b]:
            x = b
            while x >= 0 and not occupied[x]:
                occupied[x] = True
                x = parents[x]

    events = []
    removed = [not occupied[b] for b in range(nb)]
    for b in range(old):
        if not occupied[b]:
            events.append(2 * b + 1)
    for b in range(nb):
        if removed[b] or direct[b]:
            continue
        # every state of b sits in a descendant: b is green
        if b < old:
            events.append(2 * b + 2)
        for d in range(b + 1, nb):
            if not removed[d] and b in _path(parents, d)[:-1]:
                removed[d] = True
        for s, brace in assign.items():
            if brace != b and b in paths[s]:
                assign[s] = b
        direct[b] = 1

    kept = [b for b in range(nb) if not removed[b]]
    renumber = {b: i for i, b in enumerate(kept)}
    braces = tuple(renumber[parents[b]] if parents[b] >= 0 else -1 for b in kept)
    nodes = tuple(sorted((s, renumber[b]) for s, b in assign.items()))
    player = None
    if a.state_player is not None:
        if nodes:
            player = a.state_player[nodes[0][0]]
        else:
            player = not state.player
    return SafraState(nodes, braces, player), (min(events) if events else None)


def _determinize(a: Automaton) -> Tuple[Automaton, List[SafraState]]:
    if a.acceptance.kind != BUCHI:
        raise PreconditionError(f"determinize_nba needs Buchi acceptance, got {a.acceptance.to_text()}")
    n = a.num_states
    # a tree has at most n braces, so events stay within 1..2n
    neutral = 2 * n + 1
    player = a.state_player[a.initial] if a.state_player is not None else None
    init = SafraState(((a.initial, 0),), (-1,), player)
    index = {init: 0}  # type: Dict[SafraState, int]
    order = [init]
    builder = AutomatonBuilder(a.ap)
    builder.new_state(player)
    queue = deque([init])
    while queue:
        state = queue.popleft()
        src = index[state]
        members = [s for s, _ in state.nodes]
        if a.state_player is not None and len({a.state_player[s] for s in members}) > 1:
            raise PreconditionError('macro-state mixes players; game automaton is not bipartite')
        support = 0
        for s in members:
            for e in a.edges[s]:
                support |= e.label.support_mask()
        grouped = {}  # type: Dict[Tuple[SafraState, int], Label]
        for bits in minterms(support):
            succ, event = _safra_step(a, state, bits)
            color = 0 if event is None else neutral - event
            letter = Label.from_bits(a.ap, support, bits)
            key = (succ, color)
            grouped[key] = grouped[key] | letter if key in grouped else letter
        for (succ, color), label in grouped.items():
            if succ not in index:
                index[succ] = len(order)
                order.append(succ)
                builder.new_state(succ.player)
                queue.append(succ)
                if len(order) > cfg.DETERMINIZE_STATE_BUDGET:
                    raise BudgetExceeded('determinization state count', cfg.DETERMINIZE_STATE_BUDGET)
            builder.add_edge(src, label, (color,), index[succ])
    aut = builder.build(0, Acceptance.parity_max_odd(neutral + 1), a.name)
    log.debug(f"[DETERMINIZE] {a.num_states} NBA states -> {aut.num_states} macro-states")
    return aut, order


def determinize_nba(a: Automaton) -> Automaton:
    """Deterministic complete parity automaton with the language of the NBA a.

    Successors are computed per assignment of the propositions that the
    macro-state's edges mention. Game automata (with state owners) keep
    their owners; each player gets its own empty sink.
    """
    return _determinize(a)[0]


def safra_states(a: Automaton) -> List[SafraState]:
    """Macro-states of determinize_nba(a), in state order."""
    return _determinize(a)[1]


# ── Color appearance record ──────────────────────────────────────────────────

class CarState(NamedTuple):
    state: int
    record: Tuple[int, ...]


def car_paritize(a: Automaton) -> Automaton:
    """Deterministic Emerson-Lei automaton to max-odd parity, SCC by SCC.

    Inside an SCC the record lists that SCC's colors, most recently seen
    first. An edge moves its colors to the front keeping their relative
    order; the emitted priority grows with the deepest moved position and is
    odd when the colors ahead of it (inclusive) form an accepting set. Edges
    leaving an SCC get color 0 and restart the record.
    """
    if not a.deterministic:
        raise PreconditionError('car_paritize needs a deterministic automaton')
    reach = a.restrict(a.reachable())
    acc = reach.acceptance
    if acc.is_parity:
        log.debug('[CAR] input already parity')
        return reach
    if acc.kind == BUCHI:
        edges = [[Edge(e.label, frozenset({1 if e.colors else 0}), e.dst) for e in es]
                 for es in reach.edges]
        log.debug('[CAR] Buchi input relabeled')
        return reach.with_edges(edges, Acceptance.parity_max_odd(2))
    if acc.num_colors > cfg.COLOR_BUDGET:
        raise BudgetExceeded(f"{acc.num_colors} colors", cfg.COLOR_BUDGET)

    comp_of = {}  # type: Dict[int, int]
    for cid, comp in enumerate(nx.strongly_connected_components(reach.graph())):
        for s in comp:
            comp_of[s] = cid
    scc_colors = {}  # type: Dict[int, set]
    for s, e in reach.iter_edges():
        if comp_of[s] == comp_of[e.dst]:
            scc_colors.setdefault(comp_of[s], set()).update(e.colors)
    start = {cid: tuple(sorted(scc_colors.get(cid, ()))) for cid in set(comp_of.values())}
    widest = max((len(r) for r in start.values()), default=0)
    empty_color = 1 if acc.accepts(()) else 0

    init = CarState(reach.initial, start[comp_of[reach.initial]])
    index = {init: 0}  # type: Dict[CarState, int]
    builder = AutomatonBuilder(reach.ap)
    builder.new_state()
    queue = deque([init])
    while queue:
        cs = queue.popleft()
        src = index[cs]
        for e in reach.edges[cs.state]:
            if comp_of[e.dst] != comp_of[cs.state]:
                color, nxt = 0, CarState(e.dst, start[comp_of[e.dst]])
            else:
                record = cs.record
                moved = [c for c in record if c in e.colors]
                if not moved:
                    color, nxt = empty_color, CarState(e.dst, record)
                else:
                    p = max(record.index(c) for c in moved)
                    color = 2 * (p + 1) + (1 if acc.accepts(record[:p + 1]) else 0)
                    rest = [c for c in record if c not in e.colors]
                    nxt = CarState(e.dst, tuple(moved + rest))
            if nxt not in index:
                index[nxt] = builder.new_state()
                queue.append(nxt)
            builder.add_edge(src, e.label, (color,), index[nxt])
    result = builder.build(0, Acceptance.parity_max_odd(2 * widest + 2), reach.name)
    log.debug(f"[CAR] {reach.num_states} states, {acc.num_colors} colors -> "
              f"{result.num_states} states, {result.acceptance.num_colors} colors")
    return result


# ── Color minimization ───────────────────────────────────────────────────────

def minimize_colors(a: Automaton) -> Automaton:
    """Fewest parity colors for the same transition structure.

    Recursive SCC analysis: in each SCC the edges of highest priority get
    the smallest rank of the right parity above everything the rest of the
    SCC needs. Edges on no cycle take the smallest rank in use.
    """
    if not a.acceptance.is_parity:
        raise PreconditionError(f"minimize_colors needs parity acceptance, got {a.acceptance.to_text()}")
    src, dst, prio = [], [], []
    for s, e in a.iter_edges():
        src.append(s)
        dst.append(e.dst)
        prio.append(edge_priority(e.colors))
    rank = {}  # type: Dict[int, int]

    def assign(eids: List[int]) -> Optional[int]:
        g = nx.DiGraph()
        for i in eids:
            g.add_edge(src[i], dst[i])
        top = None
        for comp in nx.strongly_connected_components(g):
            inner = [i for i in eids if src[i] in comp and dst[i] in comp]
            if not inner:
                continue
            m = max(prio[i] for i in inner)
            h = assign([i for i in inner if prio[i] != m])
            if h is None:
                t = m % 2
            else:
                t = h if h % 2 == m % 2 else h + 1
            for i in inner:
                rank.setdefault(i, t)
            top = t if top is None else max(top, t)
        return top

    assign(list(range(len(src))))
    low = min(rank.values()) if rank else 0
    edges = [[] for _ in range(a.num_states)]
    i = 0
    for s, e in a.iter_edges():
        edges[s].append(Edge(e.label, frozenset({rank.get(i, low)}), e.dst))
        i += 1
    count = max(list(rank.values()) + [low]) + 1
    result = a.with_edges(edges, Acceptance.parity_max_odd(count))
    log.debug(f"[COLORS] {a.acceptance.num_colors} -> {count} colors")
    return result


# ── Successor merging ────────────────────────────────────────────────────────

def merge_identical_successors(a: Automaton) -> Automaton:
    """Merge states with identical outgoing edges, repeated to a fixpoint."""
    rep = list(range(a.num_states))
    while True:
        groups = {}  # type: Dict[tuple, int]
        changed = False
        for s in range(a.num_states):
            if rep[s] != s:
                continue
            slot = {}  # type: Dict[Tuple[int, FrozenSet[int]], Label]
            for e in a.edges[s]:
                key = (rep[e.dst], e.colors)
                slot[key] = slot[key] | e.label if key in slot else e.label
            player = a.state_player[s] if a.state_player is not None else None
            sig = (player, frozenset((d, c, lab) for (d, c), lab in slot.items()))
            if sig in groups:
                target = groups[sig]
                for t in range(a.num_states):
                    if rep[t] == s:
                        rep[t] = target
                changed = True
            else:
                groups[sig] = s
        if not changed:
            break

    keep = [s for s in range(a.num_states) if rep[s] == s]
    keep.remove(rep[a.initial])
    keep = [rep[a.initial]] + keep
    index = {s: i for i, s in enumerate(keep)}
    builder = AutomatonBuilder(a.ap)
    for s in keep:
        builder.new_state(a.state_player[s] if a.state_player is not None else None)
    for s in keep:
        for e in a.edges[s]:
            builder.add_edge(index[s], e.label, e.colors, index[rep[e.dst]])
    result = builder.build(0, a.acceptance, a.name)
    log.debug(f"[MERGE] {a.num_states} -> {result.num_states} states")
    return result
