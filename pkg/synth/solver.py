"""
Parity game solving for LTL Synth.

Transition-based max-odd parity games are solved with Zielonka's algorithm
on edge priorities. The arena is first cut into SCCs, handled bottom-up in
the condensation; each SCC is compressed to the fewest priorities and checked
for a single parity before the recursion runs. The recursion itself is
driven by an explicit stack of generators, so deep arenas do not hit the
interpreter's recursion limit.

The controller (Player.CTRL) wins a play when the largest priority seen
infinitely often is odd.
"""

import heapq
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Generator, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from . import config as cfg
from .arena import Arena, Player
from .errors import BudgetExceeded, PreconditionError
from .parity import edge_priority

log = logging.getLogger('ltl-synth')

_KINDS = ('max odd', 'max even', 'min odd', 'min even')


@dataclass
class SolveResult:
    """Winner per state and positional strategies (state -> edge index)."""
    winner: List[Player]
    strategy: Dict[int, int] = field(default_factory=dict)
    env_strategy: Dict[int, int] = field(default_factory=dict)

    def controller_wins(self, state: int) -> bool:
        return self.winner[state] == Player.CTRL

    def region(self, player: Player) -> Set[int]:
        return {s for s, w in enumerate(self.winner) if w == player}


def compress_parities(colors: Sequence[int], kind: str = 'max odd') -> List[int]:
    """Renumber priorities onto the smallest range keeping order and parity.

    -1 marks an uncolored edge. It is odd and least significant in every
    kind, so it sorts below all colors for max kinds and above them for min
    kinds.
    """
    if kind not in _KINDS:
        raise PreconditionError(f"unknown parity kind {kind!r}")
    if kind.startswith('min'):
        order = sorted(set(colors), key=lambda c: (c < 0, c))
    else:
        order = sorted(set(colors))
    mapping = {}  # type: Dict[int, int]
    current = None
    last = None
    for c in order:
        if current is None:
            current = c % 2
        elif c % 2 != last:
            current += 1
        mapping[c] = current
        last = c % 2
    return [mapping[c] for c in colors]


# ── Attractors ───────────────────────────────────────────────────────────────

class _Game:
    """Arena view with flat edge ids and predecessor lists."""

    def __init__(self, ar: Arena):
        self.ar = ar
        self.owner = ar.owner
        self.succ = []  # type: List[List[Tuple[int, int]]]
        self.pred = [[] for _ in range(ar.num_states)]  # type: List[List[Tuple[int, int]]]
        self.prio = []  # type: List[int]
        self.edge_src = []  # type: List[int]
        self.edge_pos = []  # type: List[int]
        for s, es in enumerate(ar.edges):
            row = []
            for k, e in enumerate(es):
                eid = len(self.prio)
                self.prio.append(edge_priority(e.colors))
                self.edge_src.append(s)
                self.edge_pos.append(k)
                row.append((eid, e.dst))
                self.pred[e.dst].append((eid, s))
            self.succ.append(row)


def _attractor(game: _Game, region: FrozenSet[int], prio: Dict[int, int], player: Player,
               target: Iterable[int] = (), top: Optional[int] = None):
    """States of region from which player forces reaching target or an edge of priority top.

    Only edges with a priority in prio count as moves. Returns the attractor
    and the player's edge choice on its own states.
    """
    attr = set(target) & region
    strategy = {}  # type: Dict[int, int]
    escapes = {}  # type: Dict[int, int]
    for s in sorted(region - attr):
        inside = [eid for eid, d in game.succ[s] if eid in prio and d in region]
        hot = [eid for eid in inside if prio[eid] == top] if top is not None else []
        if game.owner[s] == player and hot:
            attr.add(s)
            strategy[s] = hot[0]
        elif game.owner[s] != player and hot and len(hot) == len(inside):
            attr.add(s)
        else:
            escapes[s] = len(inside) - len(hot)
    heap = sorted(attr)
    while heap:
        t = heapq.heappop(heap)
        for eid, s in game.pred[t]:
            if s not in region or s in attr or eid not in prio:
                continue
            if top is not None and prio[eid] == top:
                continue
            if game.owner[s] == player:
                attr.add(s)
                strategy[s] = eid
                heapq.heappush(heap, s)
            else:
                escapes[s] -= 1
                if escapes[s] == 0:
                    attr.add(s)
                    heapq.heappush(heap, s)
    return frozenset(attr), strategy


# ── Zielonka ─────────────────────────────────────────────────────────────────

_Result = Tuple[FrozenSet[int], FrozenSet[int], Dict[int, int]]


def _any_edge(game: _Game, s: int, region: FrozenSet[int], prio: Dict[int, int]) -> int:
    for eid, d in game.succ[s]:
        if eid in prio and d in region:
            return eid
    raise PreconditionError(f"state {s} has no successor inside its region")


def _zielonka(game: _Game, region: FrozenSet[int], prio: Dict[int, int]) -> Generator:
    """Yields (sub-region, priorities) to solve; returns (env region, ctrl region, strategy).

    prio holds the priorities of the edges that are still moves of this
    subgame. Top edges left outside the attractor of the top edges are
    opponent moves and are not part of the first subgame.
    """
    if not region:
        return frozenset(), frozenset(), {}
    inner = [eid for s in region for eid, d in game.succ[s] if eid in prio and d in region]
    parities = {prio[eid] % 2 for eid in inner}
    if len(parities) == 1:
        winner = Player(parities.pop())
        strategy = {s: _any_edge(game, s, region, prio)
                    for s in sorted(region) if game.owner[s] == winner}
        if winner == Player.CTRL:
            return frozenset(), region, strategy
        return region, frozenset(), strategy

    top = max(prio[eid] for eid in inner)
    p = Player(top % 2)
    q = Player(1 - p)
    a, a_strategy = _attractor(game, region, prio, p, top=top)
    lower = {eid: v for eid, v in prio.items() if v != top}
    sub_env, sub_ctrl, sub_strategy = yield region - a, lower
    won = {Player.ENV: sub_env, Player.CTRL: sub_ctrl}
    if not won[q]:
        strategy = dict(sub_strategy)
        strategy.update(a_strategy)
        for s in region - a:
            if game.owner[s] == p and s not in strategy:
                strategy[s] = _any_edge(game, s, region - a, lower)
        result = {p: region, q: frozenset()}
        return result[Player.ENV], result[Player.CTRL], strategy

    b, b_strategy = _attractor(game, region, prio, q, target=won[q])
    rest_env, rest_ctrl, rest_strategy = yield region - b, prio
    strategy = {s: e for s, e in sub_strategy.items() if s in won[q] and game.owner[s] == q}
    strategy.update(b_strategy)
    strategy.update(rest_strategy)
    rest = {Player.ENV: rest_env, Player.CTRL: rest_ctrl}
    result = {p: rest[p], q: rest[q] | b}
    return result[Player.ENV], result[Player.CTRL], strategy


def _run(game: _Game, region: FrozenSet[int], prio: Dict[int, int]) -> _Result:
    stack = [_zielonka(game, region, prio)]
    value = None
    while stack:
        try:
            request = stack[-1].send(value)
        except StopIteration as done:
            stack.pop()
            value = done.value
            continue
        sub_region, sub_prio = request
        stack.append(_zielonka(game, sub_region, sub_prio))
        value = None
    return value


# ── Entry points ─────────────────────────────────────────────────────────────

def _check(ar: Arena):
    if not ar.acceptance.is_parity:
        raise PreconditionError(f"solver needs parity max odd acceptance, got {ar.acceptance.to_text()}")
    for s, es in enumerate(ar.edges):
        if not es:
            raise PreconditionError(f"arena state {s} has no successors")


def solve(ar: Arena) -> SolveResult:
    """Winning regions and positional strategies for both players."""
    _check(ar)
    game = _Game(ar)
    n = ar.num_states
    winner = [None] * n  # type: List[Optional[Player]]
    strategy = {}  # type: Dict[int, int]

    # edges of s not yet leading into each player's winning region
    left = {p: [len(game.succ[s]) for s in range(n)] for p in Player}

    def settle(states: Iterable[int], player: Player):
        heap = sorted(states)
        while heap:
            t = heapq.heappop(heap)
            for eid, s in game.pred[t]:
                left[player][s] -= 1
                if winner[s] is not None:
                    continue
                if game.owner[s] == player:
                    winner[s] = player
                    strategy[s] = eid
                    heapq.heappush(heap, s)
                elif left[player][s] == 0:
                    winner[s] = player
                    heapq.heappush(heap, s)

    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for s in range(n):
        for _, d in game.succ[s]:
            g.add_edge(s, d)
    dag = nx.condensation(g)
    sccs = 0
    for comp in reversed(list(nx.topological_sort(dag))):
        region = frozenset(s for s in dag.nodes[comp]['members'] if winner[s] is None)
        if not region:
            continue
        sccs += 1
        inner = [eid for s in region for eid, d in game.succ[s] if d in region]
        compressed = compress_parities([game.prio[eid] for eid in inner])
        prio = dict(zip(inner, compressed))
        env_region, ctrl_region, local = _run(game, region, prio)
        for s in env_region:
            winner[s] = Player.ENV
        for s in ctrl_region:
            winner[s] = Player.CTRL
        strategy.update(local)
        # spread both results upstream
        settle(ctrl_region, Player.CTRL)
        settle(env_region, Player.ENV)

    ctrl = {s: game.edge_pos[eid] for s, eid in strategy.items()
            if ar.owner[s] == Player.CTRL and winner[s] == Player.CTRL}
    env = {s: game.edge_pos[eid] for s, eid in strategy.items()
           if ar.owner[s] == Player.ENV and winner[s] == Player.ENV}
    result = SolveResult(list(winner), ctrl, env)
    log.debug(f"[SOLVE] {n} states, {sccs} SCC(s), controller wins "
              f"{len(result.region(Player.CTRL))}, initial won by {winner[ar.initial].name}")
    return result


def brute_force_solve(ar: Arena) -> SolveResult:
    """Independent solver for tests: every edge becomes a state carrying its
    priority, then the textbook state-based recursion with fixpoint attractors.
    Only the winner map is computed."""
    _check(ar)
    n = ar.num_states
    nodes = n + sum(len(es) for es in ar.edges)
    if nodes > cfg.BRUTE_FORCE_STATE_BUDGET:
        raise BudgetExceeded(f"{nodes} exploded states", cfg.BRUTE_FORCE_STATE_BUDGET)
    owner = list(ar.owner)
    color = {s: -2 for s in range(n)}
    succ = {s: [] for s in range(n)}  # type: Dict[int, List[int]]
    for s, es in enumerate(ar.edges):
        for e in es:
            mid = len(owner)
            owner.append(Player.ENV)
            color[mid] = edge_priority(e.colors)
            succ[mid] = [e.dst]
            succ[s].append(mid)

    def attractor(target: Set[int], nodes: Set[int], player: int) -> Set[int]:
        attr = set(target)
        while True:
            grow = set()
            for v in nodes - attr:
                out = [w for w in succ[v] if w in nodes]
                if owner[v] == player and any(w in attr for w in out):
                    grow.add(v)
                elif owner[v] != player and all(w in attr for w in out):
                    grow.add(v)
            if not grow:
                return attr
            attr |= grow

    def mcnaughton(nodes: Set[int]) -> Tuple[Set[int], Set[int]]:
        won = {0: set(), 1: set()}
        if not nodes:
            return won[0], won[1]
        nodes = set(nodes)
        while True:
            top = max(color[v] for v in nodes)
            sigma = top % 2
            a = attractor({v for v in nodes if color[v] == top}, nodes, sigma)
            sub = mcnaughton(nodes - a)
            if not sub[1 - sigma]:
                won[sigma] |= nodes
                return won[0], won[1]
            b = attractor(sub[1 - sigma], nodes, 1 - sigma)
            won[1 - sigma] |= b
            nodes -= b
            if not nodes:
                return won[0], won[1]

    w_env, w_ctrl = mcnaughton(set(range(len(owner))))
    winner = [Player.CTRL if s in w_ctrl else Player.ENV for s in range(n)]
    return SolveResult(winner)
