"""
Two-player game arenas for LTL Synth.

An automaton edge labeled with a mix of input and output propositions is
split into an environment move (the input part) into an intermediate
controller state, followed by a controller move (the output part) into the
destination. Controller moves carry the edge colors; environment moves are
uncolored.

Arena states alternate strictly: environment states only lead to controller
states and back.
"""

import logging
from collections import deque
from enum import IntEnum
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Sequence, Tuple

from .automaton import Acceptance, Automaton, AutomatonBuilder, Edge
from .errors import PreconditionError
from .label import Label, minterms
from .ltl import SignalPartition

log = logging.getLogger('ltl-synth')


class Player(IntEnum):
    """Owner of an arena state. The controller wins on odd maximal priorities."""
    ENV = 0
    CTRL = 1


class ArenaEdge(NamedTuple):
    label: Label
    colors: FrozenSet[int]
    dst: int


class Arena:
    """Bipartite parity game; labels are over ap, env moves read inputs only
    and controller moves write outputs only."""

    def __init__(self, partition: SignalPartition, ap: Sequence[str], owner: Sequence[Player],
                 edges: Sequence[Sequence[ArenaEdge]], initial: int, acceptance: Acceptance):
        self.partition = partition
        self.ap = tuple(ap)
        self.owner = tuple(Player(o) for o in owner)
        self.edges = tuple(tuple(es) for es in edges)
        self.initial = initial
        self.acceptance = acceptance
        if len(self.owner) != len(self.edges):
            raise PreconditionError('owner list and edge lists differ in length')
        if self.owner[initial] != Player.ENV:
            raise PreconditionError('initial arena state must belong to the environment')
        missing = [x for x in self.ap if x not in partition.inputs and x not in partition.outputs]
        if missing:
            raise PreconditionError(f"propositions not in the partition: {', '.join(missing)}")
        in_mask = Label.true(self.ap).mask_of(partition.inputs)
        out_mask = Label.true(self.ap).mask_of(partition.outputs)
        for s, es in enumerate(self.edges):
            allowed = in_mask if self.owner[s] == Player.ENV else out_mask
            for e in es:
                if self.owner[e.dst] == self.owner[s]:
                    raise PreconditionError(f"arena not bipartite at state {s} -> {e.dst}")
                if e.label.support_mask() & ~allowed:
                    raise PreconditionError(
                        f"state {s}: {self.owner[s].name} edge reads {e.label.to_text()}")

    def __repr__(self):
        return f"Arena({self.num_states} states, acc={self.acceptance.to_text()!r})"

    @property
    def num_states(self) -> int:
        return len(self.edges)

    @property
    def num_colors(self) -> int:
        return self.acceptance.num_colors

    def states_of(self, player: Player) -> List[int]:
        return [s for s, o in enumerate(self.owner) if o == player]

    def to_automaton(self) -> Automaton:
        """Game automaton with state owners (True = controller)."""
        edges = [[Edge(e.label, e.colors, e.dst) for e in es] for es in self.edges]
        return Automaton(self.ap, edges, self.initial, self.acceptance,
                         [o == Player.CTRL for o in self.owner])

    @classmethod
    def from_game_automaton(cls, a: Automaton, p: SignalPartition) -> 'Arena':
        if a.state_player is None:
            raise PreconditionError('automaton carries no state owners')
        owner = [Player.CTRL if x else Player.ENV for x in a.state_player]
        edges = [[ArenaEdge(e.label, e.colors, e.dst) for e in es] for es in a.edges]
        return cls(p, a.ap, owner, edges, a.initial, a.acceptance)

    def merged_automaton(self) -> Automaton:
        """Join each env move with the following controller move again."""
        index = {self.initial: 0}
        order = [self.initial]
        builder = AutomatonBuilder(self.ap)
        builder.new_state()
        queue = deque(order)
        while queue:
            s = queue.popleft()
            for e in self.edges[s]:
                for f in self.edges[e.dst]:
                    if f.dst not in index:
                        index[f.dst] = builder.new_state()
                        order.append(f.dst)
                        queue.append(f.dst)
                    builder.add_edge(index[s], e.label & f.label, e.colors | f.colors, index[f.dst])
        return builder.build(0, self.acceptance)


# ── Split ────────────────────────────────────────────────────────────────────

def _decompose(edges: Tuple[Edge, ...], ap: Tuple[str, ...], in_mask: int):
    """Group input assignments by the controller options they leave open."""
    support = 0
    for e in edges:
        support |= e.label.support_mask()
    support &= in_mask
    groups = {}  # type: Dict[tuple, Label]
    order = []
    for bits in minterms(support):
        options = []
        for e in edges:
            out = e.label.cofactor_bits(support, bits)
            if out.is_satisfiable():
                options.append((out, e.colors, e.dst))
        sig = tuple(sorted(options, key=lambda o: (o[2], sorted(o[1]), o[0].cubes)))
        letter = Label.from_bits(ap, support, bits)
        if sig in groups:
            groups[sig] = groups[sig] | letter
        else:
            groups[sig] = letter
            order.append(sig)
    return [(groups[sig], sig) for sig in order]


def split_automaton(a: Automaton, p: SignalPartition) -> Arena:
    """Split every edge into an env move over I and a controller move over O.

    Edges of one state that agree on an input assignment share one
    intermediate controller state, and intermediate states with the same
    outgoing moves are shared across the whole arena.
    """
    if not a.complete:
        raise PreconditionError('split_automaton needs a complete automaton')
    if a.state_player is not None:
        raise PreconditionError('automaton is already a game')
    in_mask = Label.true(a.ap).mask_of(p.inputs)
    env_index = {}  # type: Dict[int, int]
    ctrl_index = {}  # type: Dict[tuple, int]
    owner = []  # type: List[Player]
    edges = []  # type: List[List[ArenaEdge]]
    memo = {}  # type: Dict[Tuple[Edge, ...], list]
    hits = 0

    def env_state(q: int) -> int:
        if q not in env_index:
            env_index[q] = len(owner)
            owner.append(Player.ENV)
            edges.append([])
            queue.append(q)
        return env_index[q]

    queue = deque()
    env_state(a.initial)
    pending = []  # type: List[Tuple[int, tuple]]
    while queue:
        q = queue.popleft()
        key = a.edges[q]
        if key in memo:
            hits += 1
            parts = memo[key]
        else:
            parts = memo[key] = _decompose(key, a.ap, in_mask)
        src = env_index[q]
        for in_label, sig in parts:
            if sig not in ctrl_index:
                ctrl_index[sig] = len(owner)
                owner.append(Player.CTRL)
                edges.append([])
                pending.append((ctrl_index[sig], sig))
            edges[src].append(ArenaEdge(in_label, frozenset(), ctrl_index[sig]))
        while pending:
            c, sig = pending.pop()
            edges[c] = [ArenaEdge(out, colors, env_state(dst)) for out, colors, dst in sig]
    arena = Arena(p, a.ap, owner, edges, env_index[a.initial], a.acceptance)
    log.debug(f"[SPLIT] {a.num_states} states -> {len(env_index)} env + "
              f"{len(ctrl_index)} controller states ({hits} memo hits)")
    return arena


# ── Strategy extraction ──────────────────────────────────────────────────────

def unsplit_strategy(ar: Arena, choice: Mapping[int, int]):
    """Mealy machine following the controller's choice (edge index per state).

    Only controller states reachable under the choice need an entry.
    """
    from .mealy import MealyMachine, MealyTransition

    index = {ar.initial: 0}
    order = [ar.initial]
    rows = []  # type: List[List[MealyTransition]]
    queue = deque(order)
    while queue:
        s = queue.popleft()
        merged = {}  # type: Dict[Tuple[Label, int], Label]
        for e in ar.edges[s]:
            if e.dst not in choice:
                raise PreconditionError(f"no choice for reachable controller state {e.dst}")
            k = choice[e.dst]
            if not 0 <= k < len(ar.edges[e.dst]):
                raise PreconditionError(f"choice {k} out of range at controller state {e.dst}")
            move = ar.edges[e.dst][k]
            if move.dst not in index:
                index[move.dst] = len(order)
                order.append(move.dst)
                queue.append(move.dst)
            key = (move.label, index[move.dst])
            merged[key] = merged[key] | e.label if key in merged else e.label
        rows.append([MealyTransition(inp, out, dst) for (out, dst), inp in merged.items()])
    machine = MealyMachine(ar.ap, ar.partition, rows)
    log.debug(f"[STRATEGY] unsplit to {machine.num_states} state(s)")
    return machine


# ── Debug output ─────────────────────────────────────────────────────────────

def dump_pgsolver(ar: Arena) -> str:
    """PGSolver text; each state gets the max color of its outgoing edges (lossy)."""
    out = [f"parity {ar.num_states - 1};"]
    for s, es in enumerate(ar.edges):
        prio = max((c for e in es for c in e.colors), default=0)
        succ = ','.join(str(e.dst) for e in es)
        name = 'init' if s == ar.initial else f"{ar.owner[s].name.lower()}{s}"
        out.append(f'{s} {prio} {int(ar.owner[s])} {succ} "{name}";')
    return '\n'.join(out) + '\n'


def print_game_hoa(ar: Arena) -> str:
    """HOA with spot-state-player and controllable-AP headers."""
    from .hoa import print_hoa
    controllable = [x for x in ar.ap if x in ar.partition.outputs]
    return print_hoa(ar.to_automaton(), controllable)
