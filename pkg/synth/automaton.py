"""
Omega-automata for LTL Synth.

Automata are transition-based: colors live on edges, and an Emerson-Lei
acceptance formula over Inf(c)/Fin(c) atoms decides which runs are accepting.
Automata are treated as immutable values; every transformation returns a new
one and recomputes the deterministic/complete flags from the edges.
"""

import logging
from collections import deque
from typing import (Callable, Dict, FrozenSet, Hashable, Iterable, List, Mapping,
                    NamedTuple, Optional, Sequence, Set, Tuple)

import networkx as nx

from . import config as cfg
from .errors import BudgetExceeded, PreconditionError
from .label import Label

log = logging.getLogger('ltl-synth')

# ── Acceptance conditions ────────────────────────────────────────────────────

BUCHI = 'buchi'
PARITY = 'parity-max-odd'
GENERALIZED = 'generalized'
ARBITRARY = 'arbitrary'

ACC_TRUE = ('t',)
ACC_FALSE = ('f',)


def acc_inf(c: int) -> tuple:
    return ('Inf', c)


def acc_fin(c: int) -> tuple:
    return ('Fin', c)


def acc_and(*parts: tuple) -> tuple:
    flat = []
    for p in parts:
        if p == ACC_FALSE:
            return ACC_FALSE
        if p == ACC_TRUE:
            continue
        flat.extend(p[1] if p[0] == 'and' else (p,))
    if not flat:
        return ACC_TRUE
    return flat[0] if len(flat) == 1 else ('and', tuple(flat))


def acc_or(*parts: tuple) -> tuple:
    flat = []
    for p in parts:
        if p == ACC_TRUE:
            return ACC_TRUE
        if p == ACC_FALSE:
            continue
        flat.extend(p[1] if p[0] == 'or' else (p,))
    if not flat:
        return ACC_FALSE
    return flat[0] if len(flat) == 1 else ('or', tuple(flat))


def parity_max_odd_formula(k: int) -> tuple:
    """Canonical nested formula of 'parity max odd k' over colors 0..k-1."""
    formula = ACC_TRUE
    for c in range(k):
        if c % 2:
            formula = acc_or(acc_inf(c), formula)
        else:
            formula = acc_and(acc_fin(c), formula)
    return formula


def _shift(formula: tuple, offset: int) -> tuple:
    tag = formula[0]
    if tag in ('Inf', 'Fin'):
        return (tag, formula[1] + offset)
    if tag in ('and', 'or'):
        return (tag, tuple(_shift(p, offset) for p in formula[1]))
    return formula


def _colors_of(formula: tuple) -> Set[int]:
    tag = formula[0]
    if tag in ('Inf', 'Fin'):
        return {formula[1]}
    if tag in ('and', 'or'):
        out = set()
        for p in formula[1]:
            out |= _colors_of(p)
        return out
    return set()


def format_acceptance(formula: tuple) -> str:
    tag = formula[0]
    if tag in ('t', 'f'):
        return tag
    if tag in ('Inf', 'Fin'):
        return f"{tag}({formula[1]})"
    sep = ' & ' if tag == 'and' else ' | '
    parts = []
    for p in formula[1]:
        text = format_acceptance(p)
        parts.append(f"({text})" if p[0] in ('and', 'or') else text)
    return sep.join(parts)


class Acceptance:
    """Emerson-Lei acceptance: a positive formula over Inf/Fin atoms."""

    __slots__ = ('num_colors', 'formula', 'kind')

    def __init__(self, num_colors: int, formula: tuple):
        used = _colors_of(formula)
        if used and max(used) >= num_colors:
            raise PreconditionError(
                f"acceptance uses color {max(used)} but only {num_colors} declared")
        self.num_colors = num_colors
        self.formula = formula
        self.kind = self._classify()

    def _classify(self) -> str:
        if self.formula == parity_max_odd_formula(self.num_colors) and self.num_colors > 0:
            return PARITY
        if self.num_colors == 1 and self.formula == acc_inf(0):
            return BUCHI
        if self.formula == acc_and(*(acc_inf(c) for c in range(self.num_colors))) \
                and self.num_colors > 1:
            return GENERALIZED
        return ARBITRARY

    @classmethod
    def buchi(cls) -> 'Acceptance':
        return cls(1, acc_inf(0))

    @classmethod
    def parity_max_odd(cls, k: int) -> 'Acceptance':
        return cls(k, parity_max_odd_formula(k))

    @classmethod
    def generalized_buchi(cls, n: int) -> 'Acceptance':
        return cls(n, acc_and(*(acc_inf(c) for c in range(n))))

    @classmethod
    def true(cls) -> 'Acceptance':
        return cls(0, ACC_TRUE)

    def __eq__(self, other):
        return (isinstance(other, Acceptance) and self.num_colors == other.num_colors
                and self.formula == other.formula)

    def __hash__(self):
        return hash((self.num_colors, self.formula))

    def __repr__(self):
        return f"Acceptance({self.num_colors}, {self.to_text()!r})"

    @property
    def is_parity(self) -> bool:
        return self.kind == PARITY

    def to_text(self) -> str:
        return format_acceptance(self.formula)

    def acc_name(self) -> Optional[str]:
        if self.kind == BUCHI:
            return 'Buchi'
        if self.kind == PARITY:
            return f"parity max odd {self.num_colors}"
        if self.kind == GENERALIZED:
            return f"generalized-Buchi {self.num_colors}"
        if self.formula == ACC_TRUE and self.num_colors == 0:
            return 'all'
        return None

    def accepts(self, inf: Iterable[int]) -> bool:
        """Whether seeing exactly the colors `inf` infinitely often is accepting."""
        inf = frozenset(inf)

        def ev(f: tuple) -> bool:
            tag = f[0]
            if tag == 't':
                return True
            if tag == 'f':
                return False
            if tag == 'Inf':
                return f[1] in inf
            if tag == 'Fin':
                return f[1] not in inf
            if tag == 'and':
                return all(ev(p) for p in f[1])
            return any(ev(p) for p in f[1])

        return ev(self.formula)

    def dnf(self) -> List[Tuple[FrozenSet[int], FrozenSet[int]]]:
        """Disjunctive normal form as (fin colors, inf colors) terms."""
        def walk(f: tuple) -> List[Tuple[FrozenSet[int], FrozenSet[int]]]:
            tag = f[0]
            if tag == 't':
                return [(frozenset(), frozenset())]
            if tag == 'f':
                return []
            if tag == 'Inf':
                return [(frozenset(), frozenset({f[1]}))]
            if tag == 'Fin':
                return [(frozenset({f[1]}), frozenset())]
            if tag == 'or':
                out = []
                for p in f[1]:
                    out.extend(walk(p))
                return out
            terms = [(frozenset(), frozenset())]
            for p in f[1]:
                terms = [(a[0] | b[0], a[1] | b[1]) for a in terms for b in walk(p)]
            return terms

        seen = []
        for fin, inf in walk(self.formula):
            if fin & inf:
                continue
            if (fin, inf) not in seen:
                seen.append((fin, inf))
        return seen

    def shifted(self, offset: int) -> 'Acceptance':
        return Acceptance(self.num_colors + offset, _shift(self.formula, offset))

    def conjoin(self, other: 'Acceptance') -> 'Acceptance':
        """self & other with other's colors moved above self's."""
        return Acceptance(self.num_colors + other.num_colors,
                          acc_and(self.formula, _shift(other.formula, self.num_colors)))


# ── Automata ─────────────────────────────────────────────────────────────────

class Edge(NamedTuple):
    label: Label
    colors: FrozenSet[int]
    dst: int


class Automaton:
    """Edge-labeled omega-automaton with transition-based Emerson-Lei acceptance.

    state_player, when present, tags each state with its owner in a game
    (True = controller), the way HOA's spot-state-player header does.
    """

    def __init__(self, ap: Sequence[str], edges: Sequence[Sequence[Edge]], initial: int,
                 acceptance: Acceptance, state_player: Optional[Sequence[bool]] = None,
                 name: str = ''):
        self.ap = tuple(ap)
        self.edges = tuple(tuple(es) for es in edges)
        self.initial = initial
        self.acceptance = acceptance
        self.state_player = tuple(state_player) if state_player is not None else None
        self.name = name
        n = len(self.edges)
        if not 0 <= initial < max(n, 1) or n == 0:
            raise PreconditionError(f"initial state {initial} out of range ({n} states)")
        if self.state_player is not None and len(self.state_player) != n:
            raise PreconditionError('state_player length differs from state count')
        for s, es in enumerate(self.edges):
            for e in es:
                if e.label.ap != self.ap:
                    raise PreconditionError(f"state {s}: edge label over a different alphabet")
                if not 0 <= e.dst < n:
                    raise PreconditionError(f"state {s}: destination {e.dst} out of range")
                if e.colors and max(e.colors) >= acceptance.num_colors:
                    raise PreconditionError(
                        f"state {s}: color {max(e.colors)} >= {acceptance.num_colors} declared")
        self.deterministic = self._compute_deterministic()
        self.complete = self._compute_complete()

    def _compute_deterministic(self) -> bool:
        for es in self.edges:
            for i in range(len(es)):
                for j in range(i + 1, len(es)):
                    if es[i].label.intersects(es[j].label):
                        return False
        return True

    def _compute_complete(self) -> bool:
        for es in self.edges:
            cover = Label.false(self.ap)
            for e in es:
                cover = cover | e.label
            if not cover.is_true():
                return False
        return True

    def __repr__(self):
        return (f"Automaton({self.num_states} states, {self.num_edges} edges, "
                f"acc={self.acceptance.to_text()!r})")

    @property
    def num_states(self) -> int:
        return len(self.edges)

    @property
    def num_edges(self) -> int:
        return sum(len(es) for es in self.edges)

    def iter_edges(self) -> Iterable[Tuple[int, Edge]]:
        for s, es in enumerate(self.edges):
            for e in es:
                yield s, e

    def colors_used(self) -> Set[int]:
        out = set()
        for _, e in self.iter_edges():
            out |= e.colors
        return out

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.num_states))
        for s, e in self.iter_edges():
            g.add_edge(s, e.dst)
        return g

    def reachable(self) -> List[int]:
        seen = {self.initial}
        order = [self.initial]
        queue = deque(order)
        while queue:
            s = queue.popleft()
            for e in self.edges[s]:
                if e.dst not in seen:
                    seen.add(e.dst)
                    order.append(e.dst)
                    queue.append(e.dst)
        return order

    def restrict(self, keep: Sequence[int]) -> 'Automaton':
        """Sub-automaton on the given states (initial first), renumbered in that order."""
        index = {s: i for i, s in enumerate(keep)}
        edges = [[Edge(e.label, e.colors, index[e.dst]) for e in self.edges[s] if e.dst in index]
                 for s in keep]
        player = None
        if self.state_player is not None:
            player = [self.state_player[s] for s in keep]
        return Automaton(self.ap, edges, index[self.initial], self.acceptance, player, self.name)

    def with_ap(self, ap: Sequence[str]) -> 'Automaton':
        """Same automaton over a larger (or reordered) alphabet."""
        ap = tuple(ap)
        if ap == self.ap:
            return self
        edges = [[Edge(e.label.retarget(ap), e.colors, e.dst) for e in es] for es in self.edges]
        return Automaton(ap, edges, self.initial, self.acceptance, self.state_player, self.name)

    def with_edges(self, edges: Sequence[Sequence[Edge]], acceptance: Acceptance = None) -> 'Automaton':
        return Automaton(self.ap, edges, self.initial, acceptance or self.acceptance,
                         self.state_player, self.name)

    def trim(self) -> 'Automaton':
        """Keep states that are reachable and can reach an accepting cycle."""
        reach = self.restrict(self.reachable())
        good = accepting_scc_states(reach)
        if not good:
            return Automaton(self.ap, [[]], 0, self.acceptance,
                             None if self.state_player is None else [reach.state_player[0]],
                             self.name)
        g = reach.graph()
        productive = set(good)
        for s in good:
            productive |= nx.ancestors(g, s)
        if reach.initial not in productive:
            return Automaton(self.ap, [[]], 0, self.acceptance,
                             None if self.state_player is None else [reach.state_player[0]],
                             self.name)
        keep = [s for s in range(reach.num_states) if s in productive]
        keep.remove(reach.initial)
        return reach.restrict([reach.initial] + keep)

    def rejecting_colors(self) -> FrozenSet[int]:
        """A color set whose infinite repetition alone is rejecting."""
        candidates = [frozenset()] + [frozenset({c}) for c in range(self.acceptance.num_colors)]
        for colors in candidates:
            if not self.acceptance.accepts(colors):
                return colors
        raise PreconditionError(f"acceptance {self.acceptance.to_text()} rejects nothing")

    def complete_with_sink(self) -> 'Automaton':
        """Send missing letters to a rejecting sink."""
        if self.complete:
            return self
        if self.state_player is not None:
            raise PreconditionError('cannot complete a game automaton')
        sink_colors = self.rejecting_colors()
        sink = self.num_states
        edges = [list(es) for es in self.edges]
        needed = False
        for s, es in enumerate(self.edges):
            cover = Label.false(self.ap)
            for e in es:
                cover = cover | e.label
            missing = ~cover
            if missing.is_satisfiable():
                edges[s].append(Edge(missing, sink_colors, sink))
                needed = True
        if not needed:
            return self
        edges.append([Edge(Label.true(self.ap), sink_colors, sink)])
        return Automaton(self.ap, edges, self.initial, self.acceptance, None, self.name)


class AutomatonBuilder:
    """Incremental construction; parallel edges with equal colors are merged."""

    def __init__(self, ap: Sequence[str]):
        self.ap = tuple(ap)
        self._edges = []  # type: List[Dict[Tuple[int, FrozenSet[int]], Label]]
        self._player = []  # type: List[Optional[bool]]

    @property
    def num_states(self) -> int:
        return len(self._edges)

    def new_state(self, player: Optional[bool] = None) -> int:
        self._edges.append({})
        self._player.append(player)
        return len(self._edges) - 1

    def add_edge(self, src: int, label: Label, colors: Iterable[int], dst: int):
        if label.is_false():
            return
        key = (dst, frozenset(colors))
        slot = self._edges[src]
        slot[key] = slot[key] | label if key in slot else label

    def build(self, initial: int, acceptance: Acceptance, name: str = '') -> Automaton:
        edges = []
        for slot in self._edges:
            edges.append([Edge(lab, colors, dst) for (dst, colors), lab in slot.items()])
        player = None
        if any(p is not None for p in self._player):
            player = [bool(p) for p in self._player]
        return Automaton(self.ap, edges, initial, acceptance, player, name)


# ── Emptiness ────────────────────────────────────────────────────────────────

Succ = Callable[[Hashable], Iterable[Tuple[FrozenSet[int], Hashable]]]


def _explore(start: Hashable, succ: Succ, budget: Optional[int] = None, what: str = 'product'):
    nodes = {start: 0}
    order = [start]
    out = []  # type: List[List[Tuple[FrozenSet[int], int]]]
    i = 0
    while i < len(order):
        node = order[i]
        row = []
        for colors, dst in succ(node):
            if dst not in nodes:
                nodes[dst] = len(order)
                order.append(dst)
                if budget is not None and len(order) > budget:
                    raise BudgetExceeded(f"{what} state count", budget)
            row.append((frozenset(colors), nodes[dst]))
        out.append(row)
        i += 1
    return order, out


def _accepting_components(succ: List[List[Tuple[FrozenSet[int], int]]],
                          acceptance: Acceptance) -> List[Set[int]]:
    """SCCs of an explicit graph that contain an accepting cycle."""
    terms = acceptance.dnf()
    if not terms:
        return []
    g = nx.DiGraph()
    g.add_nodes_from(range(len(succ)))
    for s, row in enumerate(succ):
        for _, d in row:
            g.add_edge(s, d)
    found = []
    for scc in nx.strongly_connected_components(g):
        internal = [(s, colors, d) for s in scc for colors, d in succ[s] if d in scc]
        if internal and _scc_accepts(internal, terms):
            found.append(set(scc))
    return found


def _scc_accepts(internal: List[Tuple[int, FrozenSet[int], int]],
                 terms: List[Tuple[FrozenSet[int], FrozenSet[int]]]) -> bool:
    for fin, inf in terms:
        kept = [(s, c, d) for s, c, d in internal if not c & fin]
        if not kept:
            continue
        h = nx.DiGraph()
        for s, _, d in kept:
            h.add_edge(s, d)
        for comp in nx.strongly_connected_components(h):
            seen = set()
            cyclic = False
            for s, c, d in kept:
                if s in comp and d in comp:
                    cyclic = True
                    seen |= c
            if cyclic and inf <= seen:
                return True
    return False


def _check_color_budget(acceptance: Acceptance):
    if acceptance.kind in (BUCHI, PARITY):
        return
    if acceptance.num_colors > cfg.COLOR_BUDGET:
        raise BudgetExceeded(f"{acceptance.num_colors} colors", cfg.COLOR_BUDGET)


def accepting_scc_states(a: Automaton) -> Set[int]:
    """States of a that lie in an SCC containing an accepting cycle."""
    _check_color_budget(a.acceptance)
    succ = [[(e.colors, e.dst) for e in es] for es in a.edges]
    out = set()
    for comp in _accepting_components(succ, a.acceptance):
        out |= comp
    return out


def is_empty(a: Automaton) -> bool:
    """True iff a accepts no word."""
    _check_color_budget(a.acceptance)
    order, succ = _explore(a.initial, lambda s: ((e.colors, e.dst) for e in a.edges[s]))
    empty = not _accepting_components(succ, a.acceptance)
    log.debug(f"[EMPTY] {len(order)} reachable states, empty={empty}")
    return empty


def accepts_lasso(a: Automaton, prefix: Sequence[Mapping[str, bool]],
                  period: Sequence[Mapping[str, bool]]) -> bool:
    """Membership of the word prefix . period^omega."""
    if not period:
        raise PreconditionError('lasso period must be nonempty')
    letters = list(prefix) + list(period)
    loop = len(prefix)
    bits = []
    for letter in letters:
        value = 0
        for i, name in enumerate(a.ap):
            if letter.get(name, False):
                value |= 1 << i
        bits.append(value)
    n = len(letters)

    def succ(node):
        q, pos = node
        nxt = pos + 1 if pos + 1 < n else loop
        for e in a.edges[q]:
            if e.label.evaluate_bits(bits[pos]):
                yield e.colors, (e.dst, nxt)

    _check_color_budget(a.acceptance)
    _, graph = _explore((a.initial, 0), succ, cfg.LASSO_PRODUCT_BUDGET, 'lasso product')
    return bool(_accepting_components(graph, a.acceptance))


# ── Products and conversions ─────────────────────────────────────────────────

def product(a: Automaton, b: Automaton) -> Automaton:
    """Synchronized product; b's colors are shifted above a's."""
    if a.ap != b.ap:
        raise PreconditionError(
            f"alphabet mismatch: ({', '.join(a.ap)}) vs ({', '.join(b.ap)})")
    shift = a.acceptance.num_colors
    builder = AutomatonBuilder(a.ap)
    index = {}  # type: Dict[Tuple[int, int], int]
    start = (a.initial, b.initial)
    index[start] = builder.new_state()
    queue = deque([start])
    while queue:
        p, q = queue.popleft()
        src = index[(p, q)]
        for ea in a.edges[p]:
            for eb in b.edges[q]:
                lab = ea.label & eb.label
                if lab.is_false():
                    continue
                key = (ea.dst, eb.dst)
                if key not in index:
                    index[key] = builder.new_state()
                    queue.append(key)
                colors = set(ea.colors) | {c + shift for c in eb.colors}
                builder.add_edge(src, lab, colors, index[key])
    result = builder.build(0, a.acceptance.conjoin(b.acceptance))
    log.debug(f"[PRODUCT] {a.num_states} x {b.num_states} -> {result.num_states} states")
    return result


def complement_parity(a: Automaton) -> Automaton:
    """Complement of a deterministic complete max-odd parity automaton."""
    if not a.deterministic or not a.complete or not a.acceptance.is_parity:
        raise PreconditionError('complement_parity needs a deterministic complete parity automaton')
    edges = [[Edge(e.label, frozenset({max(e.colors, default=-1) + 1}), e.dst) for e in es]
             for es in a.edges]
    return Automaton(a.ap, edges, a.initial,
                     Acceptance.parity_max_odd(a.acceptance.num_colors + 1),
                     a.state_player, a.name)


def degeneralize(a: Automaton) -> Automaton:
    """Generalized Buchi (conjunction of Inf) to Buchi with a level counter."""
    acc = a.acceptance
    if acc.kind == BUCHI:
        return a
    terms = acc.dnf()
    if len(terms) != 1 or terms[0][0]:
        raise PreconditionError(f"cannot degeneralize {acc.to_text()}")
    sets = sorted(terms[0][1])
    levels = len(sets)
    builder = AutomatonBuilder(a.ap)
    index = {}  # type: Dict[Tuple[int, int], int]
    start = (a.initial, 0)
    index[start] = builder.new_state()
    queue = deque([start])
    while queue:
        q, level = queue.popleft()
        src = index[(q, level)]
        for e in a.edges[q]:
            nxt = level
            while nxt < levels and sets[nxt] in e.colors:
                nxt += 1
            colors = ()
            if nxt == levels:
                colors, nxt = (0,), 0
            key = (e.dst, nxt)
            if key not in index:
                index[key] = builder.new_state()
                queue.append(key)
            builder.add_edge(src, e.label, colors, index[key])
    return builder.build(0, Acceptance.buchi(), a.name)
