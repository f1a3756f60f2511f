"""
Independent reference checks shared by the LTL Synth tests.

Everything here is deliberately naive: enumerate lassos, negate acceptance
formulas, walk games edge by edge. None of it is used by the library.
"""

import itertools
import random
import sys
from collections import deque
from pathlib import Path
from typing import Dict, Iterator, List, Sequence, Tuple

# Add project root to path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import networkx as nx

from synth import config as cfg
from synth import ltl
from synth.arena import Arena, ArenaEdge, Player
from synth.automaton import Acceptance, Automaton, Edge, complement_parity, is_empty, product
from synth.label import Label, minterms
from synth.ltl import SignalPartition
from synth.parity import edge_priority

Letter = Dict[str, bool]
Lasso = Tuple[List[Letter], List[Letter]]


# ── Words ────────────────────────────────────────────────────────────────────

def letters(ap: Sequence[str]) -> List[Letter]:
    """Every assignment of the propositions in ap."""
    return [dict(zip(ap, values)) for values in itertools.product((False, True), repeat=len(ap))]


def all_lassos(ap: Sequence[str], max_len: int) -> Iterator[Lasso]:
    """Every lasso prefix.period^omega with len(prefix) + len(period) <= max_len."""
    alphabet = letters(ap)
    for total in range(1, max_len + 1):
        for cut in range(total):
            for word in itertools.product(alphabet, repeat=total):
                yield list(word[:cut]), list(word[cut:])


def random_lassos(ap: Sequence[str], rng: random.Random, count: int,
                  max_prefix: int = 4, max_period: int = 5) -> List[Lasso]:
    alphabet = letters(ap)
    out = []
    for _ in range(count):
        prefix = [rng.choice(alphabet) for _ in range(rng.randint(0, max_prefix))]
        period = [rng.choice(alphabet) for _ in range(rng.randint(1, max_period))]
        out.append((prefix, period))
    return out


def lasso_sample(ap: Sequence[str], seed: int = 7) -> List[Lasso]:
    """Exhaustive short lassos plus a seeded batch of longer ones."""
    exhaustive = 6 if len(ap) <= 1 else 3
    words = list(all_lassos(ap, exhaustive))
    words.extend(random_lassos(ap, random.Random(seed), 120))
    return words


# ── Formulas ─────────────────────────────────────────────────────────────────

_UNARY = (ltl.neg, ltl.next_, ltl.eventually, ltl.globally)
_BINARY = (ltl.conj, ltl.disj, ltl.implies, ltl.iff, ltl.until, ltl.release, ltl.weak_until)


def random_formula(rng: random.Random, atoms: Sequence[str], depth: int) -> ltl.Formula:
    if depth == 0 or rng.random() < 0.25:
        return ltl.ap(rng.choice(list(atoms)))
    if rng.random() < 0.4:
        return rng.choice(_UNARY)(random_formula(rng, atoms, depth - 1))
    return rng.choice(_BINARY)(random_formula(rng, atoms, depth - 1),
                               random_formula(rng, atoms, depth - 1))


# ── Automata ─────────────────────────────────────────────────────────────────

def negate_formula(formula: tuple) -> tuple:
    tag = formula[0]
    if tag == 't':
        return ('f',)
    if tag == 'f':
        return ('t',)
    if tag == 'Inf':
        return ('Fin', formula[1])
    if tag == 'Fin':
        return ('Inf', formula[1])
    flipped = 'or' if tag == 'and' else 'and'
    return (flipped, tuple(negate_formula(p) for p in formula[1]))


def complement_deterministic(a: Automaton) -> Automaton:
    """Same edges, negated acceptance; exact for deterministic complete automata."""
    assert a.deterministic and a.complete
    acc = Acceptance(a.acceptance.num_colors, negate_formula(a.acceptance.formula))
    return Automaton(a.ap, a.edges, a.initial, acc)


def same_language_deterministic(a: Automaton, b: Automaton) -> bool:
    """Language equality of two deterministic complete automata via emptiness."""
    saved = cfg.COLOR_BUDGET
    cfg.COLOR_BUDGET = 64
    try:
        return (is_empty(product(a, complement_deterministic(b)))
                and is_empty(product(b, complement_deterministic(a))))
    finally:
        cfg.COLOR_BUDGET = saved


def random_deterministic(rng: random.Random, ap: Sequence[str], n: int,
                         acceptance: Acceptance) -> Automaton:
    """Deterministic complete automaton with one edge per letter."""
    edges = []
    k = acceptance.num_colors
    for _ in range(n):
        row = []
        for bits in minterms((1 << len(ap)) - 1):
            colors = frozenset(c for c in range(k) if rng.random() < 0.3)
            row.append(Edge(Label.from_bits(ap, (1 << len(ap)) - 1, bits), colors, rng.randrange(n)))
        edges.append(row)
    return Automaton(ap, edges, 0, acceptance)


def random_nba(rng: random.Random, ap: Sequence[str], n: int) -> Automaton:
    """Nondeterministic Buchi automaton with 1-3 cube-labeled edges per state."""
    edges = []
    for _ in range(n):
        row = []
        for _ in range(rng.randint(1, 3)):
            label = Label.true(ap)
            for name in ap:
                pick = rng.randrange(3)
                if pick < 2:
                    label = label & Label.var(ap, name, bool(pick))
            colors = frozenset({0}) if rng.random() < 0.4 else frozenset()
            row.append(Edge(label, colors, rng.randrange(n)))
        edges.append(row)
    return Automaton(ap, edges, 0, Acceptance.buchi())


def included_in_deterministic(a: Automaton, dpa: Automaton) -> bool:
    """L(a) is inside L(dpa): a times the complement of dpa is empty."""
    saved = cfg.COLOR_BUDGET
    cfg.COLOR_BUDGET = 64
    try:
        return is_empty(product(a, complement_parity(dpa)))
    finally:
        cfg.COLOR_BUDGET = saved


def _lasso_bits(ap: Sequence[str], word: Sequence[Letter]) -> List[int]:
    return [sum(1 << k for k, name in enumerate(ap) if letter.get(name, False)) for letter in word]


class BuchiRunner:
    """Buchi lasso membership by explicit search, one move table per letter."""

    def __init__(self, a: Automaton):
        assert a.acceptance == Acceptance.buchi()
        self.a = a
        self.moves = [[[(e.dst, bool(e.colors)) for e in es if e.label.evaluate_bits(bits)]
                       for bits in range(1 << len(a.ap))]
                      for es in a.edges]

    def accepts(self, prefix: Sequence[Letter], period: Sequence[Letter]) -> bool:
        bits = _lasso_bits(self.a.ap, list(prefix) + list(period))
        n, loop = len(bits), len(prefix)
        succ = {}  # type: Dict[Tuple[int, int], List[Tuple[Tuple[int, int], bool]]]
        todo = [(self.a.initial, 0)]
        succ[todo[0]] = []
        while todo:
            q, pos = todo.pop()
            nxt = pos + 1 if pos + 1 < n else loop
            row = []
            for d, good in self.moves[q][bits[pos]]:
                node = (d, nxt)
                row.append((node, good))
                if node not in succ:
                    succ[node] = []
                    todo.append(node)
            succ[(q, pos)] = row
        for u, row in succ.items():
            for v, good in row:
                if good and _reaches(succ, v, u):
                    return True
        return False


def _reaches(succ, start, goal) -> bool:
    seen = {start}
    todo = [start]
    while todo:
        node = todo.pop()
        if node == goal:
            return True
        for nxt, _ in succ[node]:
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return False


def parity_accepts_lasso(a: Automaton, prefix: Sequence[Letter], period: Sequence[Letter]) -> bool:
    """Run a deterministic max-odd parity automaton until the lasso position repeats."""
    bits = _lasso_bits(a.ap, list(prefix) + list(period))
    n, loop = len(bits), len(prefix)
    q, pos = a.initial, 0
    seen = {}  # type: Dict[Tuple[int, int], int]
    trace = []
    while (q, pos) not in seen:
        seen[(q, pos)] = len(trace)
        (edge,) = [e for e in a.edges[q] if e.label.evaluate_bits(bits[pos])]
        trace.append(edge_priority(edge.colors))
        q, pos = edge.dst, (pos + 1 if pos + 1 < n else loop)
    return max(trace[seen[(q, pos)]:]) % 2 == 1


def min_parity_colors(a: Automaton) -> int:
    """Fewest max-odd colors any recoloring of a's edges needs, by subset enumeration.

    Every edge set that is strongly connected on its own is a possible
    infinity set. A set needs a top color of its own parity, no smaller
    than what any of its proper subsets need.
    """
    edges = [(s, e.dst, edge_priority(e.colors)) for s, e in a.iter_edges()]
    full = 1 << len(edges)
    best = [-1] * full  # highest need of any cycle set inside the mask
    for mask in range(1, full):
        members = [i for i in range(len(edges)) if mask >> i & 1]
        below = max(best[mask & ~(1 << i)] for i in members)
        if _strongly_connected([edges[i] for i in members]):
            parity = max(edges[i][2] for i in members) % 2
            if below < 0:
                best[mask] = parity
            else:
                best[mask] = below if below % 2 == parity else below + 1
        else:
            best[mask] = below
    return best[full - 1] + 1 if best[full - 1] >= 0 else 1


def _strongly_connected(edges: Sequence[Tuple[int, int, int]]) -> bool:
    nodes = {s for s, _, _ in edges} | {d for _, d, _ in edges}
    fwd, bwd = {}, {}
    for s, d, _ in edges:
        fwd.setdefault(s, []).append(d)
        bwd.setdefault(d, []).append(s)
    start = next(iter(nodes))
    for adj in (fwd, bwd):
        seen = {start}
        todo = [start]
        while todo:
            for nxt in adj.get(todo.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        if seen != nodes:
            return False
    return True



# ── Games ────────────────────────────────────────────────────────────────────

GAME_PARTITION = SignalPartition(('i',), ('o',))


def random_arena(rng: random.Random, n_env: int, n_ctrl: int, colors: int = 6) -> Arena:
    """Bipartite arena with true labels, out-degree 1-3 and at most one color per edge."""
    ap = GAME_PARTITION.ap
    owner = [Player.ENV] * n_env + [Player.CTRL] * n_ctrl
    env_states = list(range(n_env))
    ctrl_states = list(range(n_env, n_env + n_ctrl))
    edges = []
    for s, who in enumerate(owner):
        targets = ctrl_states if who == Player.ENV else env_states
        row = []
        for d in rng.sample(targets, min(len(targets), rng.randint(1, 3))):
            color = rng.randrange(-1, colors)
            row.append(ArenaEdge(Label.true(ap), frozenset() if color < 0 else frozenset({color}), d))
        edges.append(row)
    return Arena(GAME_PARTITION, ap, owner, edges, 0, Acceptance.parity_max_odd(colors))


def strategy_is_winning(ar: Arena, region: set, player: Player, strategy: Dict[int, int]) -> bool:
    """Fixing player's strategy on region, the opponent can only close winning cycles."""
    g = nx.MultiDiGraph()
    g.add_nodes_from(region)
    for s in region:
        if ar.owner[s] == player:
            if s not in strategy:
                return False
            moves = [ar.edges[s][strategy[s]]]
        else:
            moves = ar.edges[s]
        for e in moves:
            if e.dst not in region:
                return False
            g.add_edge(s, e.dst, prio=edge_priority(e.colors))
    bad_parity = 0 if player == Player.CTRL else 1
    prios = {d['prio'] for _, _, d in g.edges(data=True)}
    for top in prios:
        if top % 2 != bad_parity:
            continue
        h = nx.MultiDiGraph()
        h.add_edges_from((u, v, d) for u, v, d in g.edges(data=True) if d['prio'] <= top)
        for comp in nx.strongly_connected_components(h):
            for u, v, d in h.edges(data=True):
                if u in comp and v in comp and d['prio'] == top:
                    return False
    return True


# ── Mealy machines ───────────────────────────────────────────────────────────

def refines(small, big) -> bool:
    """Every behavior of small is allowed by big (both share one alphabet)."""
    in_mask = Label.true(big.ap).mask_of(big.inputs)
    inputs = []
    for bits in minterms(in_mask):
        inputs.append({x: bool(bits >> k & 1) for k, x in enumerate(big.ap) if in_mask >> k & 1})
    seen = {(small.initial, big.initial)}
    queue = deque(seen)
    while queue:
        j, s = queue.popleft()
        for letter in inputs:
            theirs = big.step(s, letter)
            if theirs is None:
                continue
            mine = small.step(j, letter)
            if mine is None or not mine[0].implies(theirs[0]):
                return False
            pair = (mine[1], theirs[1])
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    return True
