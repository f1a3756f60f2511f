"""
LTL to Buchi automata for LTL Synth.

A tableau construction in the style of Gerth, Peled, Vardi and Wolper,
adapted to transition-based acceptance: a state is the set of obligations
that must hold from now on, each edge is one way of discharging them for the
current letter, and an edge is accepting for an Until when it does not defer
that Until. With several Untils a level counter (in discovery order) turns the
generalized condition into a single color.

Top-level conjuncts are translated one by one and combined with product.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from . import ltl
from .automaton import Acceptance, Automaton, AutomatonBuilder, Edge, degeneralize, product
from .label import Label
from .ltl import Formula

log = logging.getLogger('ltl-synth')


@dataclass(frozen=True)
class TableauState:
    """Set of obligations (NNF formulas) a suffix of the word must satisfy."""
    obligations: FrozenSet[Formula]

    @classmethod
    def of(cls, formulas) -> 'TableauState':
        items = set(f for f in formulas if f is not ltl.TRUE)
        # G x already forces x
        for f in list(items):
            if f.kind == ltl.GLOBALLY:
                items.discard(f.child)
        return cls(frozenset(items))

    def ordered(self) -> List[Formula]:
        return sorted(self.obligations)

    def __str__(self):
        if not self.obligations:
            return 'true'
        return ' & '.join(ltl.print_ltl(f) for f in self.ordered())


class _Term:
    __slots__ = ('label', 'nxt', 'deferred')

    def __init__(self, label: Label, nxt: FrozenSet[Formula], deferred: FrozenSet[Formula]):
        self.label = label
        self.nxt = nxt
        self.deferred = deferred


def _expand(state: TableauState, ap: Tuple[str, ...]) -> List[_Term]:
    """All ways of meeting the state's obligations on one letter."""
    terms = []  # type: List[_Term]
    stack = [(state.ordered(), Label.true(ap), frozenset(), frozenset(), frozenset())]
    while stack:
        todo, label, nxt, deferred, seen = stack.pop()
        todo = list(todo)
        alive = True
        while todo and alive:
            g = todo.pop()
            if g in seen:
                continue
            seen = seen | {g}
            if g.is_boolean():
                label = label & Label.from_formula(g, ap)
                alive = label.is_satisfiable()
                continue
            k = g.kind
            if k == ltl.AND:
                todo.extend((g.right, g.left))
            elif k == ltl.OR:
                stack.append((todo + [g.right], label, nxt, deferred, seen))
                todo.append(g.left)
            elif k == ltl.NEXT:
                nxt = nxt | {g.child}
            elif k == ltl.UNTIL:
                stack.append((todo + [g.left], label, nxt | {g}, deferred | {g}, seen))
                todo.append(g.right)
            elif k == ltl.EVENTUALLY:
                stack.append((list(todo), label, nxt | {g}, deferred | {g}, seen))
                todo.append(g.child)
            elif k == ltl.RELEASE:
                stack.append((todo + [g.right], label, nxt | {g}, deferred, seen))
                todo.extend((g.right, g.left))
            elif k == ltl.GLOBALLY:
                nxt = nxt | {g}
                todo.append(g.child)
            else:  # pragma: no cover
                raise ValueError(f"formula not in NNF: {ltl.print_ltl(g)}")
        if alive:
            terms.append(_Term(label, nxt, deferred))
    return _prune_dominated(terms)


def _prune_dominated(terms: List[_Term]) -> List[_Term]:
    """Drop letters from a term that a term with fewer deferrals already covers."""
    by_next = {}  # type: Dict[TableauState, List[_Term]]
    for t in terms:
        by_next.setdefault(TableauState.of(t.nxt), []).append(t)
    out = []
    for group in by_next.values():
        for t in group:
            better = Label.false(t.label.ap)
            for u in group:
                if u.deferred < t.deferred:
                    better = better | u.label
            label = t.label & ~better
            if label.is_satisfiable():
                out.append(_Term(label, t.nxt, t.deferred))
    return out


def _translate_conjunct(f: Formula, ap: Tuple[str, ...]) -> Automaton:
    init = TableauState.of([f])
    index = {init: 0}  # type: Dict[TableauState, int]
    order = [init]
    rows = []  # type: List[List[Tuple[Label, FrozenSet[Formula], int]]]
    untils = []  # type: List[Formula]
    known = set()
    queue = deque([init])
    while queue:
        state = queue.popleft()
        row = []
        for term in _expand(state, ap):
            dst = TableauState.of(term.nxt)
            if dst not in index:
                index[dst] = len(order)
                order.append(dst)
                queue.append(dst)
            for u in sorted(term.deferred):
                if u not in known:
                    known.add(u)
                    untils.append(u)
            row.append((term.label, term.deferred, index[dst]))
        rows.append(row)
        for g in state.ordered():
            _collect_untils(g, untils, known)

    k = len(untils)
    builder = AutomatonBuilder(ap)
    for _ in order:
        builder.new_state()
    for src, row in enumerate(rows):
        for label, deferred, dst in row:
            if k == 0:
                colors = (0,)
            else:
                colors = tuple(i for i, u in enumerate(untils) if u not in deferred)
            builder.add_edge(src, label, colors, dst)
    if k <= 1:
        aut = builder.build(0, Acceptance.buchi())
    else:
        aut = degeneralize(builder.build(0, Acceptance.generalized_buchi(k)))
    log.debug(f"[TRANSLATE] {ltl.print_ltl(f)}: {len(order)} tableau states, {k} until(s)")
    return aut


def _collect_untils(g: Formula, untils: List[Formula], known: set):
    stack = [g]
    while stack:
        h = stack.pop()
        if h.kind in (ltl.UNTIL, ltl.EVENTUALLY) and h not in known:
            known.add(h)
            untils.append(h)
        stack.extend(reversed(h.children))


def ltl_to_nba(f: Formula, ap: Optional[Sequence[str]] = None) -> Automaton:
    """Transition-based Buchi automaton (acceptance Inf(0)) for f.

    f is put in negation normal form first. The alphabet defaults to the
    atoms of f in first-occurrence order.
    """
    ap = tuple(ap) if ap is not None else f.atoms()
    g = ltl.to_nnf(f)
    parts = ltl.flatten_and(g)
    result = None
    for part in parts:
        aut = _translate_conjunct(part, ap)
        result = aut if result is None else degeneralize(product(result, aut))
    result = result.trim()
    log.debug(f"[TRANSLATE] {ltl.print_ltl(f)} -> {result.num_states} states, "
              f"{result.num_edges} edges ({len(parts)} conjunct(s))")
    return result


def ltl_to_dba_if_recurrence(f: Formula, ap: Optional[Sequence[str]] = None) -> Optional[Automaton]:
    """Deterministic Buchi automaton for f, or None when f needs more than Buchi."""
    from .parity import determinize_nba, merge_identical_successors, minimize_colors

    dpa = merge_identical_successors(minimize_colors(determinize_nba(ltl_to_nba(f, ap))))
    used = dpa.colors_used()
    if not used <= {0, 1}:
        log.debug(f"[TRANSLATE] {ltl.print_ltl(f)} is not a recurrence (colors {sorted(used)})")
        return None
    edges = [[Edge(e.label, frozenset({0}) if 1 in e.colors else frozenset(), e.dst) for e in es]
             for es in dpa.edges]
    return Automaton(dpa.ap, edges, dpa.initial, Acceptance.buchi(), None, dpa.name)
