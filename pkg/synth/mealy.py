"""
Strategies as incompletely specified Mealy machines.

A transition reads an input label (over the inputs) and emits an output
label (over the outputs): the set of output assignments the controller may
pick. A tautological output label means the outputs are unspecified.

    simplify_signatures   merge states that another state can stand in for
    minimize_sat          exact minimum number of states, via SAT
    bypass_strategy       strategy straight from a DBA, without a game
"""

import logging
from collections import deque
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple

import networkx as nx

from .automaton import BUCHI, Automaton
from .errors import BypassNotApplicable, PreconditionError
from .label import Label, minterms, refine
from .ltl import BypassPattern, SignalPartition, print_ltl

log = logging.getLogger('ltl-synth')


class MealyTransition(NamedTuple):
    inp: Label
    out: Label
    dst: int


class MealyMachine:
    """Mealy machine over a signal partition; state 0 is initial unless given."""

    def __init__(self, ap: Sequence[str], partition: SignalPartition,
                 transitions: Sequence[Sequence[MealyTransition]], initial: int = 0):
        self.ap = tuple(ap)
        self.partition = partition
        self.transitions = tuple(tuple(ts) for ts in transitions)
        self.initial = initial
        n = len(self.transitions)
        if not 0 <= initial < n:
            raise PreconditionError(f"initial state {initial} out of range ({n} states)")
        in_mask = Label.true(self.ap).mask_of(partition.inputs)
        out_mask = Label.true(self.ap).mask_of(partition.outputs)
        for s, ts in enumerate(self.transitions):
            for t in ts:
                if not t.out.is_satisfiable():
                    raise PreconditionError(f"state {s}: unsatisfiable output label")
                if t.inp.support_mask() & ~in_mask or t.out.support_mask() & ~out_mask:
                    raise PreconditionError(f"state {s}: label mixes inputs and outputs")
                if not 0 <= t.dst < n:
                    raise PreconditionError(f"state {s}: destination {t.dst} out of range")
        self.input_deterministic = all(
            not ts[i].inp.intersects(ts[j].inp)
            for ts in self.transitions for i in range(len(ts)) for j in range(i + 1, len(ts)))
        self.input_complete = True
        for ts in self.transitions:
            cover = Label.false(self.ap)
            for t in ts:
                cover = cover | t.inp
            if not cover.is_true():
                self.input_complete = False
                break

    def __repr__(self):
        return f"MealyMachine({self.num_states} states)"

    @property
    def num_states(self) -> int:
        return len(self.transitions)

    @property
    def inputs(self) -> Tuple[str, ...]:
        return self.partition.inputs

    @property
    def outputs(self) -> Tuple[str, ...]:
        return tuple(o for o in self.partition.outputs if o in self.ap)

    def step(self, state: int, assignment: Mapping[str, bool]) -> Optional[Tuple[Label, int]]:
        """Permitted outputs and next state for one input assignment."""
        for t in self.transitions[state]:
            if t.inp.evaluate(assignment):
                return t.out, t.dst
        return None

    def reachable(self) -> 'MealyMachine':
        index = {self.initial: 0}
        order = [self.initial]
        queue = deque(order)
        while queue:
            s = queue.popleft()
            for t in self.transitions[s]:
                if t.dst not in index:
                    index[t.dst] = len(order)
                    order.append(t.dst)
                    queue.append(t.dst)
        rows = [[MealyTransition(t.inp, t.out, index[t.dst]) for t in self.transitions[s]]
                for s in order]
        return MealyMachine(self.ap, self.partition, rows)


def _merge_rows(rows: List[Dict[Tuple[Label, int], Label]]) -> List[List[MealyTransition]]:
    return [[MealyTransition(inp, out, dst) for (out, dst), inp in row.items()] for row in rows]


def _add(row: Dict[Tuple[Label, int], Label], inp: Label, out: Label, dst: int):
    key = (out, dst)
    row[key] = row[key] | inp if key in row else inp


# ── Signature-based simplification ───────────────────────────────────────────

def simplify_signatures(m: MealyMachine) -> MealyMachine:
    """Quotient by the largest "may stand in for" relation.

    b may stand in for a when, wherever a reads an input, b reads it too,
    b's permitted outputs lie inside a's, and the successors are again in
    the relation. Each state is replaced by a representative that may stand
    in for it, so every behavior of the result is allowed by m.
    """
    if not m.input_deterministic:
        raise PreconditionError('simplify_signatures needs an input-deterministic machine')
    n = m.num_states
    domain = []
    for ts in m.transitions:
        cover = Label.false(m.ap)
        for t in ts:
            cover = cover | t.inp
        domain.append(cover)

    def local_ok(a: int, b: int) -> bool:
        if not domain[a].implies(domain[b]):
            return False
        for ta in m.transitions[a]:
            for tb in m.transitions[b]:
                if ta.inp.intersects(tb.inp) and not tb.out.implies(ta.out):
                    return False
        return True

    rel = {(a, b) for a in range(n) for b in range(n) if a == b or local_ok(a, b)}
    changed = True
    while changed:
        changed = False
        for a, b in sorted(rel):
            if a == b:
                continue
            for ta in m.transitions[a]:
                if any(ta.inp.intersects(tb.inp) and (ta.dst, tb.dst) not in rel
                       for tb in m.transitions[b]):
                    rel.discard((a, b))
                    changed = True
                    break

    covers = {b: {a for a in range(n) if (a, b) in rel} for b in range(n)}
    rep = {}  # type: Dict[int, int]
    for b in sorted(range(n), key=lambda s: (-len(covers[s]), s)):
        if b in rep:
            continue
        rep[b] = b
        for a in sorted(covers[b]):
            rep.setdefault(a, b)

    reps = sorted(set(rep.values()))
    reps.remove(rep[m.initial])
    reps.insert(0, rep[m.initial])
    index = {r: i for i, r in enumerate(reps)}
    rows = []
    for r in reps:
        row = {}  # type: Dict[Tuple[Label, int], Label]
        for t in m.transitions[r]:
            _add(row, t.inp, t.out, index[rep[t.dst]])
        rows.append(row)
    result = MealyMachine(m.ap, m.partition, _merge_rows(rows)).reachable()
    log.debug(f"[STRATEGY] signature simplification {n} -> {result.num_states} states")
    return result


# ── SAT-based minimization ───────────────────────────────────────────────────

def _cell_table(m: MealyMachine, cells: List[Label]):
    out = []
    dst = []
    for ts in m.transitions:
        row_out, row_dst = [], []
        for cell in cells:
            match = [t for t in ts if cell.implies(t.inp)]
            if not match:
                raise PreconditionError('minimize_sat needs an input-complete machine')
            row_out.append(match[0].out)
            row_dst.append(match[0].dst)
        out.append(row_out)
        dst.append(row_dst)
    return out, dst


def incompatible_pairs(m: MealyMachine) -> Set[Tuple[int, int]]:
    """Pairs of states that no single state can implement together."""
    cells = refine([t.inp for ts in m.transitions for t in ts])
    out, dst = _cell_table(m, cells)
    n = m.num_states
    bad = set()
    for a in range(n):
        for b in range(a + 1, n):
            if any(not out[a][c].intersects(out[b][c]) for c in range(len(cells))):
                bad.add((a, b))
    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in range(a + 1, n):
                if (a, b) in bad:
                    continue
                for c in range(len(cells)):
                    x, y = sorted((dst[a][c], dst[b][c]))
                    if (x, y) in bad:
                        bad.add((a, b))
                        changed = True
                        break
    return bad


def minimize_sat(m: MealyMachine, solver=None) -> MealyMachine:
    """Machine with the fewest states whose behavior refines m's.

    States are covered by k classes of pairwise compatible states, closed
    under successors; k grows from the size of a largest clique of
    pairwise incompatible states until the CNF becomes satisfiable.
    """
    from .sat import SatProblem, default_solver

    if not m.input_deterministic:
        raise PreconditionError('minimize_sat needs an input-deterministic machine')
    if not m.input_complete:
        raise PreconditionError('minimize_sat needs an input-complete machine')
    m = m.reachable()
    n = m.num_states
    if n <= 1:
        return m
    solver = solver or default_solver()
    cells = refine([t.inp for ts in m.transitions for t in ts])
    out, dst = _cell_table(m, cells)
    bad = incompatible_pairs(m)

    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(bad)
    clique = sorted(max(nx.find_cliques(g), key=lambda c: (len(c), sorted(c))))
    log.debug(f"[SAT] {n} states, {len(bad)} incompatible pairs, lower bound {len(clique)}")

    blocked = []  # type: List[List[int]]
    k = max(1, len(clique))
    while k < n:
        problem = SatProblem()
        x = [[problem.new_var() for _ in range(k)] for _ in range(n)]
        y = [[[problem.new_var() for _ in range(k)] for _ in cells] for _ in range(k)]
        for s in range(n):
            problem.add_clause([x[s][j] for j in range(k)])
        for a, b in bad:
            for j in range(k):
                problem.add_clause([-x[a][j], -x[b][j]])
        for s in range(n):
            for j in range(k):
                for c in range(len(cells)):
                    for jj in range(k):
                        problem.add_clause([-x[s][j], -y[j][c][jj], x[dst[s][c]][jj]])
        for j in range(k):
            for c in range(len(cells)):
                problem.add_clause([y[j][c][jj] for jj in range(k)])
        for j, s in enumerate(clique):
            problem.add_clause([x[s][j]])
        for group in blocked:
            for j in range(k):
                problem.add_clause([-x[s][j] for s in group])

        model = solver.solve(problem)
        if model is None:
            log.debug(f"[SAT] no cover with {k} classes")
            k += 1
            continue
        members = [[s for s in range(n) if model.value(x[s][j])] for j in range(k)]
        conflict = _class_conflict(members, out, len(cells))
        if conflict is not None:
            blocked.append(conflict)
            continue
        succ = [[next(jj for jj in range(k) if model.value(y[j][c][jj])) for c in range(len(cells))]
                for j in range(k)]
        result = _build_from_classes(m, cells, members, succ, out)
        log.debug(f"[SAT] minimized {n} -> {result.num_states} states")
        return result
    log.debug(f"[SAT] machine already minimal ({n} states)")
    return m


def _class_conflict(members: List[List[int]], out, ncells: int) -> Optional[List[int]]:
    """A set of states in one class whose outputs have no common assignment."""
    for group in members:
        for c in range(ncells):
            acc = None
            chosen = []
            for s in group:
                acc = out[s][c] if acc is None else acc & out[s][c]
                chosen.append(s)
                if not acc.is_satisfiable():
                    return chosen
    return None


def _build_from_classes(m: MealyMachine, cells: List[Label], members: List[List[int]],
                        succ: List[List[int]], out) -> MealyMachine:
    k = len(members)
    init = next(j for j in range(k) if m.initial in members[j])
    rows = []
    for j in range(k):
        row = {}  # type: Dict[Tuple[Label, int], Label]
        for c, cell in enumerate(cells):
            label = Label.true(m.ap)
            for s in members[j]:
                label = label & out[s][c]
            _add(row, cell, label, succ[j][c])
        rows.append(row)
    machine = MealyMachine(m.ap, m.partition, _merge_rows(rows), init)
    return machine.reachable()


# ── Bypassing the game ───────────────────────────────────────────────────────

def _classify_edges(dba: Automaton) -> List[List[str]]:
    """'none' off every cycle, 'reject' on some cycle without accepting edges,
    'accept' when every cycle through the edge is accepting."""
    g = dba.graph()
    comp_of = {}
    for cid, comp in enumerate(nx.strongly_connected_components(g)):
        for s in comp:
            comp_of[s] = cid
    calm = nx.DiGraph()
    calm.add_nodes_from(range(dba.num_states))
    for s, e in dba.iter_edges():
        if not e.colors and comp_of[s] == comp_of[e.dst]:
            calm.add_edge(s, e.dst)
    calm_of = {}
    for cid, comp in enumerate(nx.strongly_connected_components(calm)):
        for s in comp:
            calm_of[s] = cid
    kinds = []
    for s, es in enumerate(dba.edges):
        row = []
        for e in es:
            if comp_of[s] != comp_of[e.dst]:
                row.append('none')
            elif not e.colors and calm_of[s] == calm_of[e.dst] and calm.has_edge(s, e.dst) \
                    and (s == e.dst or nx.has_path(calm, e.dst, s)):
                row.append('reject')
            else:
                row.append('accept')
        kinds.append(row)
    return kinds


def bypass_strategy(pattern: BypassPattern, p: SignalPartition,
                    dba: Optional[Automaton] = None) -> Tuple[bool, Optional[MealyMachine]]:
    """Strategy for G(b1) & (phi <-> GF b2) read off a DBA for phi.

    Each DBA edge is conjoined with b1 & !b2 when it can lie on a rejecting
    cycle, b1 & b2 when every cycle through it is accepting, and b1 alone
    when it lies on no cycle. An unsatisfiable output for some input means
    the specification is unrealizable.
    """
    from .translate import ltl_to_dba_if_recurrence

    pattern.validate(p)
    ap = p.ap
    if dba is None:
        dba = ltl_to_dba_if_recurrence(pattern.phi, ap)
        if dba is None:
            raise BypassNotApplicable(f"{print_ltl(pattern.phi)} is not a recurrence property")
    dba = dba.with_ap(ap)
    if not dba.deterministic or dba.acceptance.kind != BUCHI:
        raise BypassNotApplicable('bypass needs a deterministic Buchi automaton')
    dba = dba.complete_with_sink()

    b1 = Label.from_formula(pattern.b1, ap)
    b2 = Label.from_formula(pattern.b2, ap)
    constraint = {'none': b1, 'reject': b1 & ~b2, 'accept': b1 & b2}
    kinds = _classify_edges(dba)
    in_mask = Label.true(ap).mask_of(p.inputs)
    rows = []
    for s, es in enumerate(dba.edges):
        row = {}  # type: Dict[Tuple[Label, int], Label]
        for e, kind in zip(es, kinds[s]):
            c = constraint[kind]
            support = (c.support_mask() | e.label.support_mask()) & in_mask
            for bits in minterms(support):
                cell = Label.from_bits(ap, support, bits) & e.label
                if cell.is_false():
                    continue
                out = c.cofactor_bits(support, bits)
                if not out.is_satisfiable():
                    log.info(f"[BYPASS] output constraint empty on a {kind} edge: unrealizable")
                    return False, None
                _add(row, cell, out, e.dst)
        rows.append(row)
    machine = MealyMachine(ap, p, _merge_rows(rows), dba.initial)
    log.debug(f"[BYPASS] strategy with {machine.num_states} state(s) from a "
              f"{dba.num_states}-state DBA (phi={print_ltl(pattern.phi)})")
    return True, machine
