"""
AIGER output for LTL Synth.

Mealy machines are encoded into one and-inverter graph: each machine gets
binary-encoded latches (state 0 = all latches low, the AIGER reset), and
next-state and output functions are built from the machines' cube labels.
A single structurally hashed builder is shared by all machines, so gates
that two decomposed strategies have in common are emitted once.

Literals follow the AIGER convention: 0 is false, 1 is true, 2v and 2v+1
are variable v and its negation.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

from .errors import AigerFormatError, PreconditionError
from .label import Label
from .ltl import SignalPartition

log = logging.getLogger('ltl-synth')

FALSE_LIT = 0
TRUE_LIT = 1


def negate(lit: int) -> int:
    return lit ^ 1


@dataclass
class AigerCircuit:
    """ASCII AIGER circuit; inputs are variables 1..I, latches I+1..I+L."""
    inputs: List[str]
    latches: List[Tuple[int, int]]           # (literal, next-state literal)
    outputs: List[Tuple[int, str]]           # (literal, name)
    ands: List[Tuple[int, int, int]]         # (lhs, rhs0, rhs1)
    latch_names: List[str] = field(default_factory=list)
    stats: Dict[str, int] = field(default_factory=dict)

    @property
    def max_var(self) -> int:
        lits = [2 * (len(self.inputs) + len(self.latches))]
        lits.extend(lhs for lhs, _, _ in self.ands)
        return max(lits) // 2

    @property
    def num_latches(self) -> int:
        return len(self.latches)

    @property
    def num_gates(self) -> int:
        return len(self.ands)

    def input_literal(self, name: str) -> int:
        return 2 * (self.inputs.index(name) + 1)

    def output_names(self) -> List[str]:
        return [name for _, name in self.outputs]

    def validate(self):
        """Literals in range, gates defined once and in topological order."""
        n_in = len(self.inputs)
        defined = set(range(1, n_in + len(self.latches) + 1))
        for k, (lit, _) in enumerate(self.latches):
            if lit != 2 * (n_in + k + 1):
                raise PreconditionError(f"latch {k} has literal {lit}, expected {2 * (n_in + k + 1)}")
        for lhs, a, b in self.ands:
            if lhs & 1 or lhs // 2 in defined or lhs < 2:
                raise PreconditionError(f"AND gate lhs {lhs} is odd, constant or redefined")
            for rhs in (a, b):
                if rhs > 1 and rhs // 2 not in defined:
                    raise PreconditionError(f"AND gate {lhs} reads {rhs} before its definition")
            defined.add(lhs // 2)
        for lit in [n for _, n in self.latches] + [o for o, _ in self.outputs]:
            if lit > 1 and lit // 2 not in defined:
                raise PreconditionError(f"literal {lit} is undefined")


# ── Structural hashing ───────────────────────────────────────────────────────

class AigBuilder:
    """AND gates with constant folding and structural hashing."""

    def __init__(self, num_inputs: int, num_latches: int):
        self.next_var = num_inputs + num_latches + 1
        self.ands = []  # type: List[Tuple[int, int, int]]
        self._strash = {}  # type: Dict[Tuple[int, int], int]
        self.hits = 0

    def and_(self, a: int, b: int) -> int:
        if a == FALSE_LIT or b == FALSE_LIT or a == negate(b):
            return FALSE_LIT
        if a == TRUE_LIT or a == b:
            return b
        if b == TRUE_LIT:
            return a
        key = (max(a, b), min(a, b))
        if key in self._strash:
            self.hits += 1
            return self._strash[key]
        lhs = 2 * self.next_var
        self.next_var += 1
        self.ands.append((lhs, key[0], key[1]))
        self._strash[key] = lhs
        return lhs

    def or_(self, a: int, b: int) -> int:
        return negate(self.and_(negate(a), negate(b)))

    def and_all(self, lits: Sequence[int]) -> int:
        out = TRUE_LIT
        for lit in lits:
            out = self.and_(out, lit)
        return out

    def or_all(self, lits: Sequence[int]) -> int:
        out = FALSE_LIT
        for lit in lits:
            out = self.or_(out, lit)
        return out

    def cube(self, care: int, value: int, var_lits: Mapping[int, int]) -> int:
        lits = []
        for bit, lit in sorted(var_lits.items()):
            if care >> bit & 1:
                lits.append(lit if value >> bit & 1 else negate(lit))
        return self.and_all(lits)

    def label(self, label: Label, var_lits: Mapping[int, int]) -> int:
        """Sum of products over the label's cubes; var_lits maps ap positions to literals."""
        missing = label.support_mask() & ~sum(1 << bit for bit in var_lits)
        if missing:
            raise PreconditionError(f"label {label.to_text()} reads signals outside the circuit")
        return self.or_all([self.cube(c, v, var_lits) for c, v in label.cubes])


# ── Encoding ─────────────────────────────────────────────────────────────────

def _bits_for(n: int) -> int:
    return max(0, (n - 1).bit_length())


def encode(machines: Sequence, p: SignalPartition, dontcare: int = 0) -> AigerCircuit:
    """One circuit for machines with disjoint outputs; uncovered outputs are constant."""
    owner = {}  # type: Dict[str, int]
    for j, m in enumerate(machines):
        if not m.input_deterministic or not m.input_complete:
            raise PreconditionError(f"machine {j} is not input-deterministic and input-complete")
        for o in m.outputs:
            if o not in p.outputs:
                raise PreconditionError(f"machine {j} drives {o!r}, which is not an output")
            if o in owner:
                raise PreconditionError(f"output {o!r} driven by machines {owner[o]} and {j}")
            owner[o] = j
    machines = [m if m.initial == 0 else m.reachable() for m in machines]

    widths = [_bits_for(m.num_states) for m in machines]
    n_in = len(p.inputs)
    builder = AigBuilder(n_in, sum(widths))
    input_lit = {name: 2 * (k + 1) for k, name in enumerate(p.inputs)}

    latches = []  # type: List[Tuple[int, int]]
    latch_names = []  # type: List[str]
    out_lit = {}  # type: Dict[str, int]
    first = n_in + 1
    for j, m in enumerate(machines):
        state_vars = [2 * (first + k) for k in range(widths[j])]
        first += widths[j]
        var_lits = {m.ap.index(name): lit for name, lit in input_lit.items() if name in m.ap}
        state_lit = [builder.cube((1 << widths[j]) - 1, s, dict(enumerate(state_vars)))
                     for s in range(m.num_states)]
        prefer = (1 << len(m.ap)) - 1 if dontcare else 0
        next_terms = [[] for _ in state_vars]  # type: List[List[int]]
        out_terms = {o: [] for o in m.outputs}  # type: Dict[str, List[int]]
        for s, ts in enumerate(m.transitions):
            for t in ts:
                cond = builder.and_(state_lit[s], builder.label(t.inp, var_lits))
                if cond == FALSE_LIT:
                    continue
                bits = t.out.pick_bits(prefer)
                for o in m.outputs:
                    if bits >> m.ap.index(o) & 1:
                        out_terms[o].append(cond)
                for k in range(widths[j]):
                    if t.dst >> k & 1:
                        next_terms[k].append(cond)
        for k, lit in enumerate(state_vars):
            latches.append((lit, builder.or_all(next_terms[k])))
            latch_names.append(f"m{j}_s{k}")
        for o in m.outputs:
            out_lit[o] = builder.or_all(out_terms[o])

    outputs = [(out_lit.get(o, TRUE_LIT if dontcare else FALSE_LIT), o) for o in p.outputs]
    circuit = AigerCircuit(list(p.inputs), latches, outputs, builder.ands, latch_names,
                           {'strash_hits': builder.hits})
    circuit.validate()
    log.debug(f"[AIGER] {len(machines)} machine(s) -> {circuit.num_latches} latches, "
              f"{circuit.num_gates} gates, {builder.hits} shared")
    return circuit


# ── ASCII format ─────────────────────────────────────────────────────────────

def print_aag(c: AigerCircuit) -> str:
    out = [f"aag {c.max_var} {len(c.inputs)} {len(c.latches)} {len(c.outputs)} {len(c.ands)}"]
    for k in range(len(c.inputs)):
        out.append(str(2 * (k + 1)))
    for lit, nxt in c.latches:
        out.append(f"{lit} {nxt}")
    for lit, _ in c.outputs:
        out.append(str(lit))
    for lhs, a, b in c.ands:
        out.append(f"{lhs} {a} {b}")
    for k, name in enumerate(c.inputs):
        out.append(f"i{k} {name}")
    for k, name in enumerate(c.latch_names):
        out.append(f"l{k} {name}")
    for k, (_, name) in enumerate(c.outputs):
        out.append(f"o{k} {name}")
    return '\n'.join(out) + '\n'


def _ints(line: str, count, lineno: int) -> List[int]:
    parts = line.split()
    allowed = count if isinstance(count, tuple) else (count,)
    if len(parts) not in allowed:
        raise AigerFormatError(f"expected {count} number(s), got {line!r}", lineno)
    try:
        values = [int(x) for x in parts]
    except ValueError:
        raise AigerFormatError(f"non-numeric literal in {line!r}", lineno)
    if any(v < 0 for v in values):
        raise AigerFormatError(f"negative literal in {line!r}", lineno)
    return values


def _topological(ands: List[Tuple[int, int, int]], first_gate_var: int) -> List[Tuple[int, int, int]]:
    by_var = {lhs // 2: (lhs, a, b) for lhs, a, b in ands}
    done = set()  # type: set
    order = []
    for lhs, _, _ in ands:
        stack = [(lhs // 2, False)]
        active = set()
        while stack:
            v, expanded = stack.pop()
            if v in done:
                continue
            if expanded:
                active.discard(v)
                done.add(v)
                order.append(by_var[v])
                continue
            if v in active:
                raise AigerFormatError(f"combinational cycle through variable {v}")
            active.add(v)
            stack.append((v, True))
            _, a, b = by_var[v]
            for rhs in (b, a):
                w = rhs // 2
                if w >= first_gate_var and w not in done:
                    if w in active:
                        raise AigerFormatError(f"combinational cycle through variable {w}")
                    stack.append((w, False))
    return order


def parse_aag(text: str) -> AigerCircuit:
    """Read ASCII AIGER (header counts B, C, J, F must be zero when present)."""
    lines = text.split('\n')
    if not lines or not lines[0].startswith('aag'):
        raise AigerFormatError("missing 'aag' header", 1)
    header = lines[0].split()
    if len(header) < 6 or any(not x.isdigit() for x in header[1:]):
        raise AigerFormatError(f"malformed header {lines[0]!r}", 1)
    m, i, l, o, a = (int(x) for x in header[1:6])
    if any(int(x) for x in header[6:]):
        raise AigerFormatError('bad-state, constraint, justice and fairness sections unsupported', 1)
    if m < i + l + a:
        raise AigerFormatError(f"maximum variable {m} below I + L + A", 1)
    needed = 1 + i + l + o + a
    if len(lines) < needed:
        raise AigerFormatError(f"truncated: {needed} lines expected", len(lines))
    max_lit = 2 * m + 1

    def check(v: int, lineno: int):
        if v > max_lit:
            raise AigerFormatError(f"literal {v} exceeds 2*{m}+1", lineno)

    row = 1
    for k in range(i):
        (lit,) = _ints(lines[row], 1, row + 1)
        if lit != 2 * (k + 1):
            raise AigerFormatError(f"input literal {lit}, expected {2 * (k + 1)}", row + 1)
        row += 1
    latches = []
    for k in range(l):
        values = _ints(lines[row], (2, 3), row + 1)
        lit, nxt = values[0], values[1]
        if lit != 2 * (i + k + 1):
            raise AigerFormatError(f"latch literal {lit}, expected {2 * (i + k + 1)}", row + 1)
        if len(values) == 3 and values[2] != 0:
            raise AigerFormatError('only latches reset to 0 are supported', row + 1)
        check(nxt, row + 1)
        latches.append((lit, nxt))
        row += 1
    out_lits = []
    for _ in range(o):
        (lit,) = _ints(lines[row], 1, row + 1)
        check(lit, row + 1)
        out_lits.append(lit)
        row += 1
    ands = []
    seen = set()
    for _ in range(a):
        lhs, r0, r1 = _ints(lines[row], 3, row + 1)
        if lhs & 1 or lhs // 2 <= i + l or lhs // 2 in seen:
            raise AigerFormatError(f"bad AND gate lhs {lhs}", row + 1)
        for v in (lhs, r0, r1):
            check(v, row + 1)
        seen.add(lhs // 2)
        ands.append((lhs, r0, r1))
        row += 1
    for lhs, r0, r1 in ands:
        for v in (r0, r1):
            if v // 2 > i + l and v // 2 not in seen:
                raise AigerFormatError(f"AND gate {lhs} reads undefined literal {v}")

    names = {'i': {}, 'l': {}, 'o': {}}  # type: Dict[str, Dict[int, str]]
    for lineno in range(row, len(lines)):
        line = lines[lineno]
        if line == 'c':
            break
        if not line.strip():
            continue
        sym = re.match(r'([ilo])(\d+) (.+)$', line)
        if not sym:
            raise AigerFormatError(f"bad symbol line {line!r}", lineno + 1)
        names[sym.group(1)][int(sym.group(2))] = sym.group(3)

    inputs = [names['i'].get(k, f"i{k}") for k in range(i)]
    outputs = [(lit, names['o'].get(k, f"o{k}")) for k, lit in enumerate(out_lits)]
    latch_names = [names['l'].get(k, f"l{k}") for k in range(l)] if names['l'] else []
    circuit = AigerCircuit(inputs, latches, outputs, _topological(ands, i + l + 1), latch_names)
    return circuit


# ── Simulation ───────────────────────────────────────────────────────────────

def circuit_step(c: AigerCircuit, latch_bits: int,
                 assignment: Mapping[str, bool]) -> Tuple[Dict[str, bool], int]:
    """Outputs and next latch vector (bit k = latch k) for one input assignment."""
    n_in = len(c.inputs)
    values = [False] * (c.max_var + 1)
    for k, name in enumerate(c.inputs):
        values[k + 1] = bool(assignment.get(name, False))
    for k in range(len(c.latches)):
        values[n_in + k + 1] = bool(latch_bits >> k & 1)

    def lit(x: int) -> bool:
        return values[x >> 1] ^ bool(x & 1) if x > 1 else bool(x)

    for lhs, a, b in c.ands:
        values[lhs >> 1] = lit(a) and lit(b)
    outputs = {name: lit(o) for o, name in c.outputs}
    nxt = 0
    for k, (_, n) in enumerate(c.latches):
        if lit(n):
            nxt |= 1 << k
    return outputs, nxt


def simulate(c: AigerCircuit, inputs: Sequence[Mapping[str, bool]]) -> List[Dict[str, bool]]:
    """Cycle-by-cycle outputs from the all-zero latch state."""
    latch_bits = 0
    trace = []
    for step in inputs:
        outputs, latch_bits = circuit_step(c, latch_bits, step)
        trace.append(outputs)
    return trace
